#!/usr/bin/env python3
"""
Circle Module

This module provides the critical circle dynamics of the Blaschke product
f(z) = e^{2 pi i tau} z^2 (z - 3)/(1 - 3z): its restriction to the unit circle
is a degree-one homeomorphism with a single cubic critical point at angle 0.

Angles are measured in turns. The lift used throughout is

    F(x) = x + tau - atan2(sin 2 pi x, 3 - cos 2 pi x) / pi

which is nondecreasing with F'(0) = 0.

Key Features:
- blaschke_angle and rotation_number brackets with convergent acceleration
- solve_tau: bisection for the tau with rotation number gamma
- dynamical_partition: sorted orbit of angle 0 of length q_{n+1}
- estimate_B / commensurability: empirical real bounds and the decay rate tau_hat

Usage:
    tau = solve_tau(CFNumber.golden(), 1e-8)
    part = dynamical_partition(BlaschkeMap(tau), CFNumber.golden(), 6)
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List

import mpmath
import numpy as np

from .cf import cf_value, convergents
from .configure import load_config
from .exceptions import DomainError, PrecisionExhausted, ResourceExhausted
from .numerics import Dyadic, PrecisionReal

logger = logging.getLogger(__name__)

FLOAT_STEP_ERROR = 2.0 ** -48
ROTATION_PREC = 80
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class BlaschkeMap:
    """
    The circle map of f_tau.

    Attributes:
        tau (PrecisionReal): Rotation parameter in [0, 1)
    """

    tau: PrecisionReal

    def __post_init__(self):
        object.__setattr__(self, 'tau', PrecisionReal.coerce(self.tau))

    @property
    def tau_float(self):
        return float(self.tau)

    def lift(self, x):
        t = 2 * math.pi * x
        return x + self.tau_float - math.atan2(math.sin(t), 3 - math.cos(t)) / math.pi

    def evaluate(self, z):
        """f(z) on the Riemann sphere (complex floats)."""
        return complex(np.exp(2j * np.pi * self.tau_float)) * z * z * (z - 3) / (1 - 3 * z)


def blaschke_angle(m, x):
    """arg f(e^{2 pi i x}) / 2 pi, reduced to [0, 1)."""
    return m.lift(x) % 1.0


class _Bracket:
    """Running intersection of the intervals [p/j, (p+1)/j] containing rho."""

    def __init__(self):
        self.lo = (0, 1)
        self.hi = (1, 1)

    def update(self, p_lo, p_hi, j):
        if p_lo * self.lo[1] > self.lo[0] * j:
            self.lo = (p_lo, j)
        if p_hi * self.hi[1] < self.hi[0] * j:
            self.hi = (p_hi, j)

    def fractions(self):
        return Fraction(*self.lo), Fraction(*self.hi)

    def below(self, fr):
        """Upper end strictly below fr."""
        return self.hi[0] * fr.denominator < fr.numerator * self.hi[1]

    def above(self, fr):
        return self.lo[0] * fr.denominator > fr.numerator * self.lo[1]

    def within(self, lo, hi):
        return (self.lo[0] * lo.denominator >= lo.numerator * self.lo[1]
                and self.hi[0] * hi.denominator <= hi.numerator * self.hi[1])

    def narrower_than(self, width):
        return (Fraction(*self.hi) - Fraction(*self.lo)) < width


def _float_step(x, tau, direction):
    """
    One lift step in floats, pushed outward by FLOAT_STEP_ERROR.

    With unit roundoff u = 2^-53, x in [0, 1) and sin, cos and atan2 within
    one ulp: 2 pi x errs by at most 13u, so sin and 3 - cos err by at most 15u
    and 19u; their quotient (at most 0.36 in size, denominator at least 2)
    by 12u, the arctangent by 13u and its division by pi by 5u. Rounding tau
    and the three additions add at most 7u, so one step errs by at most
    12u, well inside 2^-48 = 32u.

    Returns:
        tuple: (integer part, fractional part) of the pushed value
    """
    t = 2 * math.pi * x
    y = x + tau - math.atan2(math.sin(t), 3 - math.cos(t)) / math.pi + direction * FLOAT_STEP_ERROR
    k = math.floor(y)
    return k, y - k


def _mp_step(x, tau, direction):
    """
    One lift step at ROTATION_PREC bits, pushed outward by 2^(6 - ROTATION_PREC).

    The error count of _float_step carries over with u = 2^-ROTATION_PREC
    (mpmath rounds each operation to nearest), giving less than 12u.
    """
    with mpmath.workprec(ROTATION_PREC):
        t = 2 * mpmath.pi * x
        y = x + tau - mpmath.atan(mpmath.sin(t) / (3 - mpmath.cos(t))) / mpmath.pi
        y = y + direction * mpmath.ldexp(1, 6 - ROTATION_PREC)
        k = int(mpmath.floor(y))
        return k, mpmath.fsub(y, k, exact=True)


def _orbit_steps(m, count, rigorous=False):
    """
    Yield (j, p_lo, p_hi) with p_lo <= F^j(0) < p_hi for j = 1..count.

    F is nondecreasing in x and in tau, so an orbit stepped from tau.lower
    with every value pushed down by the step error stays below F^j(0), and one
    stepped from tau.upper and pushed up stays above it.
    """
    if rigorous:
        step, taus = _mp_step, (m.tau.lower.to_mpf(), m.tau.upper.to_mpf())
        x_lo, x_hi = mpmath.mpf(0), mpmath.mpf(0)
    else:
        step, taus = _float_step, (float(m.tau.lower), float(m.tau.upper))
        x_lo, x_hi = 0.0, 0.0
    w_lo = w_hi = 0
    for j in range(1, count + 1):
        k, x_lo = step(x_lo, taus[0], -1)
        w_lo += k
        k, x_hi = step(x_hi, taus[1], 1)
        w_hi += k
        yield j, w_lo, w_hi + 1


def _enclose(lo, hi):
    lo_d = Dyadic((lo.numerator << 64) // lo.denominator, -64)
    hi_d = Dyadic(-((-hi.numerator << 64) // hi.denominator), -64)
    return PrecisionReal.from_bounds(lo_d, hi_d)


def rotation_number(m, iters, tol=0.0):
    """
    Enclosure of the rotation number of the lift F over the whole tau enclosure.

    If p <= F^j(0) < p + 1 then p/j <= rho <= (p + 1)/j; the brackets are
    intersected, which sharpens them most at the convergent denominators.
    F^j(0) is enclosed by two orbits run in mpmath at ROTATION_PREC bits.

    Args:
        m (BlaschkeMap): The map
        iters (int): Maximum number of iterates
        tol (float): Stop early once the bracket is narrower than tol

    Returns:
        PrecisionReal: Enclosure of width at most about 1/iters
    """
    if iters < 1:
        raise DomainError(f"rotation_number needs iters >= 1, got {iters}")
    bracket = _Bracket()
    for j, p_lo, p_hi in _orbit_steps(m, iters, rigorous=True):
        bracket.update(p_lo, p_hi, j)
        if tol and j % 64 == 0 and bracket.narrower_than(Fraction(tol)):
            break
    return _enclose(*bracket.fractions())


def _compare_rotation(m, target_lo, target_hi, tol, max_iters):
    """-1 if rho < target, +1 if rho > target, 0 if rho lies within tol of it."""
    bracket = _Bracket()
    for j, p_lo, p_hi in _orbit_steps(m, max_iters):
        bracket.update(p_lo, p_hi, j)
        if bracket.below(target_lo):
            return -1, j
        if bracket.above(target_hi):
            return 1, j
        if bracket.within(target_lo - tol, target_hi + tol):
            return 0, j
    raise ResourceExhausted(f"Rotation number at tau={m.tau_float:.17g} undecided after {max_iters} iterates",
                            hint="Raise rotation_max_iters or loosen the tolerance.")


def solve_tau(gamma, tol, config=None):
    """
    The tau in [0, 1] with rotation number gamma, by bisection.

    tau -> rho is nondecreasing; rational plateaus cannot capture an irrational
    target, so every midpoint is decided once its rotation bracket separates
    from gamma.

    Returns:
        PrecisionReal: Enclosure of tau; its midpoint has |rho - gamma| < tol

    Raises:
        DomainError: For rational gamma or tol <= 0
        ResourceExhausted: After 200 bisections or when a midpoint stays undecided
    """
    if not gamma.is_irrational():
        raise DomainError(f"solve_tau needs an irrational rotation number, got {gamma.literal()}")
    tol = float(tol)
    if tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    config = config or load_config()
    max_iters = int(config['rotation_max_iters'])
    target = cf_value(gamma, 64)
    target_lo, target_hi = target.lower.to_fraction(), target.upper.to_fraction()
    tol_fr = Fraction(tol)
    lo, hi = Fraction(0), Fraction(1)
    for depth in range(MAX_BISECTIONS):
        mid = (lo + hi) / 2
        mid_d = Dyadic.from_fraction(mid)
        side, used = _compare_rotation(BlaschkeMap(PrecisionReal(mid_d)), target_lo, target_hi,
                                       tol_fr, max_iters)
        if side == 0:
            logger.debug(f"solve_tau: {gamma.literal()} settled after {depth + 1} bisections ({used} iterates)")
            result = PrecisionReal(mid_d, Dyadic.from_fraction((hi - lo) / 2))
            return result
        if side < 0:
            lo = mid
        else:
            hi = mid
    raise ResourceExhausted(f"solve_tau({gamma.literal()}) did not converge in {MAX_BISECTIONS} bisections")


@dataclass
class Partition:
    """
    The n-th dynamical partition: orbit of angle 0 up to q_{n+1} - 1, sorted.

    Attributes:
        level (int): n
        points (np.ndarray): Sorted angles in [0, 1)
    """

    level: int
    points: np.ndarray

    def __len__(self):
        return len(self.points)

    def intervals(self):
        """Lengths of the circular gaps, the last one wrapping past 1."""
        pts = self.points
        return np.diff(np.append(pts, pts[0] + 1.0))

    def adjacent_ratios(self):
        lengths = self.intervals()
        nxt = np.roll(lengths, -1)
        return np.maximum(lengths / nxt, nxt / lengths)

    def count_within(self, finer):
        """Number of points of a finer partition in each gap of this one."""
        idx = np.searchsorted(self.points, finer.points, side='right') - 1
        idx[idx < 0] = len(self.points) - 1
        return np.bincount(idx, minlength=len(self.points))


def dynamical_partition(m, gamma, n):
    """
    Sorted orbit {0, F(0), ..., F^{q_{n+1}-1}(0)} mod 1.

    Raises:
        PrecisionExhausted: If two orbit points coincide in float precision
    """
    if n < 0:
        raise DomainError(f"Partition level must be non-negative, got {n}")
    count = convergents(gamma, n + 1)[n + 1].q
    points = np.empty(count)
    points[0] = 0.0
    x = 0.0
    for i in range(1, count):
        x = m.lift(x) % 1.0
        points[i] = x
    points.sort()
    gaps = np.diff(np.append(points, points[0] + 1.0))
    if count > 1 and gaps.min() <= 2.0 ** -40:
        raise PrecisionExhausted(f"Level-{n} partition of {gamma.literal()} has coincident points",
                                 hint="Use a lower level or a larger tolerance for tau.")
    return Partition(n, points)


@dataclass
class CommensurabilityEstimate:
    """
    Empirical real bounds over a run of consecutive partitions.

    Attributes:
        b_hat (float): Largest adjacent-interval ratio
        ratios (list): Per-level maxima
        max_lengths (list): Per-level longest interval
        levels (list): Partition levels used
        tau (PrecisionReal): Solved tau, when known
    """

    b_hat: float
    ratios: List[float] = field(default_factory=list)
    max_lengths: List[float] = field(default_factory=list)
    levels: List[int] = field(default_factory=list)
    tau: PrecisionReal = None

    @property
    def tau_hat(self):
        return math.sqrt(self.b_hat / (self.b_hat + 1))

    def tau_with_safety(self, factor=2):
        b = factor * self.b_hat
        return math.sqrt(b / (b + 1))


def estimate_B(partitions):
    """
    B_hat = max adjacent-interval ratio over consecutive partitions.

    Raises:
        DomainError: For fewer than two levels, gaps in the levels or a
            partition with fewer than two points
    """
    partitions = list(partitions)
    if len(partitions) < 2:
        raise DomainError("estimate_B needs at least two consecutive partitions")
    levels = [p.level for p in partitions]
    if any(b - a != 1 for a, b in zip(levels, levels[1:])):
        raise DomainError(f"Partition levels {levels} are not consecutive")
    ratios, longest = [], []
    for p in partitions:
        if len(p) < 2:
            raise DomainError(f"Level-{p.level} partition is degenerate ({len(p)} point)")
        ratios.append(float(p.adjacent_ratios().max()))
        longest.append(float(p.intervals().max()))
    return CommensurabilityEstimate(max(ratios), ratios, longest, levels)


@lru_cache(maxsize=64)
def _commensurability(gamma, levels, max_points, tol):
    tau = solve_tau(gamma, tol)
    m = BlaschkeMap(tau)
    qs = [c.q for c in convergents(gamma, levels + 1)]
    usable = [n for n in range(1, levels + 1) if qs[n + 1] <= max_points]
    if len(usable) < 2:
        raise DomainError(f"Too few partition levels for {gamma.literal()} within {max_points} points")
    estimate = estimate_B([dynamical_partition(m, gamma, n) for n in usable])
    estimate.tau = tau
    logger.info(f"commensurability: {gamma.literal()} B_hat={estimate.b_hat:.4f} over levels {usable}")
    return estimate


def commensurability(gamma, config=None):
    """Solve tau for gamma, build the configured partitions and estimate B_hat (cached)."""
    config = config or load_config()
    return _commensurability(gamma.canonical(), int(config['partition_levels']),
                             int(config['partition_max_points']), 1e-9)
