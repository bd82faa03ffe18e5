#!/usr/bin/env python3
"""
Julia Module

This module decides Julia-set membership for P(z) = z^2 + lambda z and renders
ball-union approximations C_m of J(P).

Every decision is made on float orbits whose rounding error is tracked next to
the orbit, so an escape is only counted once |z_k| - e_k > 2. Escaping points
get a two-sided distance estimate from the Green's function gradient

    sinh G / (2 e^G |grad G|)  <=  dist(z, J)  <=  2 sinh G / |grad G|

evaluated on enclosures of G and |grad G| that account for the truncated
orbit and its rounding error. J-proximity is certified either by a known
point of J (the repelling fixed point 1 - lambda and its backward preimages)
or by an escaping neighbor of a point inside a certified interior disk.

Key Features:
- classify_point: f(d, n) in {0, 1} with a far / near / in-between band
- render: vectorized grid classification at pitch 2^-(m+1)
- exterior_distance_bound: certified lower bound on dist(z, J)
- known_julia_points: certified J-points with per-point error radii

Usage:
    oracle = Oracle.from_cf(CFNumber.golden())
    verdict = classify_point(oracle, (Dyadic(7, -2), ZERO), 4, 10 ** 6)
    rendering = render(oracle, 4, 10 ** 7)
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .cf import CFNumber
from .configure import load_config
from .exceptions import BudgetExhausted, DomainError
from .numerics import Ball, BallUnion, Dyadic, MeteredOracle, Oracle, PrecisionReal, WorkMeter

logger = logging.getLogger(__name__)

FLOAT_EPS = 2.0 ** -50
ESCAPE_CERTIFIED = 2.0
ESTIMATOR_RADIUS = 2.0 ** 16
ESTIMATOR_REL_ERROR = 2.0 ** -24
FLOAT_SLACK = 2.0 ** -40
LOG2 = math.log(2.0)
NEIGHBOR_OFFSETS = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy]

BANDS = ('far', 'near', 'in-between', 'timeout')


@dataclass(frozen=True)
class MembershipVerdict:
    """
    Attributes:
        bit (int or None): 0 or 1; None for a timeout
        band (str): 'far', 'near', 'in-between' or 'timeout'
        budget_used (int): Work units consumed
        lower (float): Certified lower bound on dist(d, J)
    """

    bit: Optional[int]
    band: str
    budget_used: int = 0
    lower: float = 0.0

    @property
    def timed_out(self):
        return self.band == 'timeout'


@dataclass
class Rendering:
    """
    A rendered C_m.

    Attributes:
        balls (BallUnion): Balls of radius 2^-m about the bit-1 grid points
        m (int): Resolution
        theta: CFNumber behind the oracle, or its description
        stats (dict): Pixel count, oracle reads, work and band counts
        incomplete (bool): The budget ran out before every orbit was decided
        raster (np.ndarray): Bit grid, row 0 at the highest imaginary part
        elapsed (float): Wall time in seconds (not part of artifacts)
    """

    balls: BallUnion
    m: int
    theta: object = None
    stats: dict = field(default_factory=dict)
    incomplete: bool = False
    raster: np.ndarray = field(default=None, repr=False, compare=False)
    elapsed: float = field(default=0.0, compare=False)

    def to_pgm(self, comments=()):
        """Binary PGM (P5, maxval 255); bit-1 cells are black."""
        if self.raster is None:
            raise DomainError("Rendering has no raster (the grid was never classified)")
        pixels = np.where(self.raster, 0, 255).astype(np.uint8)
        height, width = pixels.shape
        header = 'P5\n' + ''.join(f"{c}\n" if c.startswith('#') else f"# {c}\n" for c in comments)
        header += f"{width} {height}\n255\n"
        return header.encode('ascii') + pixels.tobytes()


def _as_complex(d):
    if isinstance(d, tuple):
        return complex(float(Dyadic.coerce(d[0])), float(Dyadic.coerce(d[1])))
    return complex(d)


def _base_oracle(oracle):
    if isinstance(oracle, MeteredOracle):
        return oracle.oracle
    return oracle


def _coerce_oracle(theta):
    if isinstance(theta, (Oracle, MeteredOracle)):
        return theta
    if isinstance(theta, CFNumber):
        return Oracle.from_cf(theta)
    if isinstance(theta, str):
        return Oracle.from_cf(CFNumber.parse(theta))
    raise DomainError(f"Cannot use {theta!r} as a rotation number",
                      hint="Pass an Oracle, a CFNumber or a CF literal.")


def _read_multiplier(oracle, position, meter=None):
    """lambda = e^{2 pi i t} from t = query(position), with an error radius for lambda."""
    if meter is not None and not isinstance(oracle, MeteredOracle):
        meter.charge(position)
    t = oracle.query(position)
    lam = complex(np.exp(2j * np.pi * float(t)))
    exact = _base_oracle(oracle).exact
    spread = 0.0 if exact is not None and exact == t.to_fraction() else 2 * math.pi * 2.0 ** -position
    return lam, spread + 2.0 ** -50


def _preimages(w, err, lam, lam_err):
    """Both roots of z^2 + lambda z = w with error radii."""
    s = np.sqrt(lam * lam + 4 * w)
    drift = 2 * abs(lam) * lam_err + lam_err ** 2 + 4 * err
    s_abs = np.abs(s)
    with np.errstate(divide='ignore'):
        s_err = np.minimum(np.sqrt(drift), np.where(s_abs > 0, drift / s_abs, np.inf))
    s_err = s_err + FLOAT_EPS * (1 + s_abs)
    z_err = (lam_err + s_err) / 2 + FLOAT_EPS * 4
    return np.concatenate([(-lam + s) / 2, (-lam - s) / 2]), np.concatenate([z_err, z_err])


def _julia_points(lam, lam_err, depth):
    points = np.array([1 - lam])
    errors = np.array([lam_err + FLOAT_EPS])
    level_points, level_errors = points, errors
    for _ in range(depth):
        level_points, level_errors = _preimages(level_points, level_errors, lam, lam_err)
        points = np.concatenate([points, level_points])
        errors = np.concatenate([errors, level_errors])
    keys = np.round(points.real * 2 ** 40) + 1j * np.round(points.imag * 2 ** 40)
    _, unique = np.unique(keys, return_index=True)
    unique.sort()
    return points[unique], errors[unique]


def known_julia_points(theta, depth=None, bits=52):
    """
    The repelling fixed point 1 - lambda and its backward preimages.

    1 - lambda has multiplier 2 - lambda, of modulus > 1, so it lies in J, and
    J is completely invariant. Errors are propagated through the square root
    with |sqrt a - sqrt b| <= min(sqrt|a - b|, |a - b| / |sqrt a|).

    Args:
        theta: Oracle, CFNumber or CF literal
        depth (int, optional): Preimage depth (config julia_preimage_depth)
        bits (int): Oracle position used for lambda

    Returns:
        tuple: (points, errors) as numpy arrays
    """
    if depth is None:
        depth = int(load_config()['julia_preimage_depth'])
    if depth < 0:
        raise DomainError(f"Preimage depth must be non-negative, got {depth}")
    lam, lam_err = _read_multiplier(_coerce_oracle(theta), bits)
    return _julia_points(lam, lam_err, depth)


@dataclass
class OrbitResult:
    """Per-point outcome of the tracked iteration."""

    escaped: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    estimate: np.ndarray
    complete: bool = True


def _finalize(idx, z, err, log_dz, dz_rel, steps, result):
    """
    Distance bounds for escaped orbits that reached the estimator radius.

    With R = |z_n| - e_n, the Green's function satisfies
    |G - 2^-n log|z_n|| <= 2^-n * -log(1 - 1/R) and |grad G| lies within a
    factor 1 +- 2/R of 2^-n |z_n'| / |z_n|. The derivative product carries
    the relative error dz_rel, so every quantity entering the Koebe bounds is
    enclosed and no safety factor is needed.
    """
    mag = np.abs(z)
    good = (err / mag < ESTIMATOR_REL_ERROR) & (dz_rel < 0.01) & (mag >= ESTIMATOR_RADIUS)
    n = steps.astype(float)
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        reach = mag - err
        tail = -np.log1p(-1.0 / reach)
        kappa = 2.0 / reach
        slack = 1.02 * dz_rel + 8 * FLOAT_EPS * n
        log_lo, log_hi = np.log(reach), np.log(mag + err)
        g_lo = np.exp2(-n) * (log_lo - tail)
        g_hi = np.exp2(-n) * (log_hi + tail)
        log_grad_hi = -n * LOG2 + log_dz + slack - log_lo + np.log1p(kappa)
        log_grad_lo = -n * LOG2 + log_dz - slack - log_hi + np.log1p(-kappa)
        lower = np.exp(np.log(-np.expm1(-2 * g_lo)) - np.log(4.0) - log_grad_hi) * (1 - FLOAT_SLACK)
        upper = np.exp(np.log(2 * np.sinh(g_hi)) - log_grad_lo) * (1 + FLOAT_SLACK)
    good &= np.isfinite(lower) & np.isfinite(upper)
    lower = np.where(good, lower, 0.0)
    upper = np.where(good, upper, np.inf)
    result.lower[idx] = np.maximum(result.lower[idx], lower)
    result.upper[idx] = np.minimum(result.upper[idx], upper)
    result.estimate[idx] = np.where(good, np.sqrt(lower * np.where(good, upper, 0.0)), np.nan)


def escape_orbits(points, lam, lam_err, iter_cap, meter):
    """
    Iterate P on every point with error tracking.

    Each pass charges one work unit per active orbit. An orbit stops once it
    is certified to escape and has reached |z| >= 2^16, once it has run
    iter_cap steps without escaping, or once its error radius exceeds 1.

    Returns:
        OrbitResult: escaped flags, distance bounds (lower includes the
        containment bound |d| - 2) and the estimate sqrt(lower * upper)
    """
    points = np.asarray(points, dtype=complex)
    count = len(points)
    absd = np.abs(points)
    result = OrbitResult(escaped=absd * (1 - FLOAT_EPS) > ESCAPE_CERTIFIED,
                         lower=np.maximum(absd - 2.0, 0.0),
                         upper=np.full(count, np.inf),
                         estimate=np.full(count, np.nan))
    z = points.copy()
    err = absd * FLOAT_EPS
    log_dz = np.zeros(count)
    dz_rel = np.zeros(count)
    steps = np.zeros(count, dtype=np.int64)
    active = np.arange(count)
    while active.size:
        try:
            meter.charge(int(active.size))
        except BudgetExhausted:
            result.complete = False
            break
        zk, ek = z[active], err[active]
        slope = np.abs(2 * zk + lam)
        mag = np.abs(zk)
        z[active] = zk * zk + lam * zk
        err[active] = (slope * ek + ek * ek + (mag + ek) * lam_err
                       + FLOAT_EPS * 4 * (mag * mag + mag))
        with np.errstate(divide='ignore'):
            log_dz[active] += np.log(slope)
            dz_rel[active] += np.where(slope > 0, (2 * ek + lam_err) / slope + 4 * FLOAT_EPS, np.inf)
        steps[active] += 1
        znew, enew = z[active], err[active]
        newmag = np.abs(znew)
        result.escaped[active] |= newmag - enew > ESCAPE_CERTIFIED
        escaped = result.escaped[active]
        reached = escaped & (newmag >= ESTIMATOR_RADIUS)
        if reached.any():
            idx = active[reached]
            _finalize(idx, z[idx], err[idx], log_dz[idx], dz_rel[idx], steps[idx], result)
        lost = ~escaped & (enew > 1.0)
        capped = ~escaped & (steps[active] >= iter_cap)
        active = active[~(reached | lost | capped)]
    return result


def _neighbor_flags(flags):
    """For a 2-D boolean grid, whether any 8-neighbor is set (outside counts as set)."""
    padded = np.pad(flags, 1, constant_values=True)
    rows, cols = flags.shape
    out = np.zeros_like(flags)
    for dy, dx in NEIGHBOR_OFFSETS:
        out |= padded[1 + dy:1 + dy + rows, 1 + dx:1 + dx + cols]
    return out


def _bands(absd, result, nb_escaped, nb_bounded, delta, jdist, interior):
    """
    Bits and bands (0 far, 1 near, 2 in-between) for arrays of points.

    Far and near use certified bounds only; the estimate picks in-between bits.
    """
    escaped = result.escaped
    far = (result.lower > 2 * delta) | (absd + 2 * delta < interior)
    near = ~far & ((escaped & (result.upper < delta))
                   | (jdist < delta)
                   | ((absd < interior) & nb_escaped))
    between = ~far & ~near
    has_estimate = np.isfinite(result.estimate)
    escaped_close = escaped & np.where(has_estimate, result.estimate <= 1.5 * delta, nb_bounded)
    bits = near | (between & (escaped_close | (~escaped & nb_escaped)))
    band = np.where(far, 0, np.where(near, 1, 2))
    return bits, band


def _julia_distance(points, jpoints, jerrors):
    tree = cKDTree(np.column_stack([jpoints.real, jpoints.imag]))
    dist, _ = tree.query(np.column_stack([points.real, points.imag]))
    return dist + float(jerrors.max())


def _interior(interior_radius):
    if interior_radius is None:
        return 0.0
    if isinstance(interior_radius, PrecisionReal):
        return max(float(interior_radius.lower), 0.0)
    return max(float(interior_radius), 0.0)


def classify_point(oracle, d, n, budget, interior_radius=None, iter_cap=None, config=None):
    """
    f(d, n): 1 if d is certainly within 2^-n of J, 0 if certainly farther
    than 2 * 2^-n, either bit otherwise (band 'in-between').

    The point is iterated together with its eight neighbors at distance
    2^-(n+1), which feed the straddling rules.

    Args:
        oracle: Oracle (or MeteredOracle) for theta
        d: (Dyadic, Dyadic) or complex
        n (int): Precision index
        budget (int): Work units (iterations plus oracle digits)
        interior_radius (optional): Radius of a disk about 0 known to lie in
            the Siegel disk, e.g. koebe_inscribed_bound(r)
        iter_cap (int, optional): Per-orbit cap, default 2^(n + render_iteration_exponent)

    Returns:
        MembershipVerdict: bit None and band 'timeout' if the budget runs out
    """
    if budget < 1:
        raise DomainError(f"classify_point needs a positive budget, got {budget}")
    if n < 0:
        raise DomainError(f"Precision index must be non-negative, got {n}")
    config = config or load_config()
    oracle = _coerce_oracle(oracle)
    z = _as_complex(d)
    delta = 2.0 ** -n
    if abs(z) > float(config['escape_radius']) and abs(z) - 2 > 2 * delta:
        return MembershipVerdict(0, 'far', 0, abs(z) - 2)
    meter = oracle.meter if isinstance(oracle, MeteredOracle) else WorkMeter(budget)
    start = meter.used
    try:
        lam, lam_err = _read_multiplier(oracle, max(n + 8, 52), meter)
    except BudgetExhausted:
        return MembershipVerdict(None, 'timeout', meter.used - start)
    if iter_cap is None:
        iter_cap = 2 ** min(n + int(config['render_iteration_exponent']), 40)
    h = delta / 2
    points = np.array([z] + [z + h * complex(dx, dy) for dx, dy in NEIGHBOR_OFFSETS])
    result = escape_orbits(points, lam, lam_err, iter_cap, meter)
    used = meter.used - start
    if not result.complete:
        logger.debug(f"classify_point: budget {budget} exhausted at d={z}")
        return MembershipVerdict(None, 'timeout', used)
    jpoints, jerrors = _julia_points(lam, lam_err, int(config['julia_preimage_depth']))
    jdist = _julia_distance(points[:1], jpoints, jerrors)
    nb_escaped = np.array([result.escaped[1:].any()])
    nb_bounded = np.array([not result.escaped[1:].all()])
    head = OrbitResult(result.escaped[:1], result.lower[:1], result.upper[:1], result.estimate[:1])
    bits, band = _bands(np.abs(points[:1]), head, nb_escaped, nb_bounded, delta, jdist,
                        _interior(interior_radius))
    return MembershipVerdict(int(bits[0]), BANDS[int(band[0])], used, float(result.lower[0]))


def exterior_distance_bound(theta, z, iters):
    """
    Certified lower bound on dist(z, J).

    The containment bound |z| - 2 always applies; the gradient estimate is
    added once the orbit has certainly escaped and reached |z| >= 2^16 within
    iters steps. Returns 0 when no escape is observed.
    """
    oracle = _coerce_oracle(theta)
    lam, lam_err = _read_multiplier(oracle, 52)
    point = _as_complex(z)
    result = escape_orbits(np.array([point]), lam, lam_err, max(int(iters), 0),
                           WorkMeter(max(int(iters), 0) + 1))
    bound = float(result.lower[0]) if result.escaped[0] else max(abs(point) - 2, 0.0)
    return PrecisionReal(Dyadic.from_float(bound).round_prec(53, 'floor'))


def _grid(m):
    """Grid indices (i, j) with |(i + ij) 2^-(m+1)| <= 2."""
    half = 2 ** (m + 2)
    axis = np.arange(-half, half + 1)
    ii, jj = np.meshgrid(axis, axis[::-1])
    inside = ii.astype(np.int64) ** 2 + jj.astype(np.int64) ** 2 <= half * half
    return ii, jj, inside


def render(oracle, m, budget, interior_radius=None, iter_cap=None, config=None):
    """
    C_m: classify the grid of pitch 2^-(m+1) inside the closed 2-ball and
    emit a ball of radius 2^-m about every bit-1 point.

    J lies in the closed 2-ball, so grid points outside it are all far.
    Balls are listed row-major by (imaginary, real) grid index, so equal
    oracle answers and budgets give bit-identical output.

    Args:
        oracle: Oracle or MeteredOracle for theta (a metered oracle's own
            meter is used instead of `budget`)
        m (int): Resolution, m >= 1
        budget (int): Work units

    Returns:
        Rendering: flagged incomplete if the budget ran out
    """
    if m < 1:
        raise DomainError(f"render needs m >= 1, got {m}")
    config = config or load_config()
    oracle = _coerce_oracle(oracle)
    started = time.perf_counter()
    meter = oracle.meter if isinstance(oracle, MeteredOracle) else WorkMeter(budget)
    base = _base_oracle(oracle)
    theta = base.cf if base.cf is not None else base.description
    ii, jj, inside = _grid(m)
    pixels = int(inside.sum())
    stats = {'pixels': pixels, 'oracle_reads': [], 'work': 0, 'bands': {}}
    if pixels > meter.remaining:
        logger.info(f"render: {pixels} grid points exceed the remaining budget {meter.remaining}")
        stats['work'] = meter.used
        return Rendering(BallUnion(), m, theta, stats, True, None, time.perf_counter() - started)
    position = max(m + 12, 52)
    try:
        lam, lam_err = _read_multiplier(oracle, position, meter)
    except BudgetExhausted:
        stats['work'] = meter.used
        return Rendering(BallUnion(), m, theta, stats, True, None, time.perf_counter() - started)
    stats['oracle_reads'] = [position]
    if iter_cap is None:
        iter_cap = 2 ** (m + int(config['render_iteration_exponent']))
    h = 2.0 ** -(m + 1)
    delta = 2.0 ** -m
    points = (ii[inside] + 1j * jj[inside]) * h
    result = escape_orbits(points, lam, lam_err, iter_cap, meter)

    escaped = np.ones(inside.shape, dtype=bool)
    escaped[inside] = result.escaped
    nb_escaped = _neighbor_flags(escaped)[inside]
    nb_bounded = _neighbor_flags(~escaped & inside)[inside]
    jpoints, jerrors = _julia_points(lam, lam_err, int(config['julia_preimage_depth']))
    jdist = _julia_distance(points, jpoints, jerrors)
    bits, band = _bands(np.abs(points), result, nb_escaped, nb_bounded, delta, jdist,
                        _interior(interior_radius))

    raster = np.zeros(inside.shape, dtype=bool)
    raster[inside] = bits
    radius = Dyadic(1, -m)
    xs, ys = ii[raster], jj[raster]
    order = np.lexsort((xs, ys))
    balls = BallUnion(tuple(Ball((Dyadic(int(xs[k]), -(m + 1)), Dyadic(int(ys[k]), -(m + 1))), radius)
                            for k in order))
    stats['work'] = meter.used
    stats['balls'] = len(balls)
    stats['iter_cap'] = int(iter_cap)
    stats['bands'] = {BANDS[k]: int(np.count_nonzero(band == k)) for k in range(3)}
    incomplete = not result.complete
    elapsed = time.perf_counter() - started
    logger.info(f"render: m={m} {pixels} points, {len(balls)} balls, work {meter.used}"
                f"{' (incomplete)' if incomplete else ''}")
    return Rendering(balls, m, theta, stats, incomplete, raster, elapsed)
