#!/usr/bin/env python3
"""
Numerics Module

This module provides the certified arithmetic every other module is built on:
exact dyadic rationals, midpoint-radius reals with outward rounding, complex
balls for orbit computations, oracle reals with read instrumentation, and
Hausdorff geometry on finite unions of dyadic balls.

Key Features:
- Dyadic: exact m*2^e arithmetic with canonical odd mantissa
- PrecisionReal: enclosures [approx - radius, approx + radius] with
  directed-rounding transcendental functions (mpmath)
- Oracle / MeteredOracle: deterministic correctly rounded queries, read logs
  and work accounting
- BallUnion: bit-exact text serialization
- hausdorff_distance: max-min distance on point sets and filled ball unions

Usage:
    x = PrecisionReal.from_fraction(Fraction(1, 3), 64)
    y = (x * x).log(64)
    o = Oracle.from_fraction(Fraction(1, 3))
    o.query(10)
"""

import logging
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Tuple

import mpmath
import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .configure import precision_cap
from .exceptions import BudgetExhausted, DomainError, PrecisionExhausted

logger = logging.getLogger(__name__)

RADIUS_BITS = 30


def _round_shift(m, shift, mode):
    """round(m / 2**shift) as an integer under the given mode."""
    if shift <= 0:
        return m << -shift
    q, r = divmod(m, 1 << shift)
    if mode == 'floor':
        return q
    if mode == 'ceil':
        return q + (1 if r else 0)
    half = 1 << (shift - 1)
    if r > half or (r == half and q & 1):
        return q + 1
    return q


@total_ordering
@dataclass(frozen=True)
class Dyadic:
    """
    Exact dyadic rational mantissa * 2**exponent.

    The stored form is canonical: the mantissa is odd, or both fields are zero.
    """

    mantissa: int = 0
    exponent: int = 0

    def __post_init__(self):
        m, e = int(self.mantissa), int(self.exponent)
        if m == 0:
            e = 0
        else:
            tz = (m & -m).bit_length() - 1
            m >>= tz
            e += tz
        object.__setattr__(self, 'mantissa', m)
        object.__setattr__(self, 'exponent', e)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, bool):
            raise DomainError("Booleans are not dyadic values")
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, float):
            return cls.from_float(value)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        raise DomainError(f"Cannot interpret {value!r} as a dyadic rational")

    @classmethod
    def from_float(cls, x):
        if not math.isfinite(x):
            raise DomainError(f"Non-finite float {x!r} has no dyadic value")
        n, d = x.as_integer_ratio()
        return cls(n, -(d.bit_length() - 1))

    @classmethod
    def from_fraction(cls, fr):
        d = fr.denominator
        if d & (d - 1):
            raise DomainError(f"{fr} is not a dyadic rational")
        return cls(fr.numerator, -(d.bit_length() - 1))

    @classmethod
    def from_mpf(cls, x):
        """Exact value of an mpf, read from its raw (sign, man, exp) without re-rounding."""
        if isinstance(x, int):
            return cls(x, 0)
        if isinstance(x, float):
            return cls.from_float(x)
        if not isinstance(x, mpmath.mpf):
            raise DomainError(f"Cannot read {x!r} as an mpf")
        sign, man, exp, _ = x._mpf_
        if not man and x != 0:
            raise PrecisionExhausted(f"Non-finite intermediate value {x}",
                                     hint="Raise SIEGEL_PRECISION_CAP or loosen the tolerance.")
        man = int(man)
        return cls(-man if sign else man, int(exp))

    @classmethod
    def parse(cls, text):
        """Inverse of str(): 'm*2^e'."""
        try:
            m, e = text.strip().split('*2^')
            return cls(int(m), int(e))
        except ValueError:
            raise DomainError(f"Malformed dyadic string {text!r}", hint="Expected the form m*2^e.")

    def __str__(self):
        return f"{self.mantissa}*2^{self.exponent}"

    def to_fraction(self):
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def to_mpf(self):
        with mpmath.workprec(max(53, abs(self.mantissa).bit_length() + 1)):
            return mpmath.mpf((self.mantissa, self.exponent))

    def __float__(self):
        if abs(self.mantissa).bit_length() <= 53:
            return math.ldexp(self.mantissa, self.exponent)
        return float(self.to_fraction())

    def __bool__(self):
        return self.mantissa != 0

    def sign(self):
        return (self.mantissa > 0) - (self.mantissa < 0)

    def magnitude(self):
        """floor(log2 |x|); undefined for zero."""
        if not self.mantissa:
            raise DomainError("Zero has no binary magnitude")
        return abs(self.mantissa).bit_length() - 1 + self.exponent

    def shift(self, k):
        return Dyadic(self.mantissa, self.exponent + k)

    def __add__(self, other):
        other = Dyadic.coerce(other)
        e = min(self.exponent, other.exponent)
        return Dyadic((self.mantissa << (self.exponent - e)) + (other.mantissa << (other.exponent - e)), e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __sub__(self, other):
        return self + (-Dyadic.coerce(other))

    def __rsub__(self, other):
        return Dyadic.coerce(other) - self

    def __mul__(self, other):
        other = Dyadic.coerce(other)
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __abs__(self):
        return Dyadic(abs(self.mantissa), self.exponent)

    def __lt__(self, other):
        return (self - Dyadic.coerce(other)).mantissa < 0

    def __eq__(self, other):
        if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
            try:
                other = Dyadic.coerce(other)
            except DomainError:
                return False
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __hash__(self):
        return hash((self.mantissa, self.exponent))

    def round_frac(self, bits, mode='nearest'):
        """Round to a multiple of 2**-bits."""
        if self.exponent >= -bits:
            return self
        return Dyadic(_round_shift(self.mantissa, -bits - self.exponent, mode), -bits)

    def round_prec(self, prec, mode='nearest'):
        """Round to at most `prec` significant bits."""
        length = abs(self.mantissa).bit_length()
        if length <= prec:
            return self
        shift = length - prec
        return Dyadic(_round_shift(self.mantissa, shift, mode), self.exponent + shift)


ZERO = Dyadic(0, 0)
ONE = Dyadic(1, 0)


@dataclass(frozen=True)
class PrecisionReal:
    """
    A real number known to lie in [approx - error_radius, approx + error_radius].

    Addition, subtraction and multiplication are exact on the midpoints;
    everything else is evaluated with mpmath at a requested precision and
    widened outward, so enclosures never lose the represented value.

    Attributes:
        approx (Dyadic): Midpoint
        error_radius (Dyadic): Non-negative radius
    """

    approx: Dyadic
    error_radius: Dyadic = ZERO

    def __post_init__(self):
        object.__setattr__(self, 'approx', Dyadic.coerce(self.approx))
        object.__setattr__(self, 'error_radius', Dyadic.coerce(self.error_radius))
        if self.error_radius < 0:
            raise DomainError(f"Negative error radius {self.error_radius}")

    @classmethod
    def coerce(cls, value):
        if isinstance(value, PrecisionReal):
            return value
        if isinstance(value, Fraction) and value.denominator & (value.denominator - 1):
            return cls.from_fraction(value, 128)
        return cls(Dyadic.coerce(value))

    @classmethod
    def from_float(cls, x, err=0.0):
        return cls(Dyadic.from_float(x), Dyadic.from_float(abs(err)))

    @classmethod
    def from_fraction(cls, fr, prec):
        fr = Fraction(fr)
        if fr == 0:
            return cls(ZERO)
        k = prec - (abs(fr.numerator).bit_length() - fr.denominator.bit_length()) + 1
        scaled = fr * (Fraction(2) ** k)
        n = round(scaled)
        if n == scaled:
            return cls(Dyadic(n, -k))
        return cls(Dyadic(n, -k), Dyadic(1, -k - 1))

    @classmethod
    def from_bounds(cls, lo, hi, prec=None):
        lo, hi = Dyadic.coerce(lo), Dyadic.coerce(hi)
        if hi < lo:
            lo, hi = hi, lo
        result = cls((lo + hi).shift(-1), (hi - lo).shift(-1))
        return result.rounded(prec) if prec else result

    @classmethod
    def from_mpf_bounds(cls, lo, hi, prec=None):
        return cls.from_bounds(Dyadic.from_mpf(lo), Dyadic.from_mpf(hi), prec)

    @property
    def lower(self):
        return self.approx - self.error_radius

    @property
    def upper(self):
        return self.approx + self.error_radius

    @property
    def width(self):
        return self.error_radius.shift(1)

    def __float__(self):
        return float(self.approx)

    def __repr__(self):
        return f"PrecisionReal({float(self.approx)!r} ± {float(self.error_radius):.3g})"

    def contains(self, value):
        if isinstance(value, PrecisionReal):
            return self.lower <= value.lower and value.upper <= self.upper
        x = value if isinstance(value, Fraction) else Dyadic.coerce(value).to_fraction()
        return self.lower.to_fraction() <= x <= self.upper.to_fraction()

    def rounded(self, prec=None):
        """Trim the midpoint to `prec` bits, moving the trimmed part into the radius."""
        prec = prec or 64
        approx = self.approx.round_prec(prec)
        radius = (self.error_radius + abs(self.approx - approx)).round_prec(RADIUS_BITS, 'ceil')
        return PrecisionReal(approx, radius)

    def __add__(self, other):
        other = PrecisionReal.coerce(other)
        return PrecisionReal(self.approx + other.approx, self.error_radius + other.error_radius)

    __radd__ = __add__

    def __neg__(self):
        return PrecisionReal(-self.approx, self.error_radius)

    def __sub__(self, other):
        return self + (-PrecisionReal.coerce(other))

    def __rsub__(self, other):
        return PrecisionReal.coerce(other) - self

    def __mul__(self, other):
        other = PrecisionReal.coerce(other)
        radius = (abs(self.approx) * other.error_radius + abs(other.approx) * self.error_radius
                  + self.error_radius * other.error_radius)
        return PrecisionReal(self.approx * other.approx, radius)

    __rmul__ = __mul__

    def __abs__(self):
        if self.lower >= 0:
            return self
        if self.upper <= 0:
            return -self
        return PrecisionReal.from_bounds(ZERO, max(abs(self.lower), abs(self.upper)))

    def scale2(self, k):
        """Exact multiplication by 2**k."""
        return PrecisionReal(self.approx.shift(k), self.error_radius.shift(k))

    def _endpoints(self):
        return self.lower.to_mpf(), self.upper.to_mpf()

    def reciprocal(self, prec=64):
        if self.lower <= 0 <= self.upper:
            raise DomainError(f"Reciprocal of an enclosure containing zero: {self!r}")
        lo, hi = self._endpoints()
        r_lo = mpmath.fdiv(1, hi, prec=prec + 4, rounding='f')
        r_hi = mpmath.fdiv(1, lo, prec=prec + 4, rounding='c')
        return PrecisionReal.from_mpf_bounds(r_lo, r_hi, prec)

    def div(self, other, prec=64):
        other = PrecisionReal.coerce(other)
        return (self * other.reciprocal(prec + 8)).rounded(prec)

    def _monotone(self, fn, prec):
        wp = prec + 10
        lo, hi = self._endpoints()
        with mpmath.workprec(wp):
            y_lo, y_hi = fn(lo), fn(hi)
        return PrecisionReal.from_bounds(_widen(y_lo, wp, -1), _widen(y_hi, wp, +1), prec)

    def sqrt(self, prec=64):
        if self.upper < 0:
            raise DomainError(f"Square root of a negative enclosure {self!r}")
        base = self if self.lower >= 0 else PrecisionReal.from_bounds(ZERO, self.upper)
        return base._monotone(mpmath.sqrt, prec)

    def log(self, prec=64):
        if self.lower <= 0:
            raise DomainError(f"Logarithm of an enclosure reaching zero: {self!r}")
        return self._monotone(mpmath.log, prec)

    def exp(self, prec=64):
        return self._monotone(mpmath.exp, prec)


def _widen(y, wp, direction):
    """Move an mpmath result outward by a few ulps at working precision wp."""
    d = Dyadic.from_mpf(y)
    slack = abs(d).shift(4 - wp) + Dyadic(1, -2 * wp)
    return d + slack if direction > 0 else d - slack


def mpf_upper(x, prec=53):
    """Round a non-negative mpf up to `prec` bits (for radii)."""
    return mpmath.fadd(x, 0, prec=prec, rounding='c')


@dataclass(frozen=True)
class ComplexBall:
    """
    Closed complex disk with an mpmath center and an upward-rounded radius.

    Attributes:
        center (mpmath.mpc): Center at the working precision
        radius (mpmath.mpf): Radius, 53-bit, rounded up
    """

    center: object
    radius: object = mpmath.mpf(0)

    @classmethod
    def exact(cls, z):
        return cls(mpmath.mpc(z), mpmath.mpf(0))

    @classmethod
    def unit_root(cls, theta, prec):
        """e^{2 pi i theta} for an enclosure theta."""
        with mpmath.workprec(prec + 10):
            center = mpmath.expjpi(2 * theta.approx.to_mpf())
        spread = mpmath.fmul(7, theta.error_radius.to_mpf(), prec=53, rounding='c')
        radius = mpmath.fadd(spread, mpmath.ldexp(1, 2 - prec), prec=53, rounding='c')
        return cls(center, radius)

    def _rounding_error(self, magnitude, prec, ulps):
        return mpmath.fmul(magnitude, mpmath.ldexp(1, ulps - prec), prec=53, rounding='c')

    def add(self, other, prec):
        with mpmath.workprec(prec):
            center = self.center + other.center
        scale = mpf_upper(abs(self.center) + abs(other.center))
        radius = mpmath.fadd(self.radius, other.radius, prec=53, rounding='c')
        radius = mpmath.fadd(radius, self._rounding_error(scale, prec, 2), prec=53, rounding='c')
        return ComplexBall(center, radius)

    def mul(self, other, prec):
        with mpmath.workprec(prec):
            center = self.center * other.center
        a, b = mpf_upper(abs(self.center)), mpf_upper(abs(other.center))
        radius = mpmath.fmul(a, other.radius, prec=53, rounding='c')
        radius = mpmath.fadd(radius, mpmath.fmul(b, self.radius, prec=53, rounding='c'), prec=53, rounding='c')
        radius = mpmath.fadd(radius, mpmath.fmul(self.radius, other.radius, prec=53, rounding='c'),
                             prec=53, rounding='c')
        radius = mpmath.fadd(radius, self._rounding_error(mpf_upper(a * b), prec, 3), prec=53, rounding='c')
        return ComplexBall(center, radius)

    def scale(self, factor, prec):
        return self.mul(ComplexBall.exact(factor), prec)

    def abs_lower(self):
        return mpmath.fsub(abs(self.center), self.radius, prec=53, rounding='f')

    def to_complex(self):
        return complex(self.center)


class Oracle:
    """
    Deterministic oracle for a real number x.

    query(n) returns the dyadic with n+2 fractional bits nearest to x (ties to
    even), or x itself when x is dyadic; either way |x - query(n)| < 2**-n.
    Every query is appended to read_log under a lock.

    Attributes:
        description (str): Human-readable source, echoed in artifacts
        cf: The CFNumber the oracle was built from, if any
    """

    def __init__(self, enclose, description, exact=None, cf=None):
        self._enclose = enclose
        self.description = description
        self.exact = exact
        self.cf = cf
        self._lock = threading.Lock()
        self._read_log = []
        self._answers = {}

    @classmethod
    def from_dyadic(cls, d):
        d = Dyadic.coerce(d)
        return cls(lambda prec: (d, d), str(d), exact=d.to_fraction())

    @classmethod
    def from_fraction(cls, fr):
        fr = Fraction(fr)
        if not fr.denominator & (fr.denominator - 1):
            oracle = cls.from_dyadic(Dyadic.from_fraction(fr))
            oracle.description = str(fr)
            return oracle
        return cls(None, str(fr), exact=fr)

    @classmethod
    def from_cf(cls, c):
        from .cf import cf_value
        if not c.is_irrational():
            oracle = cls.from_fraction(c.exact_value())
            oracle.cf = c
            oracle.description = c.literal()
            return oracle

        def enclose(prec):
            v = cf_value(c, prec)
            return v.lower, v.upper

        return cls(enclose, c.literal(), cf=c)

    @property
    def read_log(self):
        with self._lock:
            return tuple(self._read_log)

    @property
    def max_position(self):
        log = self.read_log
        return max(log) if log else None

    def query(self, n):
        if n < 0:
            raise DomainError(f"Oracle queries need n >= 0, got {n}")
        answer = self.answer(n)
        with self._lock:
            self._read_log.append(n)
        return answer

    def answer(self, n):
        """The value query(n) returns, without touching read_log."""
        with self._lock:
            cached = self._answers.get(n)
        if cached is not None:
            return cached
        answer = self._compute(n)
        with self._lock:
            self._answers[n] = answer
        return answer

    def _compute(self, n):
        bits = n + 2
        if self.exact is not None:
            d = self.exact.denominator
            if not d & (d - 1):
                return Dyadic.from_fraction(self.exact)
            return Dyadic(round(self.exact * (Fraction(2) ** bits)), -bits)
        prec = n + 10
        cap = precision_cap()
        while True:
            lo, hi = self._enclose(prec)
            a, b = lo.round_frac(bits), hi.round_frac(bits)
            if a == b:
                return a
            if prec >= cap:
                raise PrecisionExhausted(f"Oracle {self.description} undecided at n={n} with {prec} bits",
                                         hint="Raise SIEGEL_PRECISION_CAP.")
            prec = min(2 * prec, cap)
            logger.debug(f"Oracle {self.description}: raising precision to {prec} for n={n}")


class WorkMeter:
    """
    Counts abstract work units against a budget.

    Attributes:
        budget (int): Units available
        used (int): Units consumed so far
        exhausted (bool): True once a charge was refused
    """

    def __init__(self, budget):
        if budget < 0:
            raise DomainError(f"Work budget must be non-negative, got {budget}")
        self.budget = int(budget)
        self.used = 0
        self.exhausted = False
        self._lock = threading.Lock()

    @property
    def remaining(self):
        return self.budget - self.used

    def charge(self, units):
        with self._lock:
            if self.used + units > self.budget:
                self.used = self.budget
                self.exhausted = True
                raise BudgetExhausted(f"Work budget of {self.budget} units exhausted")
            self.used += units


class MeteredOracle:
    """Oracle view that charges n work units per query(n) and keeps its own read log."""

    def __init__(self, oracle, meter):
        self.oracle = oracle
        self.meter = meter
        self.description = oracle.description
        self._read_log = []

    @property
    def read_log(self):
        return tuple(self._read_log)

    @property
    def max_position(self):
        return max(self._read_log) if self._read_log else None

    def query(self, n):
        self.meter.charge(max(int(n), 1))
        answer = self.oracle.query(n)
        self._read_log.append(n)
        return answer


def oracle_query(o, n):
    """Ask oracle o for a dyadic within 2**-n of its real."""
    return o.query(n)


@dataclass(frozen=True)
class Ball:
    center: Tuple[Dyadic, Dyadic]
    radius: Dyadic

    def __post_init__(self):
        cx, cy = self.center
        object.__setattr__(self, 'center', (Dyadic.coerce(cx), Dyadic.coerce(cy)))
        object.__setattr__(self, 'radius', Dyadic.coerce(self.radius))
        if self.radius < 0:
            raise DomainError(f"Negative ball radius {self.radius}")

    def to_text(self):
        return f"{self.center[0]} {self.center[1]} {self.radius}"

    @classmethod
    def from_text(cls, line):
        parts = line.split()
        if len(parts) != 3:
            raise DomainError(f"Malformed ball line {line!r}", hint="Expected 'cx cy r' as m*2^e strings.")
        cx, cy, r = (Dyadic.parse(p) for p in parts)
        return cls((cx, cy), r)

    def complex_center(self):
        return complex(float(self.center[0]), float(self.center[1]))


@dataclass(frozen=True)
class BallUnion:
    """
    Finite ordered union of closed dyadic balls.

    Serialization writes one `cx cy r` line per ball; lines starting with '#'
    are comments (artifact headers) and are ignored when reading.
    """

    balls: Tuple[Ball, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'balls', tuple(self.balls))

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    def is_empty(self):
        return not self.balls

    def to_text(self, header=()):
        lines = list(header) + [b.to_text() for b in self.balls]
        return ''.join(line + '\n' for line in lines)

    @classmethod
    def from_text(cls, text):
        return cls(tuple(Ball.from_text(line) for line in text.splitlines()
                         if line.strip() and not line.lstrip().startswith('#')))

    def centers(self):
        return np.array([b.complex_center() for b in self.balls], dtype=complex)

    def radii(self):
        return np.array([float(b.radius) for b in self.balls], dtype=float)


def _as_geometry(X):
    if isinstance(X, BallUnion):
        return X.centers(), X.radii()
    points = []
    for p in X:
        if isinstance(p, Ball):
            raise DomainError("Mixed Ball sequences must be wrapped in a BallUnion")
        if isinstance(p, tuple):
            points.append(complex(float(Dyadic.coerce(p[0])), float(Dyadic.coerce(p[1]))))
        else:
            points.append(complex(p))
    return np.array(points, dtype=complex), np.zeros(len(points))


def _sample_filled(centers, radii, h):
    """Points covering every filled ball within distance h."""
    samples = [centers[radii <= 0]]
    ring_unit = {}
    for c, r in zip(centers[radii > 0], radii[radii > 0]):
        rings = np.linspace(0.0, r, int(math.ceil(r / h)) + 1)
        for rho in rings:
            count = max(1, int(math.ceil(2 * math.pi * rho / h)))
            if count not in ring_unit:
                ring_unit[count] = np.exp(2j * np.pi * np.arange(count) / count)
            samples.append(c + rho * ring_unit[count])
    return np.concatenate(samples)


def _distance_to_union(points, centers, radii, chunk=4096):
    """dist(a, union of balls) for each sample a."""
    if np.all(radii == radii[0]):
        tree = cKDTree(np.column_stack([centers.real, centers.imag]))
        d, _ = tree.query(np.column_stack([points.real, points.imag]))
        return np.maximum(d - radii[0], 0.0)
    out = np.empty(len(points))
    target = np.column_stack([centers.real, centers.imag])
    for start in range(0, len(points), chunk):
        block = points[start:start + chunk]
        dist = cdist(np.column_stack([block.real, block.imag]), target) - radii[None, :]
        out[start:start + chunk] = np.maximum(dist.min(axis=1), 0.0)
    return out


def _directed(ca, ra, cb, rb, h):
    if np.all(ra == 0):
        return float(_distance_to_union(ca, cb, rb).max()), 0.0
    samples = _sample_filled(ca, ra, h)
    return float(_distance_to_union(samples, cb, rb).max()), h


def hausdorff_distance(A, B, tol=None):
    """
    Hausdorff distance between two point sets or filled ball unions.

    Balls are sampled on concentric rings with spacing `tol`; since the
    distance to a set is 1-Lipschitz, the true directed distance lies within
    `tol` above the sampled maximum.

    Args:
        A, B: BallUnion, or sequences of complex numbers / (x, y) pairs
        tol (float, optional): Sampling step; defaults to 1/8 of the smallest
            positive radius (or 1e-3)

    Returns:
        PrecisionReal: d_H(A, B) with radius at most tol (plus float slack)

    Raises:
        DomainError: If either input is empty
    """
    if isinstance(A, BallUnion) and isinstance(B, BallUnion) and A == B and len(A):
        return PrecisionReal(ZERO)
    ca, ra = _as_geometry(A)
    cb, rb = _as_geometry(B)
    if len(ca) == 0 or len(cb) == 0:
        raise DomainError("Hausdorff distance needs two nonempty sets")
    if tol is None:
        positive = np.concatenate([ra[ra > 0], rb[rb > 0]])
        tol = float(positive.min()) / 8 if len(positive) else 1e-3
    if tol <= 0:
        raise DomainError(f"Hausdorff tolerance must be positive, got {tol}")
    ab, ha = _directed(ca, ra, cb, rb, tol)
    ba, hb = _directed(cb, rb, ca, ra, tol)
    scale = float(max(np.abs(ca).max() + ra.max(), np.abs(cb).max() + rb.max(), 1.0))
    slack = scale * 2.0 ** -40
    lo = max(ab, ba)
    hi = max(ab + ha, ba + hb)
    logger.debug(f"Hausdorff: directed {ab:.6g}/{ba:.6g}, step {tol:.3g}")
    return PrecisionReal.from_bounds(Dyadic.from_float(max(lo - slack, 0.0)), Dyadic.from_float(hi + slack))


def koebe_inscribed_bound(r):
    """
    Lower bound r/4 on the inscribed radius about the marked point.

    Raises:
        DomainError: If r is negative
    """
    r = PrecisionReal.coerce(r)
    if r.approx < 0:
        raise DomainError(f"Conformal radius must be non-negative, got {float(r):g}")
    return r.scale2(-2)


def ceil_log2(x):
    """Smallest integer k with 2**k >= x, for positive x (exact on floats)."""
    if x <= 0:
        raise DomainError(f"ceil_log2 needs a positive argument, got {x}")
    m, e = math.frexp(x)
    return e - 1 if m == 0.5 else e
