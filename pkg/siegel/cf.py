#!/usr/bin/env python3
"""
Continued Fraction Module

This module provides the continued-fraction engine behind every rotation
number in the package: values, convergents, the Gauss map, the Brjuno sum,
the Yoccoz function with certified tails, and digit surgery (bumping one digit
of a noble expansion while controlling the change of the Yoccoz function).

Rotation numbers are written theta = 1/(a_0 + 1/(a_1 + ...)), all digits >= 1,
as a finite prefix plus a symbolic tail.

Key Features:
- CFNumber with noble / all-twos / periodic / finite tails and a literal syntax
- Convergents via the standard recurrence on unbounded integers
- alpha_i values by backward recursion from the tail's fixed point
- yoccoz_phi and brjuno_B returning PhiValue enclosures with tail bounds
- digit_bump, check_4lems, phi_bump_search and tail_safety_m0

Usage:
    golden = CFNumber.parse("[1;1*]")
    phi = yoccoz_phi(golden, 1e-8)
    found = phi_bump_search((1,), 0.25, 1)
"""

import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Tuple

import mpmath

from .configure import load_config, precision_cap
from .exceptions import DomainError, InvariantViolation, PrecisionExhausted, ResourceExhausted
from .numerics import ONE, ZERO, Dyadic, PrecisionReal

logger = logging.getLogger(__name__)

MAX_DIGIT = 2 ** 63 - 1

_LITERAL = re.compile(r'^\[\s*([0-9,\s]*?)\s*;\s*(1\*|2\*|\(([0-9,\s]+)\)\*|end)\s*\]$')


class Tail(str, Enum):
    NOBLE = '1*'
    ALL_TWOS = '2*'
    PERIODIC = 'periodic'
    FINITE = 'end'


def _check_digits(digits, what):
    for a in digits:
        if not isinstance(a, int) or isinstance(a, bool):
            raise DomainError(f"{what} digit {a!r} is not an integer")
        if a < 1 or a > MAX_DIGIT:
            raise DomainError(f"{what} digit {a} outside [1, 2^63-1]")


@dataclass(frozen=True)
class CFNumber:
    """
    A rotation number as a finite digit prefix plus a symbolic tail.

    Attributes:
        prefix (tuple): Digits a_0..a_n
        tail (Tail): NOBLE (all ones), ALL_TWOS, PERIODIC (repeat `block`) or FINITE
        block (tuple): Repeating digits for PERIODIC tails, empty otherwise
    """

    prefix: Tuple[int, ...] = ()
    tail: Tail = Tail.NOBLE
    block: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'prefix', tuple(self.prefix))
        object.__setattr__(self, 'block', tuple(self.block))
        object.__setattr__(self, 'tail', Tail(self.tail))
        _check_digits(self.prefix, "Prefix")
        _check_digits(self.block, "Block")
        if self.tail is Tail.PERIODIC and not self.block:
            raise DomainError("Periodic tail needs a nonempty block")
        if self.tail is not Tail.PERIODIC and self.block:
            raise DomainError(f"Tail {self.tail.value} takes no block")
        if self.tail is Tail.FINITE and not self.prefix:
            raise DomainError("A finite continued fraction needs at least one digit")

    @classmethod
    def golden(cls):
        return cls((1,), Tail.NOBLE)

    @classmethod
    def noble(cls, prefix):
        return cls(tuple(prefix), Tail.NOBLE)

    @classmethod
    def parse(cls, literal):
        """
        Parse `[a0,a1,...,ak;tail]` with tail in {1*, 2*, (b1,...,bj)*, end}.

        Raises:
            DomainError: On malformed literals
        """
        match = _LITERAL.match(literal.strip())
        if not match:
            raise DomainError(f"Malformed continued-fraction literal {literal!r}",
                              hint="Expected e.g. [1;1*], [1,2;(1,2)*] or [2;end].")
        head, tail, block = match.group(1), match.group(2), match.group(3)
        prefix = tuple(int(a) for a in head.split(',') if a.strip()) if head.strip() else ()
        if tail == '1*':
            return cls(prefix, Tail.NOBLE)
        if tail == '2*':
            return cls(prefix, Tail.ALL_TWOS)
        if tail == 'end':
            return cls(prefix, Tail.FINITE)
        return cls(prefix, Tail.PERIODIC, tuple(int(b) for b in block.split(',') if b.strip()))

    def literal(self):
        head = ','.join(str(a) for a in self.prefix)
        if self.tail is Tail.PERIODIC:
            tail = '(' + ','.join(str(b) for b in self.block) + ')*'
        else:
            tail = self.tail.value
        return f"[{head};{tail}]"

    def __str__(self):
        return self.literal()

    def is_irrational(self):
        return self.tail is not Tail.FINITE

    def is_noble(self):
        return self.tail is Tail.NOBLE

    def cycle(self):
        """Digits of the repeating tail (empty for finite numbers)."""
        return {Tail.NOBLE: (1,), Tail.ALL_TWOS: (2,), Tail.PERIODIC: self.block, Tail.FINITE: ()}[self.tail]

    def digit(self, k):
        if k < len(self.prefix):
            return self.prefix[k]
        cycle = self.cycle()
        if not cycle:
            return None
        return cycle[(k - len(self.prefix)) % len(cycle)]

    def digits(self, n):
        out = []
        for k in range(n):
            a = self.digit(k)
            if a is None:
                break
            out.append(a)
        return out

    def shifted(self, i):
        """The number [a_i, a_{i+1}, ...]."""
        if i <= len(self.prefix):
            return CFNumber(self.prefix[i:], self.tail, self.block)
        if self.tail is Tail.FINITE:
            raise DomainError(f"Shift {i} beyond a finite expansion of length {len(self.prefix)}")
        r = (i - len(self.prefix)) % len(self.cycle())
        if self.tail is Tail.PERIODIC:
            return CFNumber((), Tail.PERIODIC, self.block[r:] + self.block[:r])
        return CFNumber((), self.tail)

    def canonical(self):
        """Equal numbers map to the same CFNumber (used as cache keys)."""
        prefix, tail, block = list(self.prefix), self.tail, self.block
        if tail is Tail.PERIODIC and len(set(block)) == 1:
            tail, block = (Tail.NOBLE, ()) if block[0] == 1 else (Tail.ALL_TWOS, ()) if block[0] == 2 else (tail, block)
        if tail is Tail.NOBLE:
            while len(prefix) > 1 and prefix[-1] == 1:
                prefix.pop()
            if not prefix:
                prefix = [1]
        elif tail is Tail.ALL_TWOS:
            while prefix and prefix[-1] == 2:
                prefix.pop()
        elif tail is Tail.PERIODIC:
            while prefix and prefix[-1] == block[-1]:
                prefix.pop()
                block = (block[-1],) + block[:-1]
        elif len(prefix) > 1 and prefix[-1] == 1:
            prefix[-2] += 1
            prefix.pop()
        return CFNumber(tuple(prefix), tail, block)

    def exact_value(self):
        if self.is_irrational():
            raise DomainError(f"{self.literal()} is irrational")
        x = Fraction(0)
        for a in reversed(self.prefix):
            x = 1 / (a + x)
        return x


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    index: int

    @property
    def value(self):
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class PhiValue:
    """
    Enclosure of a convergent series: the true sum lies in
    [partial_sum.lower, partial_sum.upper + tail_bound.upper].

    Attributes:
        partial_sum (PrecisionReal): Sum of the evaluated terms
        tail_bound (PrecisionReal): Non-negative bound on the omitted terms
        terms_used (int): Number of evaluated terms
    """

    partial_sum: PrecisionReal
    tail_bound: PrecisionReal
    terms_used: int

    @property
    def lower(self):
        return self.partial_sum.lower

    @property
    def upper(self):
        return self.partial_sum.upper + self.tail_bound.upper

    def estimate(self):
        return PrecisionReal.from_bounds(self.lower, self.upper)

    def width(self):
        return float(self.upper - self.lower)

    def contains(self, x):
        return self.estimate().contains(x)

    def __float__(self):
        return float(self.estimate())


def convergent_pairs(digits):
    """(p_j, q_j, p_{j-1}, q_{j-1}) after consuming `digits`."""
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    for a in digits:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q, p_prev, q_prev


def convergents(c, n):
    """
    Convergents p_k/q_k = [a_0, ..., a_{k-1}] for k = 0..n.

    Args:
        c (CFNumber): Rotation number
        n (int): Last index (stops early at the end of a finite expansion)

    Returns:
        list[Convergent]
    """
    if n < 1:
        raise DomainError(f"convergents needs n >= 1, got {n}")
    out = [Convergent(0, 1, 0)]
    p_prev, p, q_prev, q = 1, 0, 0, 1
    for k in range(1, n + 1):
        a = c.digit(k - 1)
        if a is None:
            break
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append(Convergent(p, q, k))
    return out


def periodic_fixed_point(block, prec):
    """The x with x = [block..., x], i.e. the positive root of
    q_{j-1} x^2 + (q_j - p_{j-1}) x - p_j = 0."""
    p, q, p_prev, q_prev = convergent_pairs(block)
    b = q - p_prev
    root = PrecisionReal(Dyadic(b * b + 4 * q_prev * p)).sqrt(prec + 8)
    return PrecisionReal(Dyadic(2 * p)).div(root + b, prec)


def _mobius(digits, t, prec):
    """[digits..., t] for an enclosure t of the remaining tail."""
    p, q, p_prev, q_prev = convergent_pairs(digits)
    return (t * p_prev + p).div(t * q_prev + q, prec)


def cf_value(c, bits):
    """
    Value of c with error radius at most 2**-bits.

    Raises:
        PrecisionExhausted: If SIEGEL_PRECISION_CAP is reached first
    """
    if bits < 1:
        raise DomainError(f"cf_value needs bits >= 1, got {bits}")
    target = Dyadic(1, -bits)
    if not c.is_irrational():
        return PrecisionReal.from_fraction(c.exact_value(), bits + 2)
    q_bits = convergent_pairs(c.prefix)[1].bit_length()
    prec = bits + 16 + 2 * q_bits
    cap = precision_cap()
    while True:
        t = periodic_fixed_point(c.cycle(), prec)
        value = _mobius(c.prefix, t, prec)
        if value.error_radius <= target:
            return value
        if prec >= cap:
            raise PrecisionExhausted(f"cf_value({c.literal()}, {bits}) needs more than {cap} bits",
                                     hint="Raise SIEGEL_PRECISION_CAP.")
        prec = min(2 * prec, cap)


def _cycle_alphas(c, prec):
    cycle = c.cycle()
    return [periodic_fixed_point(cycle[r:] + cycle[:r], prec) for r in range(len(cycle))]


def alpha_sequence(c, count, prec=64):
    """
    alpha_0..alpha_{count-1} of c, where alpha_i = [a_i, a_{i+1}, ...].

    Prefix values come from the backward recursion alpha_i = 1/(a_i + alpha_{i+1})
    started at the tail's fixed point; tail values are the fixed points of the
    rotated cycle.
    """
    P = len(c.prefix)
    if not c.is_irrational():
        if count > P:
            raise DomainError(f"alpha_{count - 1} undefined for the finite expansion {c.literal()}")
        x, exact = Fraction(0), []
        for a in reversed(c.prefix):
            x = 1 / (a + x)
            exact.append(x)
        exact.reverse()
        return [PrecisionReal.from_fraction(v, prec) for v in exact[:count]]
    cyc = _cycle_alphas(c, prec)
    head = [None] * P
    nxt = cyc[0]
    for k in range(P - 1, -1, -1):
        nxt = (nxt + c.prefix[k]).reciprocal(prec)
        head[k] = nxt
    return [head[k] if k < P else cyc[(k - P) % len(cyc)] for k in range(count)]


def alpha(c, i, bits=64):
    """alpha_i(c) as an enclosure; for noble tails beyond the prefix this is g."""
    if i < 0:
        raise DomainError(f"alpha index must be non-negative, got {i}")
    return alpha_sequence(c, i + 1, bits)[i]


def gauss_orbit(theta, n, prec=64):
    """
    theta_1 = theta, theta_{k+1} = {1/theta_k}, for k = 1..n, as enclosures.

    Each step uses the known digit as the floor and checks it against the
    enclosure of 1/theta_k; precision doubles whenever the check is
    inconclusive or a radius passes 2**-4.

    Raises:
        DomainError: For rational theta
        PrecisionExhausted: When the cap is reached
    """
    if not theta.is_irrational():
        raise DomainError(f"Gauss orbit needs an irrational number, got {theta.literal()}",
                          hint="Use a 1*, 2* or periodic tail.")
    limit = Dyadic(1, -4)
    cap = precision_cap()
    while True:
        x = cf_value(theta, prec)
        out = [x]
        for k in range(1, n):
            inv = x.reciprocal(prec)
            a = theta.digit(k - 1)
            if inv.upper < a or inv.lower >= a + 1:
                raise InvariantViolation(f"Gauss map floor mismatch at step {k} for {theta.literal()}")
            if inv.lower < a or inv.upper >= a + 1:
                break
            x = (inv - a).rounded(prec)
            if x.error_radius > limit:
                break
            out.append(x)
        if len(out) == n:
            return out
        if prec >= cap:
            raise PrecisionExhausted(f"Gauss orbit of {theta.literal()} lost precision after {len(out)} steps",
                                     hint="Raise SIEGEL_PRECISION_CAP or request fewer steps.")
        prec = min(2 * prec, cap)
        logger.debug(f"gauss_orbit: retrying {theta.literal()} at {prec} bits")


def _brjuno_term(q_next, q, prec):
    return PrecisionReal(Dyadic(q_next)).log(prec).div(q, prec)


def brjuno_B(c, terms, prec=64, lookahead=True):
    """
    Brjuno sum B = sum_n log(q_{n+1})/q_n.

    The first `terms` terms are always summed. With `lookahead`, exact terms
    keep being added until q_N >= max(3, q_terms^2), so the analytic remainder
    starts far beyond the requested index; terms_used reports N.

    The remainder uses q_{n+1} <= (A+1) q_n, with A the largest remaining digit,
    and Fibonacci growth q_{N+k} >= phi^{k-1} q_N, which give
    sum_{n>=N} <= (3.619 (log q_N + log(A+1)) + 2.04) / q_N once q_N >= 3.

    Raises:
        DomainError: For rational c or terms < 1
    """
    if terms < 1:
        raise DomainError(f"brjuno_B needs terms >= 1, got {terms}")
    if not c.is_irrational():
        raise DomainError(f"Brjuno sum undefined for rational {c.literal()}")
    qs = [cv.q for cv in convergents(c, terms + 1)]
    total = PrecisionReal(ZERO)
    for n in range(terms):
        total = (total + _brjuno_term(qs[n + 1], qs[n], prec)).rounded(prec)
    N = terms
    extra = PrecisionReal(ZERO)
    q, q_prev = qs[N], qs[N - 1]
    target = max(3, q * q) if lookahead else 3
    while q < target:
        nxt = c.digit(N) * q + q_prev
        term = _brjuno_term(nxt, q, prec)
        if lookahead:
            total = (total + term).rounded(prec)
        else:
            extra = extra + term
        q_prev, q = q, nxt
        N += 1
    A = max(list(c.prefix[N:]) + list(c.cycle()))
    log_q = PrecisionReal(Dyadic(q)).log(prec)
    log_a = PrecisionReal(Dyadic(A + 1)).log(prec)
    bound = ((log_q + log_a) * PrecisionReal.from_fraction(Fraction(3619, 1000), prec)
             + PrecisionReal.from_fraction(Fraction(204, 100), prec)).div(q, prec)
    tail = PrecisionReal((bound + extra).upper)
    logger.debug(f"brjuno_B: {c.literal()} summed {N} terms, remainder from q={q}")
    return PhiValue(total, tail, N if lookahead else terms)


def _as_float(x):
    return float(x)


def _phi_sum(c, tol, prec, max_terms, min_terms=0):
    P = len(c.prefix)
    cyc = _cycle_alphas(c, prec)
    cyc_logs = [a.log(prec) for a in cyc]
    cyc_lmax = max(-(l.lower) for l in cyc_logs)
    prefix_alphas = alpha_sequence(c, P, prec) if P else []
    # log(a_j + 1) suffix maxima over the prefix
    suffix_lmax = [ZERO] * (P + 1)
    for j in range(P - 1, -1, -1):
        bound = Dyadic.from_float(math.log(c.prefix[j] + 1) * (1 + 2 ** -40) + 2 ** -60)
        suffix_lmax[j] = max(suffix_lmax[j + 1], bound)
    half_tol = Dyadic.from_float(tol / 2)
    total = PrecisionReal(ZERO)
    product = PrecisionReal(ONE)
    terms = []
    k = 0
    while True:
        if k < P:
            a = prefix_alphas[k]
            log_a = a.log(prec)
        else:
            r = (k - P) % len(cyc)
            a, log_a = cyc[r], cyc_logs[r]
        term = (product * (-log_a)).rounded(prec)
        terms.append(term)
        total = (total + term).rounded(prec)
        product = (product * a).rounded(prec)
        k += 1
        lmax = max(cyc_lmax, suffix_lmax[k]) if k < P else cyc_lmax
        tail = Dyadic(4) * product.upper * lmax
        if tail <= half_tol and k >= min_terms:
            return PhiValue(total, PrecisionReal(tail), k), terms
        if k >= max_terms:
            raise ResourceExhausted(f"Yoccoz sum for {c.literal()} did not reach tolerance {tol:g} "
                                    f"within {max_terms} terms")


def _certified_sum(c, tol, prec, max_terms, min_terms=0):
    tol = _as_float(tol)
    if tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    if not c.is_irrational():
        raise DomainError(f"Phi undefined for rational {c.literal()}",
                          hint="Use a 1*, 2* or periodic tail.")
    quarter = Dyadic.from_float(tol / 4)
    cap = precision_cap()
    while True:
        value, terms = _phi_sum(c, tol, prec, max_terms, min_terms)
        if value.partial_sum.error_radius <= quarter:
            return value, terms
        if prec >= cap:
            raise PrecisionExhausted(f"Phi({c.literal()}) not certified to {tol:g} at {prec} bits")
        prec = min(2 * prec, cap)


def yoccoz_phi(c, tol, prec=64, max_terms=200000):
    """
    Yoccoz function Phi(c) = sum_{k>=0} alpha_0...alpha_{k-1} log(1/alpha_k).

    Terms are summed until 4 * prod(alpha) * max log(1/alpha) over the remaining
    indices is below tol/2 (this uses alpha_{k-1} alpha_k < 1/2); precision
    doubles until the rounding radius is below tol/4.

    Args:
        c (CFNumber): Irrational rotation number
        tol (float or PrecisionReal): Target accuracy
        prec (int): Starting mantissa bits

    Returns:
        PhiValue: Enclosure of width at most tol

    Raises:
        DomainError: For rational c or tol <= 0
    """
    return _certified_sum(c, tol, prec, max_terms)[0]


def phi_terms(c, count, prec=64):
    """The first `count` terms alpha_0...alpha_{k-1} log(1/alpha_k)."""
    alphas = alpha_sequence(c, count, prec)
    product, out = PrecisionReal(ONE), []
    for a in alphas:
        out.append((product * (-a.log(prec))).rounded(prec))
        product = (product * a).rounded(prec)
    return out


def phi_split(c, index, tol, prec=64):
    """
    Split Phi into (Phi^-, Phi^1), Phi^1 being the term at `index`.

    Returns:
        tuple: (Phi^-, Phi^1, Phi) where the midpoints of Phi^- and Phi^1 add up
        exactly to the midpoint of Phi's partial sum
    """
    whole, terms = _certified_sum(c, tol, prec, 200000, min_terms=index + 1)
    one = terms[index]
    minus = PhiValue(PrecisionReal(whole.partial_sum.approx - one.approx,
                                   whole.partial_sum.error_radius + one.error_radius),
                     whole.tail_bound, whole.terms_used)
    logger.debug(f"phi_split: {c.literal()} at {index}, Phi={float(whole):.10f}")
    return minus, one, whole


def digit_bump(c, pos, N):
    """
    beta^N: the noble number c with digit N placed at index `pos`
    (ones fill the gap after the prefix).

    Raises:
        DomainError: If c is not noble, pos lies inside the prefix, or N is out of range
    """
    if not c.is_noble():
        raise DomainError(f"Digit bumps need a noble base, got {c.literal()}")
    if pos < len(c.prefix):
        raise DomainError(f"Bump position {pos} lies inside the prefix of length {len(c.prefix)}")
    if not isinstance(N, int) or N < 1 or N > MAX_DIGIT:
        raise DomainError(f"Bump digit must be an integer in [1, 2^63-1], got {N!r}")
    return CFNumber(c.prefix + (1,) * (pos - len(c.prefix)) + (N,), Tail.NOBLE)


def check_4lems(prefix, m, N, i):
    """
    Evaluate the four log-ratio estimates for beta^N with N at index n+m
    (n = len(prefix) - 1):

      1. i <= n+m:   |log(alpha_i(beta^N)/alpha_i(beta^{N+1}))| < 2^{i-(n+m)}/N
      2. i <  n+m:   |log(alpha_i(beta^N)/alpha_i(beta^1))|     < 2^{i-(n+m)}
      3. i <  n+m:   |log(L_i(beta^N)/L_i(beta^{N+1}))|         < 2^{i-(n+m)+1}
      4. i <  n+m-1: |log(L_i(beta^N)/L_i(beta^1))|             < 2^{i-(n+m)+1}

    with L_i = log(1/alpha_i). Parts outside their index range report None.

    Returns:
        tuple: Four entries, each True, False or None

    Raises:
        DomainError: For i outside [0, n+m], m < 1 or N < 1
    """
    prefix = tuple(prefix)
    n = len(prefix) - 1
    if n < 0:
        raise DomainError("check_4lems needs a nonempty prefix")
    if m < 1 or N < 1:
        raise DomainError(f"check_4lems needs m >= 1 and N >= 1, got m={m}, N={N}")
    pos = n + m
    if i < 0 or i > pos:
        raise DomainError(f"Index {i} outside [0, {pos}]")
    base = CFNumber.noble(prefix)
    b_n, b_n1 = digit_bump(base, pos, N), digit_bump(base, pos, N + 1)
    prec = 96 + pos + 2 * N.bit_length()
    cap = precision_cap()
    while True:
        a1 = alpha_sequence(base, pos + 1, prec)[i]
        an = alpha_sequence(b_n, pos + 1, prec)[i]
        an1 = alpha_sequence(b_n1, pos + 1, prec)[i]
        log1, logn, logn1 = a1.log(prec), an.log(prec), an1.log(prec)
        checks = [
            (True, abs(logn - logn1) * N, Dyadic(1, i - pos)),
            (i < pos, abs(logn - log1), Dyadic(1, i - pos)),
        ]
        if i < pos:
            l1, ln, ln1 = (-log1).log(prec), (-logn).log(prec), (-logn1).log(prec)
            checks.append((True, abs(ln - ln1), Dyadic(1, i - pos + 1)))
            checks.append((i < pos - 1, abs(ln - l1), Dyadic(1, i - pos + 1)))
        else:
            checks += [(False, None, None), (False, None, None)]
        results, undecided = [], False
        for applicable, lhs, bound in checks:
            if not applicable:
                results.append(None)
            elif lhs.upper < bound:
                results.append(True)
            elif lhs.lower >= bound:
                results.append(False)
            else:
                results.append(None)
                undecided = True
        if not undecided:
            return tuple(results)
        if prec >= cap:
            raise PrecisionExhausted(f"check_4lems({prefix}, {m}, {N}, {i}) undecided at {prec} bits")
        prec = min(2 * prec, cap)


@dataclass
class PhiBump:
    """
    Result of phi_bump_search.

    Attributes:
        m (int): Offset past the prefix; the bump sits at index len(prefix)-1+m
        N (int): Bumped digit
        phi (PhiValue): Phi(beta)
        beta (CFNumber): The bumped number
        base_phi (PhiValue): Phi(omega)
        trace (list): (N, PhiValue) pairs along the accepted run, starting at N=1
        evaluations (int): Phi evaluations spent overall
        rejected (list): (m, N, step) for offsets abandoned on a step of at least eps
    """

    m: int
    N: int
    phi: PhiValue
    beta: CFNumber
    base_phi: PhiValue
    trace: List[Tuple[int, PhiValue]] = field(default_factory=list)
    evaluations: int = 0
    rejected: List[Tuple[int, int, float]] = field(default_factory=list)

    @property
    def position(self):
        return len(self.beta.prefix) - 1

    def __iter__(self):
        return iter((self.m, self.N, self.phi))


def phi_bump_search(prefix, eps, m_min=1, config=None):
    """
    Find (m, N) with Phi(omega) + eps < Phi(beta^N) < Phi(omega) + 2 eps.

    For each m from m_min, N increases by one from 1; when a single step
    Phi(beta^{N+1}) - Phi(beta^N) reaches eps the offset m is too small and
    the search moves to m+1, as it does after an overshoot.
    All Phi values are certified to eps/10.

    Raises:
        DomainError: For eps <= 0 or an empty prefix
        ResourceExhausted: When the evaluation or m/N caps are reached
    """
    config = config or load_config()
    eps = _as_float(eps)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    prefix = tuple(prefix)
    if not prefix:
        raise DomainError("phi_bump_search needs a nonempty prefix")
    n = len(prefix) - 1
    tol = eps / 10
    base = CFNumber.noble(prefix)
    base_phi = yoccoz_phi(base, tol)
    lo_target = base_phi.upper + Dyadic.from_float(eps)
    hi_target = base_phi.lower + Dyadic.from_float(2 * eps)
    step_cap = Dyadic.from_float(eps)
    max_evals = int(config['phi_search_max_evaluations'])
    max_N, max_m = int(config['bump_max_N']), int(config['bump_max_m'])
    evaluations = 0
    log, rejected = [], []
    for m in range(max(1, m_min), max_m + 1):
        pos = n + m
        trace = [(1, base_phi)]
        prev = base_phi
        N = 1
        while N < max_N:
            N += 1
            evaluations += 1
            if evaluations > max_evals:
                raise ResourceExhausted(f"phi_bump_search exceeded {max_evals} Phi evaluations",
                                        hint="Raise phi_search_max_evaluations.", log=log)
            beta = digit_bump(base, pos, N)
            phi = yoccoz_phi(beta, tol)
            trace.append((N, phi))
            step = phi.upper - prev.lower
            if step >= step_cap:
                log.append(f"m={m}: step at N={N} too large")
                rejected.append((m, N, float(step)))
                logger.debug(f"phi_bump_search: m={m} step at N={N} reaches eps")
                break
            if phi.lower > lo_target and phi.upper < hi_target:
                logger.info(f"phi_bump_search: prefix {prefix}, eps={eps:g} -> m={m}, N={N}")
                return PhiBump(m, N, phi, beta, base_phi, trace, evaluations, rejected)
            if phi.lower >= hi_target:
                log.append(f"m={m}: overshoot at N={N}")
                break
            prev = phi
    raise ResourceExhausted(f"phi_bump_search found no bump for {prefix} up to m={max_m}", log=log)


def _cylinder_length(block):
    """Length of the set of values [block..., x], x in (0, 1)."""
    _, q, _, q_prev = convergent_pairs(block)
    return mpmath.mpf(1) / (q * (q + q_prev))


def tail_safety_bounds(prefix, m):
    """
    Head and tail bounds for tails placed at index n+m after the prefix and
    m-1 ones (n = len(prefix) - 1).

    tail = prod_{j<n+m} alpha_j(omega) * Phi(g)
    head = sum_{i<n+m} P_i [(e^{E_i} - 1)(L_i + e_i) + e_i]

    where e_i = (a_i + 1) * |cylinder of the shared digits a_i..a_{n+m-1}| bounds
    the log change of alpha_i under any tail, and E_i = sum_{j<i} e_j.

    Returns:
        tuple: (head, tail) as floats, rounded up
    """
    prefix = tuple(prefix)
    n = len(prefix) - 1
    pos = n + m
    digits = prefix + (1,) * (m - 1)
    with mpmath.workprec(80):
        enclosures = alpha_sequence(CFNumber.noble(prefix), pos, 64)
        alphas = [mpmath.mpf(float(a.upper)) for a in enclosures]
        logs = [-mpmath.log(mpmath.mpf(float(a.lower))) for a in enclosures]
        g = (mpmath.sqrt(5) - 1) / 2
        phi_g = mpmath.log(1 / g) / (1 - g)
        head = mpmath.mpf(0)
        E = mpmath.mpf(0)
        product = mpmath.mpf(1)
        for i in range(pos):
            e_i = _cylinder_length(digits[i:]) * (digits[i] + 1)
            L_i = logs[i]
            head += product * ((mpmath.exp(E) - 1) * (L_i + e_i) + e_i)
            E += e_i
            product *= alphas[i]
        tail = product * phi_g
        slack = 1 + mpmath.mpf(2) ** -30
        return float(head * slack), float(tail * slack)


def tail_safety_m0(prefix, eps):
    """
    Smallest m_0 such that for every m >= m_0 both tail_safety_bounds are
    below eps/2, so Phi(beta^I) > Phi(omega) - eps for any tail I starting at
    index n+m.

    The bounds are scanned past the first success and m_0 is placed after the
    last failure seen, so the result is monotone in eps.
    """
    eps = _as_float(eps)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    half = eps / 2
    first_ok = None
    last_bad = 0
    m = 1
    while True:
        head, tail = tail_safety_bounds(prefix, m)
        ok = head < half and tail < half
        if not ok:
            last_bad = m
        elif first_ok is None:
            first_ok = m
        if first_ok is not None and m >= 2 * first_ok + 16:
            break
        if m > 20000:
            raise ResourceExhausted(f"tail_safety_m0 found no m_0 for eps={eps:g}")
        m += 1
    return last_bad + 1
