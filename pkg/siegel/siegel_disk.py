#!/usr/bin/env python3
"""
Siegel Disk Module

This module provides the quadratic Siegel dynamics P(z) = z^2 + e^{2 pi i theta} z
for noble rotation numbers: certified critical orbits, carved domains W_n,
conformal radii with error bookkeeping, and the radius-bump search.

Pipeline per level n:
- Omega_n: the critical orbit P^i(c), i <= q_{n+2} (capped by max_orbit_points)
- W_n: the component of 0 in the plane minus disks of radius eps_n = 2K tau^n
  about Omega_n; its conformal radius at 0 is the working value r_n and the
  error budget is 4 sqrt(eps_n) + eps_n + mapping error
- where the disks cover 0, the orbit sorted by the linearized angle i*theta
  mod 1 (a Jordan polygon) stands in, and the level cannot certify

Key Features:
- critical_orbit with precision doubling and containment checks
- carve_domain / carve_points / visible_polygon
- conformal_radius, siegel_radius (carved W_n per level), require_radius,
  phi_logr, perturb_bound_check
- radius_bump_search dovetailing over (m, N)

Usage:
    estimate = siegel_radius(CFNumber.golden(), 1e-3)
    print(estimate.value, estimate.certified)
"""

import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional

import mpmath
import numpy as np

from .cf import CFNumber, cf_value, convergents, digit_bump, yoccoz_phi
from .circle import commensurability
from .conformal import DiskDomain, PolygonDomain, get_backend
from .configure import load_config, precision_cap
from .exceptions import (DomainError, InvariantViolation, LevelTooCoarse, PrecisionExhausted,
                         ResourceExhausted)
from .numerics import ComplexBall, Dyadic, PrecisionReal, hausdorff_distance, mpf_upper

logger = logging.getLogger(__name__)

ANGLE_BITS = 96


@dataclass(frozen=True)
class QuadraticSiegel:
    """
    P(z) = z^2 + lambda z with lambda = e^{2 pi i theta}.

    Attributes:
        theta (CFNumber): Rotation number
    """

    theta: CFNumber

    def multiplier(self, prec):
        return ComplexBall.unit_root(cf_value(self.theta, prec), prec)

    def critical_point(self, prec):
        """c = -lambda/2."""
        return self.multiplier(prec).scale(mpmath.mpf(-0.5), prec)

    def multiplier_complex(self):
        return self.multiplier(64).to_complex()


def _quadratic_step(z, lam, prec):
    """Ball enclosure of z(z + lambda) in centered form."""
    with mpmath.workprec(prec):
        c, l = z.center, lam.center
        center = c * (c + l)
        slope = abs(2 * c + l)
    r, rl = z.radius, lam.radius
    mag = mpf_upper(abs(c))
    radius = mpmath.fmul(mpf_upper(slope), r, prec=53, rounding='c')
    radius = mpmath.fadd(radius, mpmath.fmul(r, r, prec=53, rounding='c'), prec=53, rounding='c')
    radius = mpmath.fadd(radius, mpmath.fmul(mpmath.fadd(mag, r, prec=53, rounding='c'), rl,
                                             prec=53, rounding='c'), prec=53, rounding='c')
    rounding = mpmath.fmul(mpmath.fadd(mpmath.fmul(mag, mag, prec=53, rounding='c'), mag, prec=53, rounding='c'),
                           mpmath.ldexp(1, 5 - prec), prec=53, rounding='c')
    return ComplexBall(center, mpmath.fadd(radius, rounding, prec=53, rounding='c'))


@dataclass
class OrbitSet:
    """
    Critical orbit P^i(c), i = 0..count.

    Attributes:
        points (list[ComplexBall]): Enclosures of the orbit points
        level (int): Level n the orbit was computed for, if any
        bits (int): Guaranteed accuracy 2**-bits of every point
    """

    points: List[ComplexBall]
    level: Optional[int] = None
    bits: int = 53

    def __len__(self):
        return len(self.points)

    def centers(self):
        return np.array([p.to_complex() for p in self.points], dtype=complex)

    def max_radius(self):
        return max(float(p.radius) for p in self.points)


def critical_orbit(s, count, bits, level=None):
    """
    P^i(c) for i = 0..count with every radius below 2**-bits.

    Raises:
        DomainError: For count < 1
        InvariantViolation: If a point is certainly outside the closed 2-ball
        PrecisionExhausted: If SIEGEL_PRECISION_CAP is reached
    """
    if count < 1:
        raise DomainError(f"critical_orbit needs count >= 1, got {count}")
    target = mpmath.ldexp(1, -bits)
    cap = precision_cap()
    prec = bits + 20
    while True:
        lam = s.multiplier(prec)
        z = lam.scale(mpmath.mpf(-0.5), prec)
        points = [z]
        for i in range(count):
            z = _quadratic_step(z, lam, prec)
            if z.abs_lower() > 2:
                raise InvariantViolation(f"Orbit point {i + 1} of {s.theta.literal()} left the closed 2-ball")
            if z.radius > target:
                break
            points.append(z)
        if len(points) == count + 1:
            return OrbitSet(points, level, bits)
        if prec >= cap:
            raise PrecisionExhausted(f"Critical orbit of {s.theta.literal()} lost accuracy after {len(points)} points",
                                     hint="Raise SIEGEL_PRECISION_CAP or lower max_orbit_points.")
        prec = min(2 * prec, cap)
        logger.debug(f"critical_orbit: {s.theta.literal()} retrying at {prec} bits")


@lru_cache(maxsize=32)
def _orbit_centers(theta, count):
    return critical_orbit(QuadraticSiegel(theta), count, 53).centers()


def angle_order(theta, count):
    """Indices 0..count-1 sorted by i*theta mod 1, using exact integer keys."""
    step = int(cf_value(theta, ANGLE_BITS + 8).approx.round_frac(ANGLE_BITS).to_fraction() * (1 << ANGLE_BITS))
    mask = (1 << ANGLE_BITS) - 1
    return sorted(range(count), key=lambda i: (i * step) & mask)


def level_point_count(theta, n, config):
    q = convergents(theta, n + 2)[n + 2].q
    return min(q, int(config['max_orbit_points']))


@dataclass
class CarvedDomain:
    """
    Component of 0 in the plane minus closed disks about the orbit points.

    Attributes:
        centers (np.ndarray): Disk centers
        radius (float): Common disk radius 2K tau^n
        polygon (np.ndarray): Ray-cast boundary of the component, counterclockwise
        level (int): n
        K (float): Quasiconformal constant used
        tau (float): Decay rate used
    """

    centers: np.ndarray
    radius: float
    polygon: np.ndarray
    level: int = 0
    K: float = 0.0
    tau: float = 0.0

    @property
    def excluded(self):
        return [(complex(c), self.radius) for c in self.centers]

    def domain(self):
        return PolygonDomain(self.polygon)

    def boundary_distance(self):
        """Hausdorff distance from the ray-cast boundary to the orbit points."""
        return hausdorff_distance(list(self.polygon), list(self.centers))


def visible_polygon(centers, radii, rays=720):
    """
    First hit of `rays` rays from 0 against the union of disks.

    Returns:
        np.ndarray or None: Vertices, or None when 0 itself is covered

    Raises:
        DomainError: If some ray escapes (the component of 0 is unbounded)
    """
    centers = np.asarray(centers, dtype=complex)
    radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape)
    if len(centers) == 0:
        raise DomainError("No disks to carve: the component of 0 is unbounded")
    if np.any(np.abs(centers) <= radii):
        return None
    directions = np.exp(2j * np.pi * np.arange(rays) / rays)
    proj = (centers[None, :] * np.conj(directions)[:, None])
    along, across = proj.real, proj.imag
    disc = radii[None, :] ** 2 - across ** 2
    with np.errstate(invalid='ignore'):
        hit = along - np.sqrt(np.where(disc >= 0, disc, 0.0))
    hit = np.where((disc >= 0) & (along > 0), hit, np.inf)
    first = hit.min(axis=1)
    if not np.all(np.isfinite(first)):
        raise DomainError(f"{int(np.sum(~np.isfinite(first)))} of {rays} rays escape: the component of 0 is unbounded")
    return first * directions


def carve_points(points, radius, level=0, rays=720, K=0.0, tau=0.0):
    """
    Carve disks of `radius` about `points` and keep the component of 0.

    Raises:
        LevelTooCoarse: If a disk covers 0
        DomainError: If the component is unbounded
    """
    centers = np.asarray(points, dtype=complex)
    polygon = visible_polygon(centers, radius, rays)
    if polygon is None:
        raise LevelTooCoarse(f"Disks of radius {radius:.4g} cover 0 at level {level}",
                             hint="Decrease the level's disk radius (smaller K) or use a finer level.")
    return CarvedDomain(centers, float(radius), polygon, level, K, tau)


def _decay(gamma, config):
    return commensurability(gamma, config).tau_with_safety(float(config['b_safety_factor']))


def carve_domain(gamma, n, K, tau=None, config=None):
    """
    W_n for gamma: disks of radius 2K tau^n about Omega_n.

    Args:
        gamma (CFNumber): Noble rotation number
        n (int): Level
        K (float or PrecisionReal): Quasiconformal constant, K > 0
        tau (float, optional): Decay rate; defaults to the safety-inflated estimate
    """
    config = config or load_config()
    K = float(K)
    if K <= 0:
        raise DomainError(f"K must be positive, got {K}")
    tau = _decay(gamma, config) if tau is None else float(tau)
    count = level_point_count(gamma, n, config)
    points = _orbit_centers(gamma.canonical(), count)
    return carve_points(points, 2 * K * tau ** n, n, int(config['visibility_rays']), K, tau)


@dataclass
class RadiusEstimate:
    """
    Conformal radius with error bookkeeping.

    Attributes:
        value (PrecisionReal): r_n, radius = mapping-solver error
        certified_error (PrecisionReal): 4 sqrt(eps_n) + eps_n + mapping error
        level (int): Level of the reported value
        rows (list): Per-level dicts (level, r_n, eps_n, certified_error, ...)
        K (float): Quasiconformal constant after validation
        tau (float): Decay rate
        certified (bool): certified_error <= requested tolerance
    """

    value: PrecisionReal
    certified_error: PrecisionReal
    level: int = 0
    rows: List[dict] = field(default_factory=list)
    K: float = 0.0
    tau: float = 0.0
    certified: bool = True

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {
            'value': float(self.value),
            'mapping_error': float(self.value.error_radius),
            'certified_error': float(self.certified_error),
            'level': self.level,
            'K': self.K,
            'tau': self.tau,
            'certified': self.certified,
            'rows': self.rows,
        }


def conformal_radius(domain, tol, config=None):
    """
    Conformal radius at 0 of a disk, polygon, carved domain or vertex sequence.

    Raises:
        DomainError: For domains that are not Jordan, unbounded or miss 0
    """
    config = config or load_config()
    level = 0
    if isinstance(domain, CarvedDomain):
        level = domain.level
        domain = domain.domain()
    elif not isinstance(domain, (DiskDomain, PolygonDomain)):
        domain = PolygonDomain(domain)
    result = get_backend(config).radius(domain, float(tol))
    error = PrecisionReal.from_float(result.error)
    return RadiusEstimate(PrecisionReal.from_float(result.value, result.error), error, level,
                          certified=result.error <= float(tol))


def orbit_polygon(theta, centers):
    order = angle_order(theta, len(centers))
    return np.asarray(centers)[order]


def validate_K(gamma, n, K, tau, config=None):
    """
    Check d_H(Omega_n, Omega_{n+2}) <= K (tau^n + tau^{n+2}); double K until it holds.

    Returns:
        float: The validated K
    """
    config = config or load_config()
    coarse = _orbit_centers(gamma.canonical(), level_point_count(gamma, n, config))
    fine = _orbit_centers(gamma.canonical(), level_point_count(gamma, n + 2, config))
    distance = float(hausdorff_distance(list(coarse), list(fine)).upper)
    K = float(K)
    while distance > K * (tau ** n + tau ** (n + 2)):
        logger.warning(f"validate_K: d_H={distance:.4g} at level {n} exceeds K={K:g} bound; doubling K")
        K *= 2
    return K


def _config_key(config):
    keys = ('quasiconformal_K', 'b_safety_factor', 'max_orbit_points', 'level_min', 'partition_levels',
            'partition_max_points', 'symm_min_panels', 'symm_max_panels', 'conformal_backend',
            'visibility_rays', 'rotation_max_iters')
    return json.dumps({k: config[k] for k in keys if k in config}, sort_keys=True)


def siegel_radius(gamma, tol, config=None):
    """
    Conformal radius r(gamma) of the Siegel disk at 0 for a noble gamma.

    Levels n = level_min, level_min+1, ... are run while the orbit fits in
    max_orbit_points. At each level the carved domain W_n (disks of radius
    eps_n = 2K tau^n about the orbit) is measured; its radius is the level's
    working value r_n and the error budget is 4 sqrt(eps_n) + eps_n plus the
    mapping error. When the disks cover 0 or leave the component of 0
    unbounded, W_n does not exist at that level and the orbit polygon radius
    stands in, with the level marked uncarved.

    The first carved level whose budget is within tol is reported as
    certified; otherwise the finest level is returned with certified=False.
    Results are cached per canonical gamma.

    Raises:
        DomainError: If gamma is not noble or tol <= 0
    """
    if not gamma.is_noble():
        raise DomainError(f"siegel_radius needs a noble rotation number, got {gamma.literal()}",
                          hint="Use a literal ending in ;1*].")
    tol = float(tol)
    if tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    config = config or load_config()
    return _siegel_radius(gamma.canonical(), tol, _config_key(config))


def _level_row(gamma, n, centers, K, tau, tol, backend, config):
    count = level_point_count(gamma, n, config)
    points = centers[:count + 1]
    eps = 2 * K * tau ** n
    orbit = backend.radius(PolygonDomain(orbit_polygon(gamma, points)), tol / 4)
    row = {'level': n, 'r_n': orbit.value, 'eps_n': eps, 'mapping_error': orbit.error,
           'r_orbit': orbit.value, 'carved': False, 'points': count, 'K': K}
    try:
        carved = carve_points(points, eps, n, int(config['visibility_rays']), K, tau)
        mapping = backend.radius(carved.domain(), tol / 4)
    except DomainError as e:
        logger.debug(f"siegel_radius: no W_{n} for {gamma.literal()} ({e})")
    else:
        row.update({'r_n': mapping.value, 'mapping_error': mapping.error, 'carved': True})
    row['certified_error'] = 4 * math.sqrt(eps) + eps + row['mapping_error']
    return row


@lru_cache(maxsize=128)
def _siegel_radius(gamma, tol, config_key):
    config = load_config()
    config.update(json.loads(config_key))
    tau = _decay(gamma, config)
    K = float(config['quasiconformal_K'])
    max_points = int(config['max_orbit_points'])
    n_min = int(config['level_min'])
    n_max = n_min
    while True:
        qs = [c.q for c in convergents(gamma, n_max + 4)]
        if qs[n_max + 2] >= max_points:
            break
        n_max += 1
    backend = get_backend(config)
    centers = _orbit_centers(gamma, level_point_count(gamma, n_max, config))
    rows, best = [], None
    for n in range(n_min, n_max + 1):
        if n + 2 <= n_max:
            K = validate_K(gamma, n, K, tau, config)
        try:
            row = _level_row(gamma, n, centers, K, tau, tol, backend, config)
        except DomainError as e:
            logger.warning(f"siegel_radius: level {n} polygon rejected ({e}); moving on")
            continue
        rows.append(row)
        best = row
        logger.debug(f"siegel_radius: {gamma.literal()} level {n}: r={row['r_n']:.8f} "
                     f"eps={row['eps_n']:.3g} carved={row['carved']}")
        if row['carved'] and row['certified_error'] <= tol:
            break
    if best is None:
        raise ResourceExhausted(f"No usable level for {gamma.literal()} within {max_points} orbit points")
    certified = best['carved'] and best['certified_error'] <= tol
    if not certified:
        logger.warning(f"siegel_radius: {gamma.literal()} not certified to {tol:g} "
                       f"(error budget {best['certified_error']:.3g} at level {best['level']}, "
                       f"carved={best['carved']})")
    logger.info(f"siegel_radius: {gamma.literal()} r={best['r_n']:.8f} at level {best['level']}")
    return RadiusEstimate(PrecisionReal.from_float(best['r_n'], best['mapping_error']),
                          PrecisionReal.from_float(best['certified_error']), best['level'], rows, K, tau, certified)


def require_radius(gamma, tol, config=None):
    """
    siegel_radius for consumers that build on the value.

    With `require_certified_radius` set in the configuration, an estimate
    whose error budget misses tol is refused; otherwise it is returned and its
    `certified` flag travels with the result.

    Raises:
        ResourceExhausted: For a refused, non-certified estimate
    """
    config = config or load_config()
    estimate = siegel_radius(gamma, tol, config)
    if not estimate.certified and config.get('require_certified_radius', False):
        raise ResourceExhausted(f"r({gamma.literal()}) is not certified to {float(tol):g} "
                                f"(error budget {float(estimate.certified_error):.3g})",
                                hint="Raise max_orbit_points or unset require_certified_radius.")
    return estimate


def perturb_bound_check(rU, rV, eps):
    """0 < r(U) - r(V) <= 4 sqrt(r(U)) sqrt(eps)."""
    rU, rV, eps = float(rU), float(rV), float(eps)
    difference = rU - rV
    return 0 < difference <= 4 * math.sqrt(rU) * math.sqrt(eps)


def phi_logr(gamma, tol, config=None):
    """f(gamma) = Phi(gamma) + log r(gamma), with the mapping error carried through the log."""
    phi = yoccoz_phi(gamma, float(tol) / 2)
    radius = require_radius(gamma, float(tol) / 2, config)
    return phi.estimate() + radius.value.log(64)


def ball_union_radius(balls, config=None):
    """
    r(S) for a rendered BallUnion: conformal radius at 0 of the ray-cast
    component of the complement containing 0; 0 when that component is empty
    or unbounded.
    """
    config = config or load_config()
    if balls.is_empty():
        return 0.0
    try:
        polygon = visible_polygon(balls.centers(), balls.radii(), int(config['visibility_rays']))
    except DomainError as e:
        logger.debug(f"ball_union_radius: {e}")
        return 0.0
    if polygon is None:
        return 0.0
    return float(conformal_radius(PolygonDomain(polygon), 1e-6, config).value)


def _safe_ball_union_radius(balls, config):
    try:
        return ball_union_radius(balls, config)
    except DomainError:
        return 0.0


@dataclass
class RadiusBump:
    """
    Result of radius_bump_search.

    Attributes:
        m (int): Offset past the prefix (m > m0)
        N (int): Bumped digit
        radius (RadiusEstimate): r(beta)
        phi: PhiValue of beta
        beta (CFNumber): Bumped number
        base_radius (RadiusEstimate): r(omega)
        base_phi: PhiValue of omega
        log (list): Candidates examined
    """

    m: int
    N: int
    radius: RadiusEstimate
    phi: object
    beta: CFNumber
    base_radius: RadiusEstimate
    base_phi: object
    log: List[dict] = field(default_factory=list)

    @property
    def drop(self):
        return float(self.base_radius.value) - float(self.radius.value)

    def __iter__(self):
        return iter((self.m, self.N, self.radius, self.phi))


def _dovetail(m0, max_j, max_m):
    """(m, j) pairs by increasing (m - m0 - 1) + j."""
    for s in range(max_j + max_m + 1):
        for i in range(s + 1):
            j = s - i
            if j <= max_j and m0 + 1 + i <= max_m:
                yield m0 + 1 + i, j


def radius_bump_search(prefix, m0, eps, drop_range=None, config=None):
    """
    Find m > m0 and N with r(omega) - hi < r(beta) < r(omega) - lo and
    Phi(beta) > Phi(omega), where (lo, hi) = drop_range or (eps, 2 eps).

    Pairs are enumerated by dovetailing m = m0+1+i against N = round(2^{j/2});
    candidates whose predicted drop r(omega)(1 - e^{-dPhi}) falls outside
    [lo/2, 2 hi] are skipped without a radius evaluation.

    Raises:
        DomainError: If eps is not in (0, r(omega)/4) or m0 < 1
        ResourceExhausted: After radius_search_max_candidates radius evaluations,
            or for a non-certified radius under require_certified_radius
    """
    config = config or load_config()
    prefix = tuple(prefix)
    eps = float(eps)
    if m0 < 1:
        raise DomainError(f"m0 must be at least 1, got {m0}")
    base = CFNumber.noble(prefix)
    tol = max(eps / 10, 1e-6)
    base_radius = require_radius(base, tol, config)
    r0 = float(base_radius.value)
    if not 0 < eps < r0 / 4:
        raise DomainError(f"eps={eps:g} must lie in (0, r/4) with r={r0:.6g}")
    lo, hi = drop_range if drop_range is not None else (eps, 2 * eps)
    base_phi = yoccoz_phi(base, tol)
    n = len(prefix) - 1
    max_N = int(config['bump_max_N'])
    max_j = 2 * int(math.log2(max_N))
    cap = int(config['radius_search_max_candidates'])
    max_phi = int(config['phi_search_max_evaluations'])
    seen, log = set(), []
    evaluated = phi_evaluations = 0
    for m, j in _dovetail(m0, max_j, int(config['bump_max_m'])):
        N = max(2, round(2 ** (j / 2)))
        if (m, N) in seen or N > max_N:
            continue
        seen.add((m, N))
        beta = digit_bump(base, n + m, N)
        phi = yoccoz_phi(beta, tol)
        phi_evaluations += 1
        if phi_evaluations > max_phi:
            raise ResourceExhausted(f"radius_bump_search exceeded {max_phi} Phi evaluations", log=log)
        d_phi = float(phi.estimate() - base_phi.estimate())
        predicted = r0 * (1 - math.exp(-d_phi))
        if predicted < lo / 2 or predicted > 2 * hi:
            continue
        evaluated += 1
        if evaluated > cap:
            raise ResourceExhausted(f"radius_bump_search exceeded {cap} radius evaluations",
                                    hint="Raise radius_search_max_candidates.", log=log)
        radius = require_radius(beta, tol, config)
        drop_ok = (radius.value.upper < base_radius.value.lower - Dyadic.from_float(lo)
                   and radius.value.lower > base_radius.value.upper - Dyadic.from_float(hi))
        phi_ok = phi.lower > base_phi.upper
        log.append({'m': m, 'N': N, 'predicted_drop': predicted, 'radius': float(radius.value),
                    'drop_ok': drop_ok, 'phi_ok': phi_ok})
        logger.info(f"radius_bump_search: m={m} N={N} r={float(radius.value):.6f} "
                    f"(drop {r0 - float(radius.value):.4g}, wanted ({lo:.4g}, {hi:.4g}))")
        if drop_ok and phi_ok:
            return RadiusBump(m, N, radius, phi, beta, base_radius, base_phi, log)
    raise ResourceExhausted(f"radius_bump_search exhausted all pairs for {prefix}", log=log)
