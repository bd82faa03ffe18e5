#!/usr/bin/env python3
"""
Conformal Module

This module provides the Riemann-mapping backends used to measure conformal
radii r(U, 0) of bounded simply connected domains containing 0.

Key Features:
- DiskDomain: exact r = (R^2 - |c|^2)/R
- PolygonDomain: Jordan polygon checks (orientation, self-intersection, 0 inside)
- SymmBackend (default): single-layer potential with piecewise-constant density,
  exact panel integrals, and an a posteriori error |r_s - r_2s| from panel doubling
- ZipperBackend: geodesic zipper maps onto the upper half-plane, tracking the
  derivative at 0

Usage:
    square = PolygonDomain([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
    result = conformal_map_radius(square, 1e-4)
"""

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ResourceExhausted

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MappingResult:
    """
    Attributes:
        value (float): Conformal radius at 0
        error (float): A posteriori error estimate (0 for exact domains)
        panels (int): Boundary panels of the finest solve
        converged (bool): error <= requested tolerance
    """

    value: float
    error: float
    panels: int = 0
    converged: bool = True


@dataclass(frozen=True)
class DiskDomain:
    radius: float
    center: complex = 0j

    def contains_origin(self):
        return abs(self.center) < self.radius

    def conformal_radius(self):
        if not self.contains_origin():
            raise DomainError(f"Disk of radius {self.radius} about {self.center} does not contain 0")
        return (self.radius ** 2 - abs(self.center) ** 2) / self.radius


def signed_area(z):
    """Shoelace area; positive for counterclockwise vertices."""
    return 0.5 * float(np.sum(z.real * np.roll(z.imag, -1) - np.roll(z.real, -1) * z.imag))


def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def has_self_intersection(z, chunk=256):
    """Proper crossings between non-adjacent edges, tested chunk by chunk."""
    n = len(z)
    p, q = z, np.roll(z, -1)
    edge = q - p
    idx = np.arange(n)
    for start in range(0, n, chunk):
        rows = idx[start:start + chunk]
        a, b, e = p[rows, None], q[rows, None], edge[rows, None]
        d1 = _cross(edge[None, :], a - p[None, :])
        d2 = _cross(edge[None, :], b - p[None, :])
        d3 = _cross(e, p[None, :] - a)
        d4 = _cross(e, q[None, :] - a)
        crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
        gap = np.abs(rows[:, None] - idx[None, :])
        crossing &= (gap > 1) & (gap < n - 1)
        if crossing.any():
            return True
    return False


def contains_point(z, w=0j):
    """Even-odd rule for the point w."""
    a = z - w
    b = np.roll(a, -1)
    straddles = (a.imag > 0) != (b.imag > 0)
    with np.errstate(divide='ignore', invalid='ignore'):
        x_cross = a.real + (0 - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    return bool(np.count_nonzero(straddles & (x_cross > 0)) % 2)


class PolygonDomain:
    """
    Interior of a Jordan polygon, normalized to counterclockwise order.

    Raises:
        DomainError: For fewer than three vertices, zero area, a
            self-intersecting boundary, or 0 outside the polygon
    """

    def __init__(self, vertices):
        z = np.asarray(vertices, dtype=complex).ravel()
        if len(z) < 3:
            raise DomainError(f"A polygon needs at least 3 vertices, got {len(z)}")
        area = signed_area(z)
        if area == 0:
            raise DomainError("Degenerate polygon with zero area")
        if area < 0:
            z = z[::-1].copy()
        if has_self_intersection(z):
            raise DomainError("Boundary polygon intersects itself",
                              hint="Use a finer level or check the orbit ordering.")
        if not contains_point(z):
            raise DomainError("The polygon does not contain 0")
        self.vertices = z

    def __len__(self):
        return len(self.vertices)

    def refined(self, factor=2):
        """Insert factor-1 equally spaced points on every edge."""
        z = self.vertices
        t = np.arange(factor) / factor
        pts = (z[:, None] + (np.roll(z, -1) - z)[:, None] * t[None, :]).ravel()
        out = PolygonDomain.__new__(PolygonDomain)
        out.vertices = pts
        return out


def _panels(vertices, count):
    """Split every edge into panels, roughly `count` in total, at least one per edge."""
    edges = np.roll(vertices, -1) - vertices
    lengths = np.abs(edges)
    per_edge = np.maximum(1, np.round(count * lengths / lengths.sum()).astype(int))
    owner = np.repeat(np.arange(len(vertices)), per_edge)
    offset = np.arange(per_edge.sum()) - np.repeat(np.cumsum(per_edge) - per_edge, per_edge)
    step = edges[owner] / per_edge[owner]
    start = vertices[owner] + step * offset
    return start, start + step


def _log_antiderivative(u, d):
    """Antiderivative in u of 0.5 log(u^2 + d^2)."""
    r2 = u * u + d * d
    safe = np.where(r2 > 0, r2, 1.0)
    return np.where(r2 > 0, 0.5 * u * np.log(safe), 0.0) - u + d * np.arctan2(u, d)


def log_integrals(targets, start, end):
    """Matrix of int_panel log|z - w| |dw| for each target z and panel."""
    length = np.abs(end - start)
    tangent = (end - start) / length
    rel = (targets[:, None] - start[None, :]) * np.conj(tangent)[None, :]
    s0, d = rel.real, np.abs(rel.imag)
    return _log_antiderivative(length[None, :] - s0, d) - _log_antiderivative(-s0, d)


def symm_radius(vertices, panels):
    """
    One Symm solve: find sigma and c with
        sum_j sigma_j int_j log|z_i - w| |dw| + c = log|z_i|   (collocation)
        sum_j sigma_j |panel_j| = 1
    so that log r = sum_j sigma_j int_j log|w| |dw| + c.
    """
    start, end = _panels(vertices, panels)
    mid = 0.5 * (start + end)
    n = len(mid)
    system = np.empty((n + 1, n + 1))
    system[:n, :n] = log_integrals(mid, start, end)
    system[:n, n] = 1.0
    system[n, :n] = np.abs(end - start)
    system[n, n] = 0.0
    rhs = np.append(np.log(np.abs(mid)), 1.0)
    solution = np.linalg.solve(system, rhs)
    b = log_integrals(np.zeros(1, dtype=complex), start, end)[0]
    return float(np.exp(b @ solution[:n] + solution[n])), n


class SymmBackend:
    name = 'symm'

    def __init__(self, min_panels=256, max_panels=2048):
        self.min_panels = int(min_panels)
        self.max_panels = int(max_panels)

    def radius(self, domain, tol):
        if isinstance(domain, DiskDomain):
            return MappingResult(domain.conformal_radius(), 0.0)
        count = max(self.min_panels, len(domain))
        value, used = symm_radius(domain.vertices, count)
        while True:
            finer, used_fine = symm_radius(domain.vertices, 2 * used)
            error = abs(finer - value)
            logger.debug(f"symm: {used} -> {used_fine} panels, r={finer:.12f}, error {error:.3g}")
            if error <= tol:
                return MappingResult(finer, error, used_fine, True)
            if 2 * used_fine > self.max_panels:
                return MappingResult(finer, error, used_fine, False)
            value, used = finer, used_fine


def _upper(z):
    """Choose the square-root branch in the closed upper half-plane."""
    return np.where(np.imag(z) < 0, -z, z)


class ZipperBackend:
    """
    Geodesic zipper: boundary points are pushed one by one to 0 by slit maps of
    the upper half-plane, the last arc is opened with a square, and the image of
    0 is sent to the disk center. The derivative at 0 is carried along, so the
    radius is 1/|Phi'(0)|.
    """

    name = 'zipper'

    def __init__(self, refinements=3):
        self.refinements = int(refinements)

    @staticmethod
    def _radius(vertices):
        z = np.asarray(vertices, dtype=complex)
        z0, z1 = z[0], z[1]
        pts = _upper(1j * np.sqrt((z[2:] - z1) / (z[2:] - z0)))
        o = complex(_upper(1j * np.sqrt(z1 / z0)))
        deriv = -((z1 - z0) / z0 ** 2) / (2 * o)
        zeta = np.inf
        for i in range(len(pts)):
            a = pts[i]
            c = abs(a) ** 2 / a.imag
            if a.real != 0:
                b = abs(a) ** 2 / a.real
                pts = pts / (1 - pts / b)
                deriv /= (1 - o / b) ** 2
                o = o / (1 - o / b)
                zeta = -b if np.isinf(zeta) else zeta / (1 - zeta / b)
            pts = _upper(np.sqrt(pts * pts + c * c))
            pts[i] = 0
            s = complex(_upper(np.sqrt(o * o + c * c)))
            deriv *= o / s
            o = s
            if np.isfinite(zeta):
                zeta = np.sign(zeta) * np.sqrt(zeta * zeta + c * c)
        if np.isfinite(zeta):
            deriv /= (1 - o / zeta) ** 2
            o = o / (1 - o / zeta)
        deriv *= -2 * o
        o = -(o * o)
        deriv /= (o - np.conj(o))
        return float(1 / abs(deriv))

    def radius(self, domain, tol):
        if isinstance(domain, DiskDomain):
            return MappingResult(domain.conformal_radius(), 0.0)
        coarse = domain.refined(2 ** (self.refinements - 1))
        fine = domain.refined(2 ** self.refinements)
        value, finer = self._radius(coarse.vertices), self._radius(fine.vertices)
        error = abs(finer - value)
        logger.debug(f"zipper: {len(coarse)} -> {len(fine)} points, r={finer:.12f}, error {error:.3g}")
        return MappingResult(finer, error, len(fine), error <= tol)


BACKENDS = {'symm': SymmBackend, 'zipper': ZipperBackend}


def get_backend(config=None):
    config = config or {}
    name = config.get('conformal_backend', 'symm')
    if name not in BACKENDS:
        raise DomainError(f"Unknown conformal backend {name!r}", hint=f"Choose one of {sorted(BACKENDS)}.")
    if name == 'symm':
        return SymmBackend(config.get('symm_min_panels', 256), config.get('symm_max_panels', 2048))
    return ZipperBackend()


def conformal_map_radius(domain, tol, config=None, strict=False):
    """
    Conformal radius of `domain` at 0.

    Args:
        domain: DiskDomain, PolygonDomain or a vertex sequence
        tol (float): Requested accuracy
        strict (bool): Raise instead of returning a non-converged result

    Raises:
        DomainError: For invalid domains
        ResourceExhausted: If strict and the panel cap is reached first
    """
    if not isinstance(domain, (DiskDomain, PolygonDomain)):
        domain = PolygonDomain(domain)
    result = get_backend(config).radius(domain, tol)
    if strict and not result.converged:
        raise ResourceExhausted(f"Conformal radius error {result.error:.3g} above {tol:g} "
                                f"at {result.panels} panels", hint="Raise symm_max_panels.")
    return result
