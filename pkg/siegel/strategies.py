#!/usr/bin/env python3
"""
Strategies Module

This module provides the roster of bounded-budget rendering strategies the
adversary plays against. A strategy receives a metered oracle for theta and a
resolution m, and either returns a BallUnion or runs out of work.

Key Features:
- Strategy base class with a serializable spec
- always-timeout, constant-output, honest-bounded-renderer, orbit-sketch
- build_strategy: construct a strategy from a config entry

Usage:
    strategy = build_strategy({'name': 'orbit-sketch', 'points': 32})
    output = strategy.run(metered_oracle, 12)
"""

import logging

import numpy as np

from .exceptions import DomainError
from .numerics import Ball, BallUnion, Dyadic

logger = logging.getLogger(__name__)


class Strategy:
    """
    A rendering strategy.

    Attributes:
        name (str): Registry name
    """

    name = 'strategy'

    def run(self, oracle, m):
        """
        Args:
            oracle (MeteredOracle): Charges n units per query(n); oracle.meter
                is the strategy's work meter
            m (int): Requested resolution

        Returns:
            BallUnion, or None when the strategy gives up
        """
        raise NotImplementedError

    def params(self):
        return {}

    def to_spec(self):
        return {'name': self.name, **self.params()}

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


class AlwaysTimeout(Strategy):
    """Asks for more work than the meter holds; never reads the oracle."""

    name = 'always-timeout'

    def run(self, oracle, m):
        oracle.meter.charge(oracle.meter.remaining + 1)


class ConstantOutput(Strategy):
    """
    Returns a fixed ball union without reading the oracle.

    The default is one ball of radius 2^-radius_exp about 0, whose complement
    component at 0 is empty.
    """

    name = 'constant-output'

    def __init__(self, radius_exp=8, balls=None):
        self.radius_exp = int(radius_exp)
        if isinstance(balls, str):
            balls = BallUnion.from_text(balls)
        self.balls = balls if balls is not None else BallUnion((Ball((0, 0), Dyadic(1, -self.radius_exp)),))

    def run(self, oracle, m):
        oracle.meter.charge(1)
        return self.balls

    def params(self):
        if len(self.balls) == 1 and self.balls.balls[0].center == (Dyadic(0), Dyadic(0)):
            return {'radius_exp': self.radius_exp}
        return {'balls': self.balls.to_text()}


class HonestBoundedRenderer(Strategy):
    """Runs the grid renderer within its budget; gives up on an incomplete rendering."""

    name = 'honest-bounded-renderer'

    def __init__(self, iter_cap=None):
        self.iter_cap = iter_cap

    def run(self, oracle, m):
        from .julia import render
        rendering = render(oracle, m, oracle.meter.remaining, iter_cap=self.iter_cap)
        if rendering.incomplete:
            return None
        return rendering.balls

    def params(self):
        return {} if self.iter_cap is None else {'iter_cap': self.iter_cap}


class OrbitSketch(Strategy):
    """
    Sketches the Siegel boundary by balls about the first `points` points of
    the critical orbit, computed in floats from a 52-bit reading of theta.
    """

    name = 'orbit-sketch'

    def __init__(self, points=64, radius_exp=6):
        self.points = int(points)
        self.radius_exp = int(radius_exp)

    def run(self, oracle, m):
        t = float(oracle.query(52))
        lam = complex(np.exp(2j * np.pi * t))
        z = -lam / 2
        bits = max(m + 1, self.radius_exp + 1)
        radius = Dyadic(1, -self.radius_exp)
        balls = []
        for _ in range(self.points):
            oracle.meter.charge(1)
            z = z * z + lam * z
            center = (Dyadic.from_float(z.real).round_frac(bits), Dyadic.from_float(z.imag).round_frac(bits))
            balls.append(Ball(center, radius))
        return BallUnion(tuple(balls))

    def params(self):
        return {'points': self.points, 'radius_exp': self.radius_exp}


STRATEGIES = {cls.name: cls for cls in (AlwaysTimeout, ConstantOutput, HonestBoundedRenderer, OrbitSketch)}


def build_strategy(spec):
    """
    Build a strategy from a name or a {'name': ..., **params} entry.

    Raises:
        DomainError: For unknown names or parameters
    """
    if isinstance(spec, Strategy):
        return spec
    if isinstance(spec, str):
        spec = {'name': spec}
    params = dict(spec)
    name = params.pop('name', None)
    if name not in STRATEGIES:
        raise DomainError(f"Unknown strategy {name!r}", hint=f"Known strategies: {', '.join(sorted(STRATEGIES))}")
    try:
        return STRATEGIES[name](**params)
    except TypeError as e:
        raise DomainError(f"Bad parameters for strategy {name}: {e}")


def build_roster(specs):
    roster = [build_strategy(s) for s in specs]
    if not roster:
        raise DomainError("The strategy roster is empty", hint="List at least one strategy under 'roster'.")
    logger.debug(f"roster: {[s.name for s in roster]}")
    return roster
