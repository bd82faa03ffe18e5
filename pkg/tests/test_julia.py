import cmath

import numpy as np
import pytest

from siegel.exceptions import DomainError
from siegel.julia import (
    OrbitResult, _bands, _read_multiplier, classify_point, escape_orbits, exterior_distance_bound,
    known_julia_points, render)
from siegel.numerics import Dyadic, Oracle, WorkMeter, ZERO

from .conftest import GOLDEN

FIXED_POINT = 1 - cmath.exp(2j * cmath.pi * GOLDEN)


@pytest.fixture
def oracle(golden):
    return Oracle.from_cf(golden)


@pytest.fixture
def small_rendering(oracle):
    return render(oracle, 2, 10 ** 6, iter_cap=64)


class TestClassifyPoint:
    def test_far_outside(self, oracle):
        verdict = classify_point(oracle, (Dyadic(7, -1), ZERO), 4, 10 ** 6)
        assert (verdict.bit, verdict.band, verdict.budget_used) == (0, 'far', 0)

    def test_repelling_fixed_point(self, oracle):
        verdict = classify_point(oracle, FIXED_POINT, 3, 10 ** 6, iter_cap=64)
        assert verdict.bit == 1
        assert verdict.band == 'near'

    def test_timeout(self, oracle):
        verdict = classify_point(oracle, 0.5 + 0.5j, 4, 10)
        assert verdict.timed_out and verdict.bit is None

    def test_bad_arguments(self, oracle):
        with pytest.raises(DomainError):
            classify_point(oracle, 0j, 4, 0)
        with pytest.raises(DomainError):
            classify_point(oracle, 0j, -1, 100)


class TestRender:
    def test_fixed_point_is_covered(self, small_rendering):
        assert any(abs(b.complex_center() - FIXED_POINT) <= float(b.radius) for b in small_rendering.balls)

    def test_balls_stay_near_two_ball(self, small_rendering):
        for b in small_rendering.balls:
            assert abs(b.complex_center()) + float(b.radius) <= 2 + 2 ** -2

    def test_deterministic(self, oracle, golden, small_rendering):
        again = render(Oracle.from_cf(golden), 2, 10 ** 6, iter_cap=64)
        assert again.balls == small_rendering.balls
        assert again.stats == small_rendering.stats

    def test_stats_account_for_every_pixel(self, small_rendering):
        stats = small_rendering.stats
        assert sum(stats['bands'].values()) == stats['pixels']
        assert stats['balls'] == len(small_rendering.balls) > 0
        assert stats['oracle_reads'] == [52]
        assert not small_rendering.incomplete

    def test_over_budget_is_incomplete(self, oracle):
        rendering = render(oracle, 2, 100)
        assert rendering.incomplete
        assert rendering.balls.is_empty()
        with pytest.raises(DomainError):
            rendering.to_pgm()

    def test_pgm_header(self, small_rendering):
        data = small_rendering.to_pgm(["config: {}", "# version: 0.1"])
        header = b"P5\n# config: {}\n# version: 0.1\n33 33\n255\n"
        assert data.startswith(header)
        assert len(data) == len(header) + 33 * 33

    def test_m_must_be_positive(self, oracle):
        with pytest.raises(DomainError):
            render(oracle, 0, 10 ** 6)


class TestExteriorDistance:
    def test_containment_bound(self, golden):
        assert float(exterior_distance_bound(golden, 10 + 0j, 50)) >= 8

    def test_fixed_origin(self, golden):
        assert float(exterior_distance_bound(golden, 0j, 200)) == 0


class TestKnownJuliaPoints:
    def test_fixed_point_first(self, golden):
        points, errors = known_julia_points(golden, depth=0)
        assert len(points) == 1
        assert abs(points[0] - FIXED_POINT) <= errors[0] + 1e-12

    def test_minus_one_is_a_preimage(self, golden):
        points, _ = known_julia_points(golden, depth=1)
        assert np.abs(points + 1).min() < 1e-9
        assert len(points) == 2

    def test_points_inside_two_ball(self, golden):
        points, errors = known_julia_points("[1;1*]", depth=4)
        assert np.all(np.abs(points) <= 2 + errors)

    def test_negative_depth(self, golden):
        with pytest.raises(DomainError):
            known_julia_points(golden, depth=-1)


class TestDistanceBounds:
    @pytest.fixture
    def orbits(self, oracle):
        lam, lam_err = _read_multiplier(oracle, 52)
        points = np.array([1.9 + 1.9j, 3 + 0j, -2.5 + 0.5j, 100 + 0j])
        return points, escape_orbits(points, lam, lam_err, 200, WorkMeter(10 ** 5))

    def test_lower_never_exceeds_distance_to_known_points(self, golden, orbits):
        points, result = orbits
        jpoints, jerrors = known_julia_points(golden, depth=6)
        for z, lower in zip(points, result.lower):
            assert lower <= np.min(np.abs(jpoints - z) + jerrors)

    def test_upper_covers_containment_distance(self, orbits):
        points, result = orbits
        assert result.escaped.all()
        assert np.all(np.isfinite(result.upper))
        assert np.all(result.upper >= np.abs(points) - 2)
        assert np.all(result.estimate <= result.upper)

    def test_gradient_bound_is_positive(self, orbits):
        _, result = orbits
        assert np.all(result.lower > 0)

    def test_estimate_alone_is_not_far(self):
        result = OrbitResult(escaped=np.array([True]), lower=np.array([0.0]),
                             upper=np.array([np.inf]), estimate=np.array([1.0]))
        bits, band = _bands(np.array([1.5]), result, np.array([False]), np.array([False]),
                            2.0 ** -6, np.array([1.0]), 0.0)
        assert band[0] == 2
        assert bits[0] == 0

    def test_certified_lower_is_far(self):
        result = OrbitResult(escaped=np.array([True]), lower=np.array([0.1]),
                             upper=np.array([0.4]), estimate=np.array([0.2]))
        _, band = _bands(np.array([1.5]), result, np.array([False]), np.array([False]),
                         2.0 ** -6, np.array([1.0]), 0.0)
        assert band[0] == 0
