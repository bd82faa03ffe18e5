import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from siegel.cf import CFNumber, cf_value, convergents
from siegel.circle import (
    FLOAT_STEP_ERROR,
    BlaschkeMap,
    _float_step,
    blaschke_angle,
    commensurability,
    dynamical_partition,
    estimate_B,
    rotation_number,
    solve_tau,
)
from siegel.exceptions import DomainError
from siegel.numerics import Dyadic, PrecisionReal

from .conftest import GOLDEN


@pytest.fixture(scope="module")
def golden_tau():
    return solve_tau(CFNumber.golden(), 1e-9)


class TestBlaschkeMap:
    def test_angle_zero_maps_to_tau(self):
        assert blaschke_angle(BlaschkeMap(0.3), 0.0) == pytest.approx(0.3, abs=1e-15)

    def test_half_turn(self):
        assert blaschke_angle(BlaschkeMap(0.3), 0.5) == pytest.approx(0.8, abs=1e-12)

    def test_lift_matches_complex_map(self):
        m = BlaschkeMap(0.17)
        for x in (0.05, 0.3, 0.71):
            w = m.evaluate(complex(np.exp(2j * np.pi * x)))
            assert abs(w) == pytest.approx(1.0, abs=1e-12)
            assert (np.angle(w) / (2 * np.pi)) % 1.0 == pytest.approx(blaschke_angle(m, x), abs=1e-12)

    def test_lift_is_monotone(self):
        m = BlaschkeMap(0.41)
        rng = np.random.default_rng(1)
        for _ in range(1000):
            x = rng.uniform(0, 1)
            y = x + rng.uniform(0, 1)
            assert m.lift(x) <= m.lift(y)
            assert m.lift(x + 1) == pytest.approx(m.lift(x) + 1, abs=1e-12)


class TestRotationNumber:
    def test_zero_tau_fixes_angle_zero(self):
        assert rotation_number(BlaschkeMap(0.0), 1000).contains(0)

    def test_round_trip(self, golden_tau):
        rho = rotation_number(BlaschkeMap(golden_tau.approx), 200000, tol=1e-8)
        assert float(rho) == pytest.approx(GOLDEN, abs=1e-6)

    def test_monotone_in_tau(self):
        rhos = [rotation_number(BlaschkeMap(t), 2000) for t in np.linspace(0, 1, 21)[:-1]]
        assert all(a.lower <= b.upper for a, b in zip(rhos, rhos[1:]))

    def test_tau_enclosure_contains_golden(self, golden_tau):
        rho = rotation_number(BlaschkeMap(golden_tau), 20000)
        assert rho.contains(cf_value(CFNumber.golden(), 128))
        assert float(rho.width) < 1e-6

    def test_shifted_tau_excludes_golden(self, golden_tau):
        shifted = BlaschkeMap(PrecisionReal(golden_tau.approx + Dyadic(1, -8)))
        rho = rotation_number(shifted, 20000)
        assert rho.lower > cf_value(CFNumber.golden(), 128).upper

    def test_float_step_within_its_error(self):
        rng = np.random.default_rng(7)
        for x, tau in rng.uniform(0, 1, size=(500, 2)):
            k, frac = _float_step(x, tau, 0)
            with mpmath.workprec(200):
                t = 2 * mpmath.pi * x
                exact = x + tau - mpmath.atan(mpmath.sin(t) / (3 - mpmath.cos(t))) / mpmath.pi
            assert abs(Fraction(k) + Fraction(frac) - Dyadic.from_mpf(exact).to_fraction()) < FLOAT_STEP_ERROR / 2

    def test_bad_iterations(self):
        with pytest.raises(DomainError):
            rotation_number(BlaschkeMap(0.2), 0)


class TestSolveTau:
    def test_golden_enclosure(self, golden_tau):
        assert 0 < float(golden_tau) < 1
        assert golden_tau.lower >= 0 and golden_tau.upper <= 1

    def test_silver(self):
        silver = CFNumber.parse("[2;2*]")
        tau = solve_tau(silver, 1e-8)
        rho = rotation_number(BlaschkeMap(tau.approx), 200000, tol=1e-8)
        assert float(rho) == pytest.approx(math.sqrt(2) - 1, abs=1e-6)

    def test_rational_rejected(self):
        with pytest.raises(DomainError):
            solve_tau(CFNumber.parse("[2;end]"), 1e-6)

    def test_bad_tolerance(self, golden):
        with pytest.raises(DomainError):
            solve_tau(golden, 0)


class TestPartition:
    def test_level_one_count(self, golden, golden_tau):
        assert len(dynamical_partition(BlaschkeMap(golden_tau), golden, 1)) == 2

    def test_counts_follow_convergents(self, golden, golden_tau):
        qs = [c.q for c in convergents(golden, 9)]
        m = BlaschkeMap(golden_tau)
        for n in range(1, 8):
            assert len(dynamical_partition(m, golden, n)) == qs[n + 1]

    def test_intervals_cover_the_circle(self, golden, golden_tau):
        part = dynamical_partition(BlaschkeMap(golden_tau), golden, 6)
        assert part.intervals().sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(part.points) > 0)

    def test_two_finer_intervals_per_gap(self, golden, golden_tau):
        m = BlaschkeMap(golden_tau)
        for n in range(1, 7):
            coarse = dynamical_partition(m, golden, n)
            finer = dynamical_partition(m, golden, n + 2)
            assert coarse.count_within(finer).min() >= 2

    def test_negative_level(self, golden, golden_tau):
        with pytest.raises(DomainError):
            dynamical_partition(BlaschkeMap(golden_tau), golden, -1)


class TestCommensurability:
    def test_bounded_ratios(self, golden):
        estimate = commensurability(golden)
        assert 1 < estimate.b_hat < 100
        assert max(estimate.ratios) == estimate.b_hat
        assert 0 < estimate.tau_hat < 1
        assert estimate.tau_hat < estimate.tau_with_safety(2) < 1

    def test_lengths_decay(self, golden):
        estimate = commensurability(golden)
        assert estimate.max_lengths[-1] < estimate.max_lengths[0]

    def test_needs_two_levels(self, golden, golden_tau):
        with pytest.raises(DomainError):
            estimate_B([dynamical_partition(BlaschkeMap(golden_tau), golden, 3)])

    def test_needs_consecutive_levels(self, golden, golden_tau):
        m = BlaschkeMap(golden_tau)
        with pytest.raises(DomainError):
            estimate_B([dynamical_partition(m, golden, 3), dynamical_partition(m, golden, 5)])
