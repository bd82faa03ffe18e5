import math
from fractions import Fraction

import mpmath
import pytest

from siegel.cf import (
    CFNumber,
    PhiValue,
    Tail,
    alpha,
    alpha_sequence,
    brjuno_B,
    cf_value,
    check_4lems,
    convergents,
    digit_bump,
    gauss_orbit,
    phi_bump_search,
    phi_split,
    phi_terms,
    tail_safety_bounds,
    tail_safety_m0,
    yoccoz_phi,
)
from siegel.exceptions import DomainError
from siegel.numerics import PrecisionReal

from .conftest import GOLDEN

SILVER = math.sqrt(2) - 1


class TestLiterals:
    @pytest.mark.parametrize("literal", ["[1;1*]", "[1,2;1*]", "[3;2*]", "[1,2;(1,3)*]", "[2;end]"])
    def test_literal_parses_back(self, literal):
        assert CFNumber.parse(literal).literal() == literal

    @pytest.mark.parametrize("literal", ["1;1*", "[1;3*]", "[0;1*]", "[;end]", "[1,x;1*]"])
    def test_malformed(self, literal):
        with pytest.raises(DomainError):
            CFNumber.parse(literal)

    def test_digits_follow_the_cycle(self):
        c = CFNumber.parse("[2;(1,3)*]")
        assert c.digits(5) == [2, 1, 3, 1, 3]
        assert c.is_irrational() and not c.is_noble()

    def test_canonical_trims_trailing_ones(self):
        assert CFNumber.parse("[1,2,1,1;1*]").canonical() == CFNumber((1, 2), Tail.NOBLE)
        assert CFNumber.parse("[1,1,1;1*]").canonical() == CFNumber.golden()

    def test_shifted_follows_the_digits(self):
        c = CFNumber.parse("[2;(1,3)*]")
        assert c.shifted(1).digits(4) == [1, 3, 1, 3]
        assert c.shifted(4).digits(4) == [3, 1, 3, 1]
        assert CFNumber.parse("[1,2;1*]").shifted(1).digits(3) == [2, 1, 1]

    def test_shift_past_finite_expansion(self):
        with pytest.raises(DomainError):
            CFNumber.parse("[2,3;end]").shifted(3)


class TestValues:
    def test_golden(self, golden):
        v = cf_value(golden, 80)
        with mpmath.workprec(200):
            g = (mpmath.sqrt(5) - 1) / 2
            assert v.lower.to_mpf() <= g <= v.upper.to_mpf()
        assert float(v.error_radius) <= 2.0 ** -80

    def test_silver(self):
        assert float(cf_value(CFNumber.parse("[2;2*]"), 60)) == pytest.approx(SILVER, abs=1e-15)

    def test_finite(self):
        assert cf_value(CFNumber.parse("[2;end]"), 20).contains(Fraction(1, 2))

    def test_fibonacci_convergents(self, golden):
        assert [c.q for c in convergents(golden, 6)] == [1, 1, 2, 3, 5, 8, 13]

    def test_silver_convergents(self):
        fractions = [c.value for c in convergents(CFNumber.parse("[2;2*]"), 3)[1:]]
        assert fractions == [Fraction(1, 2), Fraction(2, 5), Fraction(5, 12)]

    def test_multiplier_near_one_at_convergents(self, golden):
        qs = [c.q for c in convergents(golden, 12)]
        for k in range(1, 11):
            gap = abs(complex(mpmath.expjpi(2 * qs[k] * GOLDEN)) - 1)
            assert 2 / qs[k + 1] * 0.99 < gap < 2 * math.pi / qs[k + 1]


class TestGaussOrbit:
    def test_golden_is_fixed(self, golden):
        for x in gauss_orbit(golden, 12):
            assert float(x) == pytest.approx(GOLDEN, abs=1e-12)

    def test_period_two(self):
        orbit = gauss_orbit(CFNumber.parse("[;(1,2)*]"), 6)
        evens, odds = {round(float(x), 10) for x in orbit[0::2]}, {round(float(x), 10) for x in orbit[1::2]}
        assert len(evens) == 1 and len(odds) == 1 and evens != odds

    def test_rational_rejected(self):
        with pytest.raises(DomainError):
            gauss_orbit(CFNumber.parse("[2;end]"), 3)


class TestAlpha:
    def test_beyond_prefix_is_golden(self):
        assert float(alpha(CFNumber.parse("[3,7;1*]"), 5)) == pytest.approx(GOLDEN, abs=1e-15)

    def test_bumped_position(self, golden):
        beta = digit_bump(golden, 3, 9)
        assert float(alpha(beta, 3)) == pytest.approx(1 / (9 + GOLDEN), abs=1e-15)

    def test_consecutive_products_below_half(self):
        c = CFNumber.parse("[1,5,1,1,30,2;1*]")
        alphas = [float(a) for a in alpha_sequence(c, 12)]
        assert all(a * b < 0.5 for a, b in zip(alphas, alphas[1:]))


class TestBrjuno:
    def test_golden_tail_is_small(self, golden):
        B = brjuno_B(golden, 30)
        assert math.isfinite(float(B.upper))
        assert float(B.tail_bound.upper) < 1e-5

    def test_lookahead_sums_exact_terms(self, golden):
        B = brjuno_B(golden, 30)
        qs = [c.q for c in convergents(golden, B.terms_used + 1)]
        assert qs[B.terms_used] >= qs[30] ** 2
        direct = sum(math.log(qs[n + 1]) / qs[n] for n in range(B.terms_used))
        assert float(B.partial_sum) == pytest.approx(direct, abs=1e-12)

    def test_remainder_bound_covers_the_tail(self, golden):
        short = brjuno_B(golden, 30, lookahead=False)
        assert short.terms_used == 30
        assert short.lower <= brjuno_B(golden, 30).lower
        assert brjuno_B(golden, 30).upper <= short.upper

    def test_large_digit_jump(self):
        base = brjuno_B(CFNumber.parse("[1,1,1;1*]"), 4, lookahead=False)
        bumped = brjuno_B(CFNumber.parse("[1,1,1,1000000;1*]"), 4, lookahead=False)
        q3 = 3
        jump = float(bumped.partial_sum) - float(base.partial_sum)
        assert jump == pytest.approx(math.log(1_000_000 * q3 + 2) / q3 - math.log(5) / q3, rel=1e-9)

    def test_rational_rejected(self):
        with pytest.raises(DomainError):
            brjuno_B(CFNumber.parse("[2;end]"), 5)


class TestYoccozPhi:
    def test_golden_closed_form(self, golden):
        phi = yoccoz_phi(golden, 1e-10)
        assert abs(float(phi) - math.log(1 / GOLDEN) / (1 - GOLDEN)) < 1e-9
        assert float(phi) == pytest.approx(1.2598, abs=1e-4)

    def test_silver_closed_form(self):
        phi = yoccoz_phi(CFNumber.parse("[2;2*]"), 1e-10)
        assert float(phi) == pytest.approx(math.log(1 / SILVER) / (2 - math.sqrt(2)), abs=1e-9)
        assert float(phi) == pytest.approx(1.5046, abs=1e-4)

    def test_width_within_tolerance(self, golden):
        assert yoccoz_phi(golden, 1e-6).width() <= 1e-6

    def test_bump_of_one_changes_nothing(self, golden):
        beta = digit_bump(golden, 4, 1)
        assert abs(float(yoccoz_phi(beta, 1e-10)) - float(yoccoz_phi(golden, 1e-10))) < 1e-9

    def test_split_adds_up(self, golden):
        minus, one, whole = phi_split(golden, 2, 1e-8)
        assert minus.partial_sum.approx + one.approx == whole.partial_sum.approx
        assert float(one) == pytest.approx(GOLDEN ** 2 * math.log(1 / GOLDEN), abs=1e-10)

    def test_terms_of_golden(self, golden):
        terms = phi_terms(golden, 4)
        assert [float(t) for t in terms] == pytest.approx([GOLDEN ** k * math.log(1 / GOLDEN) for k in range(4)], abs=1e-12)

    def test_rational_rejected(self):
        with pytest.raises(DomainError):
            yoccoz_phi(CFNumber.parse("[2;end]"), 1e-6)


class TestDigitBump:
    def test_construction(self, golden):
        assert digit_bump(golden, 3, 5) == CFNumber((1, 1, 1, 5), Tail.NOBLE)

    def test_inside_prefix_rejected(self):
        with pytest.raises(DomainError):
            digit_bump(CFNumber.parse("[1,2,3;1*]"), 1, 5)

    def test_non_noble_rejected(self):
        with pytest.raises(DomainError):
            digit_bump(CFNumber.parse("[1;2*]"), 3, 5)


class TestCheck4Lems:
    def test_part_two_with_n_one(self):
        parts = check_4lems((1,), 3, 1, 1)
        assert parts[1] is True

    def test_first_index(self):
        assert all(p is not False for p in check_4lems((2, 3), 5, 40, 0))

    def test_parts_outside_range_are_none(self):
        n_plus_m = 0 + 4
        parts = check_4lems((1,), 4, 7, n_plus_m)
        assert parts[0] is True
        assert parts[1:] == (None, None, None)

    def test_index_out_of_range(self):
        with pytest.raises(DomainError):
            check_4lems((1,), 2, 3, 5)


class TestPhiBumpSearch:
    def test_window_and_step_bound(self):
        eps = 0.25
        bump = phi_bump_search((1,), eps)
        base = yoccoz_phi(CFNumber.golden(), eps / 10)
        phi = yoccoz_phi(bump.beta, eps / 10)
        assert float(phi.lower) > float(base.upper) + eps
        assert float(phi.upper) < float(base.lower) + 2 * eps
        steps = [float(b.upper - a.lower) for (_, a), (_, b) in zip(bump.trace, bump.trace[1:])]
        assert all(s < eps for s in steps)
        assert bump.trace[0] == (1, bump.base_phi)
        assert bump.m >= 1

    def test_bad_eps(self):
        with pytest.raises(DomainError):
            phi_bump_search((1,), 0)

    @staticmethod
    def spaced_phi(spacing):
        """Phi that grows by spacing(m) per unit of the digit bumped m places after [1]."""
        def fake(c, tol):
            m, N = len(c.prefix) - 1, c.prefix[-1]
            return PhiValue(PrecisionReal.from_float(spacing(m) * (N - 1)), PrecisionReal(0), 1)
        return fake

    def test_steps_below_eps_are_accepted(self, monkeypatch):
        eps = 0.5
        monkeypatch.setattr("siegel.cf.yoccoz_phi", self.spaced_phi(lambda m: 0.6 * eps))
        bump = phi_bump_search((1,), eps)
        assert (bump.m, bump.N) == (1, 3)
        assert bump.rejected == []

    def test_step_of_eps_moves_on(self, monkeypatch):
        eps = 0.5
        monkeypatch.setattr("siegel.cf.yoccoz_phi", self.spaced_phi(lambda m: eps if m == 1 else 0.6 * eps))
        bump = phi_bump_search((1,), eps)
        assert (bump.m, bump.N) == (2, 3)
        assert bump.rejected == [(1, 2, eps)]


class TestTailSafety:
    def test_small_m0(self):
        assert tail_safety_m0((1,), 1.0) <= 12

    def test_monotone_in_eps(self):
        assert tail_safety_m0((1,), 0.25) >= tail_safety_m0((1,), 1.0)

    def test_bounds_below_half_eps(self):
        eps = 0.5
        m0 = tail_safety_m0((1, 2), eps)
        head, tail = tail_safety_bounds((1, 2), m0)
        assert head < eps / 2 and tail < eps / 2
