from fractions import Fraction

import mpmath
import pytest

from siegel.cf import CFNumber
from siegel.exceptions import BudgetExhausted, DomainError, PrecisionExhausted
from siegel.numerics import (
    Ball,
    BallUnion,
    Dyadic,
    MeteredOracle,
    Oracle,
    PrecisionReal,
    WorkMeter,
    ceil_log2,
    hausdorff_distance,
    koebe_inscribed_bound,
    oracle_query,
)


class TestDyadic:
    def test_canonical_form(self):
        d = Dyadic(12, -4)
        assert (d.mantissa, d.exponent) == (3, -2)
        assert Dyadic(0, 17) == Dyadic(0, 0)

    def test_arithmetic_is_exact(self):
        assert Dyadic(3, -1) + Dyadic(1, -2) == Dyadic(7, -2)
        assert Dyadic(3, -1) * Dyadic(3, -1) == Dyadic(9, -2)
        assert Dyadic(1, -3) - Dyadic(1, -2) == Dyadic(-1, -3)

    def test_string_form_parses_back(self):
        d = Dyadic(-13, -9)
        assert str(d) == "-13*2^-9"
        assert Dyadic.parse(str(d)) == d

    def test_malformed_string(self):
        with pytest.raises(DomainError):
            Dyadic.parse("0.5")

    @pytest.mark.parametrize("mode,expected", [
        ("floor", Dyadic(1, -1)),
        ("ceil", Dyadic(1, 0)),
        ("nearest", Dyadic(1, -1)),
    ])
    def test_round_frac(self, mode, expected):
        assert Dyadic(5, -3).round_frac(1, mode) == expected

    def test_non_dyadic_fraction_rejected(self):
        with pytest.raises(DomainError):
            Dyadic.from_fraction(Fraction(1, 3))

    def test_ordering(self):
        assert Dyadic(1, -2) < Dyadic(1, -1)
        assert Dyadic(3, 0) >= 3

    def test_from_mpf_keeps_sign(self):
        assert Dyadic.from_mpf(mpmath.mpf(-0.75)) == Dyadic(-3, -2)
        assert Dyadic.from_mpf(mpmath.mpf(0)) == Dyadic(0, 0)

    def test_from_mpf_keeps_working_precision(self):
        with mpmath.workprec(200):
            third = mpmath.mpf(1) / 3
        d = Dyadic.from_mpf(third)
        assert abs(d.mantissa).bit_length() > 150
        assert abs(d.to_fraction() - Fraction(1, 3)) < Fraction(1, 2 ** 195)

    def test_from_mpf_rejects_infinity(self):
        with pytest.raises(PrecisionExhausted):
            Dyadic.from_mpf(mpmath.inf)


class TestPrecisionReal:
    def test_fraction_enclosure(self):
        x = PrecisionReal.from_fraction(Fraction(1, 3), 64)
        assert x.contains(Fraction(1, 3))
        assert float(x.width) < 2.0 ** -60

    def test_log_and_exp_enclose(self):
        two = PrecisionReal(Dyadic(2))
        log2 = two.log(64)
        e = PrecisionReal(Dyadic(1)).exp(64)
        with mpmath.workprec(200):
            assert log2.lower.to_mpf() <= mpmath.log(2) <= log2.upper.to_mpf()
            assert e.lower.to_mpf() <= mpmath.e <= e.upper.to_mpf()

    def test_log_below_one_is_negative(self):
        g = PrecisionReal.from_fraction(Fraction(618034, 1000000), 64)
        log_g = g.log(64)
        assert log_g.upper < 0
        with mpmath.workprec(200):
            exact = mpmath.log(mpmath.mpf(618034) / 1000000)
            assert log_g.lower.to_mpf() <= exact <= log_g.upper.to_mpf()
        assert float(log_g.error_radius) > 0

    def test_reciprocal_of_zero_enclosure(self):
        with pytest.raises(DomainError):
            PrecisionReal(Dyadic(0), Dyadic(1, -4)).reciprocal()

    def test_division_contains_quotient(self):
        q = PrecisionReal(Dyadic(1)).div(PrecisionReal(Dyadic(3)), 64)
        assert q.contains(Fraction(1, 3))

    def test_rounded_keeps_value(self):
        x = PrecisionReal(Dyadic((1 << 100) + 1, -100))
        assert x.rounded(32).contains(x.approx)


class TestOracle:
    def test_dyadic_oracle_returns_itself(self):
        o = Oracle.from_fraction(Fraction(3, 8))
        assert o.query(0) == Dyadic(3, -3)
        assert o.query(40) == Dyadic(3, -3)

    def test_third_within_bound(self):
        o = Oracle.from_fraction(Fraction(1, 3))
        for n in (2, 10, 64):
            answer = oracle_query(o, n)
            assert abs(answer.to_fraction() - Fraction(1, 3)) < Fraction(1, 2 ** n)
        assert o.read_log == (2, 10, 64)
        assert o.max_position == 64

    def test_golden_at_four_bits(self, golden):
        answer = Oracle.from_cf(golden).query(4)
        assert answer == Dyadic(5, -3)

    def test_golden_high_precision(self, golden):
        answer = Oracle.from_cf(golden).query(120)
        with mpmath.workprec(300):
            g = (mpmath.sqrt(5) - 1) / 2
            assert abs(answer.to_mpf() - g) < mpmath.mpf(2) ** -120

    def test_answers_are_deterministic(self, golden):
        a, b = Oracle.from_cf(golden), Oracle.from_cf(CFNumber.parse("[1,1,1;1*]"))
        assert [a.query(n) for n in range(30)] == [b.query(n) for n in range(30)]

    def test_negative_position(self):
        with pytest.raises(DomainError):
            Oracle.from_fraction(Fraction(1, 2)).query(-1)


class TestWorkMeter:
    def test_overrun_raises(self):
        meter = WorkMeter(10)
        meter.charge(7)
        with pytest.raises(BudgetExhausted):
            meter.charge(4)
        assert meter.exhausted
        assert meter.remaining == 0

    def test_metered_oracle_charges_position(self, golden):
        meter = WorkMeter(100)
        oracle = MeteredOracle(Oracle.from_cf(golden), meter)
        oracle.query(12)
        oracle.query(0)
        assert meter.used == 13
        assert oracle.read_log == (12, 0)

    def test_negative_budget(self):
        with pytest.raises(DomainError):
            WorkMeter(-1)


class TestBalls:
    def test_text_form(self):
        union = BallUnion((Ball((Dyadic(1, -3), Dyadic(-5, -4)), Dyadic(1, -6)),
                           Ball((0, 0), Dyadic(1, -2))))
        text = union.to_text(header=["# config: {}", "# version: 0.1"])
        assert text.splitlines()[2] == "1*2^-3 -5*2^-4 1*2^-6"
        assert BallUnion.from_text(text) == union

    def test_empty_union(self):
        assert BallUnion().is_empty()
        assert BallUnion.from_text("# only a header\n").is_empty()


class TestHausdorff:
    def test_identical_unions(self):
        unit = BallUnion((Ball((0, 0), 1),))
        assert hausdorff_distance(unit, unit).approx == 0

    def test_two_singletons(self):
        d = hausdorff_distance([0j], [1 + 0j])
        assert d.contains(1)

    def test_nested_balls(self):
        big = BallUnion((Ball((0, 0), 1),))
        small = BallUnion((Ball((0, 0), Dyadic(1, -1)),))
        d = hausdorff_distance(big, small)
        assert d.contains(Fraction(1, 2))
        assert float(d.width) <= 0.2

    def test_empty_input(self):
        with pytest.raises(DomainError):
            hausdorff_distance([], [0j])


@pytest.mark.parametrize("r,expected", [(1, Fraction(1, 4)), (0, 0), (2, Fraction(1, 2))])
def test_koebe_inscribed_bound(r, expected):
    assert koebe_inscribed_bound(r).approx.to_fraction() == expected


@pytest.mark.parametrize("x,k", [(1, 0), (3, 2), (4, 2), (0.25, -2), (0.3, -1)])
def test_ceil_log2(x, k):
    assert ceil_log2(x) == k
