import cmath
import copy

import pytest

from siegel.adversary import (
    HardnessSchedule,
    certificate_failures,
    induction_step,
    init_state,
    render_index,
    run_construction,
    simulate_budgeted,
    timeline_rows,
    verify_certificate,
)
from siegel.cf import CFNumber
from siegel.exceptions import Disqualified, DomainError, MalformedCertificate, ResourceExhausted
from siegel.numerics import Ball, BallUnion, Dyadic
from siegel.siegel_disk import QuadraticSiegel, critical_orbit
from siegel.strategies import ConstantOutput, Strategy, build_roster, build_strategy


class ReturnsList(Strategy):
    name = 'returns-list'

    def run(self, oracle, m):
        return []


class KeepsGoing(Strategy):
    """Swallows the budget error and answers anyway."""

    name = 'keeps-going'

    def run(self, oracle, m):
        try:
            oracle.query(oracle.meter.remaining + 5)
        except Exception:
            pass
        return BallUnion((Ball((0, 0), 1),))


def ring_output(count=24, radius=1.5):
    """Balls of radius 1/4 on a circle about 0; the component at 0 has radius above 1."""
    balls = []
    for j in range(count):
        z = radius * cmath.exp(2j * cmath.pi * j / count)
        balls.append(Ball((Dyadic.from_float(z.real).round_frac(20), Dyadic.from_float(z.imag).round_frac(20)),
                          Dyadic(1, -2)))
    return ConstantOutput(balls=BallUnion(tuple(balls)))


@pytest.fixture
def construction(config):
    return run_construction(['always-timeout', 'constant-output'], 2, 'k**2', config)


class TestHardnessSchedule:
    def test_expression(self):
        h = HardnessSchedule('k**2')
        assert [h(k) for k in (1, 2, 13)] == [1, 4, 169]
        assert h.to_spec() == {'expression': 'k**2'}

    def test_table(self):
        h = HardnessSchedule.coerce([1, 3, 7])
        assert h(2) == 3
        with pytest.raises(DomainError):
            h(4)

    @pytest.mark.parametrize("bad", [[3, 3], {'expression': 'k + x'}, '10 - k', 'k**'])
    def test_rejected(self, bad):
        with pytest.raises(DomainError):
            HardnessSchedule.coerce(bad)


def test_render_index():
    assert render_index(1 / 60) == 13
    assert render_index(0.5) == 3


class TestSimulate:
    def test_always_timeout(self, golden):
        outcome = simulate_budgeted('always-timeout', golden, 5, 100)
        assert outcome.timed_out and outcome.output is None
        assert outcome.read_log == ()
        assert outcome.m0 == len(golden.prefix)

    def test_orbit_sketch_reads(self, golden):
        outcome = simulate_budgeted({'name': 'orbit-sketch', 'points': 16}, golden, 5, 1000)
        assert outcome.read_log == (52,)
        assert outcome.work_used == 52 + 16
        assert outcome.produced_output
        assert outcome.m0 > 20

    def test_reads_fix_the_digits(self, golden):
        outcome = simulate_budgeted('orbit-sketch', golden, 5, 1000)
        longer = CFNumber.noble((1,) * outcome.m0 + (5,))
        assert simulate_budgeted('orbit-sketch', longer, 5, 1000).signature() == outcome.signature()

    def test_output_must_be_ball_union(self, golden):
        with pytest.raises(Disqualified):
            simulate_budgeted(ReturnsList(), golden, 3, 100)

    def test_output_after_timeout(self, golden):
        with pytest.raises(Disqualified):
            simulate_budgeted(KeepsGoing(), golden, 3, 100)

    def test_bad_arguments(self, golden):
        with pytest.raises(DomainError):
            simulate_budgeted('always-timeout', golden, 3, 0)
        with pytest.raises(DomainError):
            simulate_budgeted('always-timeout', CFNumber.parse("[1;2*]"), 3, 10)


class TestInductionStep:
    def test_initial_state(self, config, golden_radius):
        st = init_state(config)
        assert st.I == (1,)
        assert st.r == pytest.approx(float(golden_radius.value))
        assert st.l == st.r / 2 and st.ell == st.r - st.l

    def test_timeout_is_case_one(self, config):
        st = init_state(config)
        nxt = induction_step(st, 'always-timeout', 'k**2', config)
        cert = nxt.certificate_log[-1]
        assert cert['case'] == '1'
        assert cert['reads'] == []
        assert nxt.r == st.r
        assert nxt.ell == pytest.approx(st.ell / 20)
        assert nxt.l == pytest.approx(st.r - nxt.ell)
        assert nxt.I[:1] == (1,) and set(nxt.I) == {1}

    def test_honest_renderer_gives_up(self, config):
        nxt = induction_step(init_state(config), 'honest-bounded-renderer', 'k**2', config)
        cert = nxt.certificate_log[-1]
        assert cert['case'] == '1'
        assert cert['output'] is None and not cert['timed_out']

    def test_ball_over_zero_is_case_2a(self, config):
        st = init_state(config)
        nxt = induction_step(st, 'constant-output', 'k**2', config)
        cert = nxt.certificate_log[-1]
        assert cert['case'] == '2a'
        assert cert['r_S'] == 0.0
        assert cert['separation'] > 8 * cert['ell']
        assert nxt.r == st.r
        assert nxt.phi_floor > st.phi_floor - 1

    def test_ring_above_the_interval_is_case_2b(self, config):
        st = init_state(config)
        nxt = induction_step(st, ring_output(), 'k**2', config)
        cert = nxt.certificate_log[-1]
        assert cert['case'] == '2b'
        assert cert['r_S'] > st.r + 8 * cert['ell']
        assert cert['bump'] is None
        assert nxt.r == st.r
        assert cert['separation'] > 8 * cert['ell']

    def test_strict_radius_policy(self, config):
        config['require_certified_radius'] = True
        with pytest.raises(ResourceExhausted):
            init_state(config)

    @pytest.mark.slow
    def test_orbit_balls_force_a_bump(self, config, golden):
        centers = critical_orbit(QuadraticSiegel(golden), 1000, 53).centers()
        radius = Dyadic(1, -6)
        balls = BallUnion(tuple(Ball((Dyadic.from_float(z.real).round_frac(20),
                                      Dyadic.from_float(z.imag).round_frac(20)), radius) for z in centers))
        st = init_state(config)
        nxt = induction_step(st, ConstantOutput(balls=balls), 'k**2', config)
        cert = nxt.certificate_log[-1]
        ell = cert['ell']
        assert cert['case'] == '2b'
        assert cert['bump'] is not None
        assert nxt.r < cert['r_S'] - 8 * ell
        assert st.l <= nxt.l < nxt.r <= st.r
        assert cert['r_tol'] == max(ell / 10, 1e-6)


class TestConstruction:
    def test_roster_is_cycled(self, construction):
        gamma, doc = construction
        assert [s['case'] for s in doc['steps']] == ['1', '2a']
        assert [s['strategy']['name'] for s in doc['steps']] == ['always-timeout', 'constant-output']
        assert gamma == CFNumber.noble(tuple(doc['prefix']))

    def test_checks_pass(self, construction):
        _, doc = construction
        assert all(doc['checks'].values())
        assert len(doc['phi_logr']) == 2

    def test_verify(self, construction, config):
        _, doc = construction
        assert verify_certificate(doc, config)

    def test_tampered_radius_fails(self, construction, config):
        _, doc = construction
        bad = copy.deepcopy(doc)
        bad['steps'][0]['r'] += 1e-3
        failures = certificate_failures(bad, config)
        assert any('recorded r' in f for f in failures)
        assert not verify_certificate(bad, config)

    def test_missing_field(self, construction):
        _, doc = construction
        bad = copy.deepcopy(doc)
        del bad['steps'][1]['reads']
        with pytest.raises(MalformedCertificate):
            certificate_failures(bad)

    def test_idempotent(self, construction, config):
        assert run_construction(['always-timeout', 'constant-output'], 2, 'k**2', config) == construction

    def test_timeline(self, construction):
        rows = timeline_rows(construction[1])
        assert [r['step'] for r in rows] == [0, 1, 2]
        assert rows[0]['case'] == 'init'
        assert [r['ell'] for r in rows] == sorted((r['ell'] for r in rows), reverse=True)

    def test_partial_document_on_error(self, config):
        with pytest.raises(Disqualified) as info:
            run_construction(['always-timeout', ReturnsList()], 2, 'k**2', config)
        assert len(info.value.certificates['steps']) == 1

    def test_every_case_verifies(self, config):
        roster = ['always-timeout', 'constant-output', ring_output()]
        _, doc = run_construction(roster, 3, 'k**2', config)
        assert [s['case'] for s in doc['steps']] == ['1', '2a', '2b']
        assert all(doc['checks'].values())
        assert certificate_failures(doc, config) == []
        for cut in range(1, 4):
            partial = dict(doc, steps=doc['steps'][:cut])
            assert verify_certificate(partial, config)

    def test_negative_steps(self, config):
        with pytest.raises(DomainError):
            run_construction(['always-timeout'], -1, 'k**2', config)


class TestStrategies:
    def test_specs(self):
        assert build_strategy({'name': 'orbit-sketch', 'points': 8}).to_spec() == \
            {'name': 'orbit-sketch', 'points': 8, 'radius_exp': 6}
        assert build_strategy('constant-output').to_spec() == {'name': 'constant-output', 'radius_exp': 8}

    def test_spec_rebuilds(self):
        custom = ConstantOutput(balls=BallUnion((Ball((1, 0), Dyadic(1, -3)),)))
        assert build_strategy(custom.to_spec()).balls == custom.balls

    @pytest.mark.parametrize("spec", ['nope', {'name': 'orbit-sketch', 'colour': 'red'}])
    def test_unknown(self, spec):
        with pytest.raises(DomainError):
            build_strategy(spec)

    def test_empty_roster(self):
        with pytest.raises(DomainError):
            build_roster([])
