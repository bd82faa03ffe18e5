#!/usr/bin/env python3
"""
Adversary Module

This module runs the inductive construction of a hard rotation number
against a finite roster of bounded-budget rendering strategies.

State i holds a committed digit prefix I_i (gamma_i = [I_i, 1, 1, ...]), an
interval [l_i, r_i] with r_i = r(gamma_i), and a scale ell_i = r_i - l_i.
Each step sets ell_{i+1} = ell_i / 20, gives the next strategy the work
budget h(2 ceil(-log2 ell_{i+1}) + 1) on gamma_i and then:

- Case 1 (no usable output): commit the digits the strategy's oracle reads
  depend on and keep gamma; the interval shrinks to its top.
- Case 2a (r_i - ell > r(S) + 8 ell): as Case 1.
- Case 2b (l_i + 2 ell < r(S) - 8 ell): bump a digit past the committed
  prefix so that r(gamma_{i+1}) drops below r(S) - 8 ell.

Every step then appends ones so that all later tails keep Phi within 2^-i of
its current value, and replays the strategy on gamma_{i+1} to confirm it is
fooled. Each step leaves a certificate entry; verify_certificate recomputes
all of them.

Usage:
    gamma, certificates = run_construction(['always-timeout'], 1, HardnessSchedule('k**2'))
    assert verify_certificate(certificates)
"""

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Optional, Tuple

import sympy

from . import __version__
from .cf import CFNumber, convergent_pairs, tail_safety_m0, yoccoz_phi
from .configure import load_config
from .exceptions import (BudgetExhausted, Disqualified, DomainError, InvariantViolation, MalformedCertificate,
                         SiegelError)
from .numerics import BallUnion, Dyadic, MeteredOracle, Oracle, WorkMeter, ceil_log2
from .siegel_disk import _safe_ball_union_radius, radius_bump_search, require_radius, siegel_radius
from .strategies import Strategy, build_roster, build_strategy

logger = logging.getLogger(__name__)

ELL_RATIO = 20
SEPARATION = 8
PHI_TOL = 1e-8
INIT_RADIUS_TOL = 1e-3
FLOAT_SLACK = 1e-12

__all__ = ['Strategy', 'build_strategy', 'HardnessSchedule', 'AdversaryState', 'SimulationOutcome',
           'init_state', 'simulate_budgeted', 'induction_step', 'run_construction',
           'verify_certificate', 'certificate_failures', 'timeline_rows']


class HardnessSchedule:
    """
    A strictly increasing map h on the naturals.

    Given either as a closed-form expression in k (parsed with sympy, e.g.
    'k**2') or as an explicit table {k: h(k)}.

    Raises:
        DomainError: For unparsable expressions, free symbols other than k,
            or a schedule that is not strictly increasing
    """

    CHECK_RANGE = 64

    def __init__(self, expression=None, table=None):
        if (expression is None) == (table is None):
            raise DomainError("A hardness schedule needs exactly one of an expression or a table")
        self.expression = expression
        self.table = None
        self._expr = None
        self._k = sympy.Symbol('k', integer=True, positive=True)
        if expression is not None:
            try:
                self._expr = sympy.sympify(expression, locals={'k': self._k})
            except (sympy.SympifyError, TypeError, SyntaxError) as e:
                raise DomainError(f"Cannot parse hardness expression {expression!r}: {e}")
            extra = self._expr.free_symbols - {self._k}
            if extra:
                raise DomainError(f"Hardness expression {expression!r} uses unknown symbols {sorted(map(str, extra))}",
                                  hint="Write it in the single variable k.")
            domain = range(1, self.CHECK_RANGE + 1)
        else:
            if isinstance(table, (list, tuple)):
                table = {i + 1: v for i, v in enumerate(table)}
            self.table = {int(k): int(v) for k, v in table.items()}
            domain = sorted(self.table)
        values = [self(k) for k in domain]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DomainError(f"Hardness schedule {self.to_spec()!r} is not strictly increasing")

    @classmethod
    def coerce(cls, value):
        if isinstance(value, HardnessSchedule):
            return value
        if isinstance(value, str):
            return cls(expression=value)
        if isinstance(value, dict) and set(value) == {'expression'}:
            return cls(expression=value['expression'])
        if isinstance(value, dict) and set(value) == {'table'}:
            return cls(table=value['table'])
        if isinstance(value, (dict, list, tuple)):
            return cls(table=value)
        raise DomainError(f"Cannot use {value!r} as a hardness schedule")

    def __call__(self, k):
        k = int(k)
        if self.table is not None:
            if k not in self.table:
                raise DomainError(f"Hardness table has no entry for k={k}",
                                  hint="Extend the table or use an expression such as k**2.")
            return self.table[k]
        value = self._expr.subs(self._k, k)
        return int(sympy.floor(value))

    def to_spec(self):
        if self.table is not None:
            return {'table': {str(k): v for k, v in sorted(self.table.items())}}
        return {'expression': str(self.expression)}


@dataclass(frozen=True)
class AdversaryState:
    """
    Attributes:
        I (tuple): Committed digit prefix
        l (float): Lower end of the interval
        r (float): r(gamma_i), upper end of the interval
        ell (float): Scale, r - l
        phi_floor (float): Phi(gamma_i)
        step (int): i
        certificate_log (tuple): Step certificates so far
        r_tol (float): Tolerance r was computed with
    """

    I: Tuple[int, ...]
    l: float
    r: float
    ell: float
    phi_floor: float
    step: int = 0
    certificate_log: Tuple[dict, ...] = ()
    r_tol: float = INIT_RADIUS_TOL

    @property
    def gamma(self):
        return CFNumber.noble(self.I)


@dataclass
class SimulationOutcome:
    """
    Attributes:
        output (BallUnion or None): The strategy's rendering, None on timeout or give-up
        timed_out (bool): The meter refused a charge
        work_used (int): Units consumed
        read_log (tuple): Oracle positions in query order
        answers (dict): Position -> Dyadic answer
        m0 (int): Digits of gamma that determine every answer
    """

    output: Optional[BallUnion]
    timed_out: bool
    work_used: int
    read_log: Tuple[int, ...] = ()
    answers: Dict[int, Dyadic] = field(default_factory=dict)
    m0: int = 0

    @property
    def max_position(self):
        return max(self.read_log) if self.read_log else None

    @property
    def produced_output(self):
        return self.output is not None and not self.output.is_empty()

    def signature(self):
        """What the strategy observably did: output, timeout and reads."""
        return {
            'output': self.output.to_text() if self.output is not None else None,
            'timed_out': self.timed_out,
            'reads': list(self.read_log),
            'answers': {str(n): str(a) for n, a in sorted(self.answers.items())},
        }


def _rounds_to(x, n, answer):
    bits = n + 2
    return Dyadic(round(x * (Fraction(2) ** bits)), -bits) == answer


def read_determination_index(prefix, answers):
    """
    Smallest M >= len(prefix) such that every number whose first M digits are
    those of [prefix, 1, 1, ...] answers each recorded query identically.

    Rounding to nearest is monotone, so it suffices that both endpoints of
    the cylinder, p_M/q_M and (p_M + p_{M-1})/(q_M + q_{M-1}), round to the
    recorded answers.
    """
    digits = list(prefix)
    if not answers:
        return len(digits)
    limit = len(digits) + 4 * (max(answers) + 16)
    while len(digits) <= limit:
        p, q, p_prev, q_prev = convergent_pairs(digits)
        lo, hi = Fraction(p, q), Fraction(p + p_prev, q + q_prev)
        if all(_rounds_to(lo, n, a) and _rounds_to(hi, n, a) for n, a in answers.items()):
            return len(digits)
        digits.append(1)
    raise InvariantViolation(f"Oracle answers at positions {sorted(answers)} are not determined "
                             f"by {limit} digits of the noble number")


def simulate_budgeted(s, gamma, m, T):
    """
    Run strategy s on a metered oracle for gamma with T work units.

    Returns:
        SimulationOutcome: output or timeout, reads and m0

    Raises:
        DomainError: For T < 1 or a non-noble gamma
        Disqualified: If the strategy returns output after its meter ran out,
            returns something other than a BallUnion, or overruns T
    """
    if T < 1:
        raise DomainError(f"Work budget must be at least 1, got {T}")
    if not gamma.is_noble():
        raise DomainError(f"The adversary plays on noble numbers, got {gamma.literal()}")
    s = build_strategy(s)
    meter = WorkMeter(T)
    base = Oracle.from_cf(gamma)
    oracle = MeteredOracle(base, meter)
    timed_out = False
    try:
        output = s.run(oracle, m)
    except BudgetExhausted:
        output, timed_out = None, True
    if output is not None:
        if not isinstance(output, BallUnion):
            raise Disqualified(f"Strategy {s.name} returned {type(output).__name__}, not a BallUnion")
        if meter.exhausted:
            raise Disqualified(f"Strategy {s.name} produced output after exhausting its {T} work units")
    if meter.used > T:
        raise Disqualified(f"Strategy {s.name} used {meter.used} units of {T}")
    answers = {n: base.answer(n) for n in set(oracle.read_log)}
    m0 = read_determination_index(gamma.prefix, answers)
    logger.debug(f"simulate: {s.name} on {gamma.literal()} m={m} T={T}: "
                 f"{'timeout' if timed_out else 'output' if output is not None else 'no output'}, "
                 f"work {meter.used}, reads {oracle.read_log}")
    return SimulationOutcome(output, timed_out, meter.used, oracle.read_log, answers, m0)


def init_state(config=None):
    """
    Step 0: I = [1], r = r(golden), l = r/2, ell = r - l.

    Raises:
        InvariantViolation: If r is not in (0, 2)
        ResourceExhausted: If require_certified_radius is set and r is not certified
    """
    config = config or load_config()
    gamma = CFNumber.golden()
    r = float(require_radius(gamma, INIT_RADIUS_TOL, config).value)
    if not 0 < r < 2:
        raise InvariantViolation(f"r(golden) = {r} outside (0, 2)")
    l = r / 2
    phi = float(yoccoz_phi(gamma, PHI_TOL))
    logger.info(f"adversary: initial r={r:.8f}, l={l:.8f}, Phi={phi:.8f}")
    return AdversaryState(gamma.prefix, l, r, r - l, phi, 0, (), INIT_RADIUS_TOL)


def render_index(ell):
    """2 ceil(-log2 ell) + 1."""
    return 2 * ceil_log2(1 / ell) + 1


def _separation(l, r, r_S):
    """Signed gap between [l, r] and the point r_S (negative if r_S lies inside)."""
    return max(l - r_S, r_S - r)


def induction_step(st, s, h, config=None):
    """
    One step of the construction against strategy s.

    Returns:
        AdversaryState: The state at step i+1, with its certificate appended

    Raises:
        InvariantViolation: If neither subcase applies or a proven property fails
        Disqualified: If the strategy breaks its contract
    """
    config = config or load_config()
    h = HardnessSchedule.coerce(h)
    s = build_strategy(s)
    i = st.step
    ell = st.ell / ELL_RATIO
    k = render_index(ell)
    T = h(k)
    gamma = st.gamma
    outcome = simulate_budgeted(s, gamma, k, T)
    prefix = st.I + (1,) * (max(outcome.m0, len(st.I)) - len(st.I))
    r, r_tol, r_S, bump = st.r, st.r_tol, None, None
    band = None

    if not outcome.produced_output:
        case = '1'
    else:
        r_S = _safe_ball_union_radius(outcome.output, config)
        band = (r_S - SEPARATION * ell, r_S + SEPARATION * ell)
        if st.r - ell > band[1]:
            case = '2a'
        elif st.l + 2 * ell < band[0]:
            case = '2b'
            if st.r >= band[0]:
                drop = (st.r - band[0], st.r - st.l - ell)
                bump = radius_bump_search(prefix, 1, ell, drop_range=drop, config=config)
                prefix = bump.beta.prefix
                r = float(bump.radius.value)
                r_tol = max(ell / 10, 1e-6)
        else:
            raise InvariantViolation(f"Step {i}: neither subcase applies (r={st.r:.8g}, l={st.l:.8g}, "
                                     f"r(S)={r_S:.8g}, ell={ell:.3g})")
    l = r - ell
    logger.info(f"adversary step {i}: {s.name} case {case}, work {outcome.work_used}/{T}, "
                f"r={r:.8f}" + (f", r(S)={r_S:.6f}" if r_S is not None else ""))

    slack = 2.0 ** -i
    tail_ones = tail_safety_m0(prefix, slack) - 1
    prefix = prefix + (1,) * tail_ones
    phi = float(yoccoz_phi(CFNumber.noble(prefix), PHI_TOL))

    if not (st.l - FLOAT_SLACK <= l < r <= st.r + FLOAT_SLACK):
        raise InvariantViolation(f"Step {i}: interval [{l}, {r}] not nested in [{st.l}, {st.r}]")
    if not phi > st.phi_floor - slack:
        raise InvariantViolation(f"Step {i}: Phi dropped from {st.phi_floor} to {phi}")
    separation = _separation(l, r, r_S) if r_S is not None else None
    if separation is not None and separation <= SEPARATION * ell - FLOAT_SLACK:
        raise InvariantViolation(f"Step {i}: separation {separation:.3g} below {SEPARATION} ell")
    replay = simulate_budgeted(s, CFNumber.noble(prefix), k, T)
    if replay.signature() != outcome.signature():
        raise InvariantViolation(f"Step {i}: strategy {s.name} distinguishes gamma_i from gamma_(i+1)")

    certificate = {
        'step': i,
        'strategy': s.to_spec(),
        'case': case,
        'k': k,
        'T': T,
        'work_used': outcome.work_used,
        'timed_out': outcome.timed_out,
        'reads': list(outcome.read_log),
        'answers': {str(n): str(a) for n, a in sorted(outcome.answers.items())},
        'm0': outcome.m0,
        'output': outcome.output.to_text() if outcome.output is not None else None,
        'prefix_before': list(st.I),
        'prefix_after': list(prefix),
        'tail_ones': tail_ones,
        'l_before': st.l,
        'r_before': st.r,
        'ell_before': st.ell,
        'ell': ell,
        'l': l,
        'r': r,
        'r_tol': r_tol,
        'r_S': r_S,
        'excluded_band': list(band) if band is not None else None,
        'separation': separation,
        'bump': ({'m': bump.m, 'N': bump.N, 'drop': bump.drop, 'certified': bump.radius.certified}
                 if bump is not None else None),
        'phi_before': st.phi_floor,
        'phi': phi,
        'phi_slack': slack,
        'accuracy': {'ell_sq_half': ell * ell / 2, 'ell_next_sq': ell * ell},
        'fooled': True,
    }
    return replace(st, I=tuple(prefix), l=l, r=r, ell=ell, phi_floor=phi, step=i + 1,
                   certificate_log=st.certificate_log + (certificate,), r_tol=r_tol)


def _initial_entry(st):
    return {'prefix': list(st.I), 'l': st.l, 'r': st.r, 'ell': st.ell, 'phi': st.phi_floor, 'r_tol': st.r_tol}


def _construction_checks(doc):
    initial, steps = doc['initial'], doc['steps']
    ells = [initial['ell']] + [s['ell'] for s in steps]
    ks = [s['k'] for s in steps]
    checks = {
        'nested': all(b['l'] >= a['l'] - FLOAT_SLACK and b['r'] <= a['r'] + FLOAT_SLACK
                      for a, b in zip([initial] + steps, steps)),
        'ell_schedule': all(math.isclose(e, ells[0] / ELL_RATIO ** i, rel_tol=1e-9) for i, e in enumerate(ells)),
        'k_increasing': all(b > a for a, b in zip(ks, ks[1:])),
        'phi_slack': all(s['phi'] > s['phi_before'] - s['phi_slack'] for s in steps),
        'budget': all(s['work_used'] <= s['T'] for s in steps),
        'phi_logr_finite': all(math.isfinite(s['phi'] + math.log(s['r'])) for s in steps),
    }
    return checks


def run_construction(roster, steps, h, config=None):
    """
    Run `steps` induction steps, cycling through the roster.

    Returns:
        tuple: (CFNumber gamma_steps, certificate document)

    Raises:
        SiegelError: Step errors propagate with the partial document attached
            as the `certificates` attribute
        InvariantViolation: If a construction-level check fails
    """
    config = config or load_config()
    roster = build_roster(roster)
    h = HardnessSchedule.coerce(h)
    if steps < 0:
        raise DomainError(f"Step count must be non-negative, got {steps}")
    st = init_state(config)
    doc = {
        'version': __version__,
        'config': config,
        'hardness': h.to_spec(),
        'roster': [s.to_spec() for s in roster],
        'initial': _initial_entry(st),
        'steps': [],
    }
    for i in range(steps):
        strategy = roster[i % len(roster)]
        try:
            st = induction_step(st, strategy, h, config)
        except SiegelError as e:
            logger.error(f"adversary: step {i} aborted: {e}")
            e.certificates = doc
            raise
        doc['steps'] = list(st.certificate_log)
    doc['prefix'] = list(st.I)
    doc['phi_logr'] = [s['phi'] + math.log(s['r']) for s in doc['steps']]
    doc['checks'] = _construction_checks(doc)
    failed = [name for name, ok in doc['checks'].items() if not ok]
    if failed:
        error = InvariantViolation(f"Construction checks failed: {', '.join(failed)}")
        error.certificates = doc
        raise error
    logger.info(f"adversary: {steps} steps done, prefix length {len(st.I)}")
    return CFNumber.noble(st.I), doc


STEP_FIELDS = ('step', 'case', 'k', 'T', 'work_used', 'prefix_before', 'prefix_after', 'ell', 'l', 'r',
               'r_tol', 'r_S', 'phi', 'phi_before', 'phi_slack', 'output', 'reads', 'answers', 'timed_out')


def _close(a, b):
    return abs(a - b) <= FLOAT_SLACK * max(1.0, abs(a), abs(b))


def certificate_failures(cert, config=None):
    """
    Recompute every recorded quantity of a certificate document.

    Returns:
        list[str]: Descriptions of the failed checks (empty when valid)

    Raises:
        MalformedCertificate: If required fields are missing
    """
    if not isinstance(cert, dict):
        raise MalformedCertificate(f"Certificate must be a JSON object, got {type(cert).__name__}")
    for key in ('initial', 'steps', 'hardness', 'roster'):
        if key not in cert:
            raise MalformedCertificate(f"Certificate is missing '{key}'")
    for entry in cert['steps']:
        missing = [f for f in STEP_FIELDS if f not in entry]
        if missing:
            raise MalformedCertificate(f"Step entry is missing {', '.join(missing)}")
    config = cert.get('config') or config or load_config()
    h = HardnessSchedule.coerce(cert['hardness'])
    roster = build_roster(cert['roster'])
    failures = []

    def check(ok, what):
        if not ok:
            failures.append(what)
            logger.warning(f"verify: {what}")

    initial = cert['initial']
    r0 = float(siegel_radius(CFNumber.noble(initial['prefix']), initial['r_tol'], config).value)
    check(_close(r0, initial['r']), f"initial r {initial['r']} != recomputed {r0}")
    check(initial['l'] == initial['r'] / 2 and initial['ell'] == initial['r'] - initial['l'],
          "initial l, ell do not satisfy l = r/2, ell = r - l")
    prev = initial
    prev_k = None
    for idx, step in enumerate(cert['steps']):
        i = step['step']
        tag = f"step {i}"
        check(i == idx, f"{tag}: out of order")
        ell = step['ell']
        check(_close(ell, prev['ell'] / ELL_RATIO), f"{tag}: ell != previous ell / {ELL_RATIO}")
        k = render_index(ell)
        check(step['k'] == k, f"{tag}: k={step['k']} != {k}")
        check(prev_k is None or k > prev_k, f"{tag}: k not increasing")
        check(step['T'] == h(k), f"{tag}: T={step['T']} != h({k})")
        check(step['work_used'] <= step['T'], f"{tag}: work {step['work_used']} exceeds T")
        before, after = tuple(step['prefix_before']), tuple(step['prefix_after'])
        check(list(before) == list(prev['prefix'] if idx == 0 else prev['prefix_after']),
              f"{tag}: prefix_before does not continue the previous prefix")
        check(after[:len(before)] == before, f"{tag}: prefix_after does not extend prefix_before")

        r = float(siegel_radius(CFNumber.noble(after), step['r_tol'], config).value)
        check(_close(r, step['r']), f"{tag}: recorded r {step['r']} != recomputed {r}")
        check(_close(step['l'], step['r'] - ell), f"{tag}: l != r - ell")
        check(step['l'] >= prev['l'] - FLOAT_SLACK and step['r'] <= prev['r'] + FLOAT_SLACK,
              f"{tag}: interval not nested")
        phi = float(yoccoz_phi(CFNumber.noble(after), PHI_TOL))
        check(abs(phi - step['phi']) <= 4 * PHI_TOL, f"{tag}: recorded Phi {step['phi']} != recomputed {phi}")
        check(phi > prev['phi'] - step['phi_slack'], f"{tag}: Phi dropped beyond the slack")

        strategy = roster[idx % len(roster)]
        first = simulate_budgeted(strategy, CFNumber.noble(before), k, step['T'])
        replay = simulate_budgeted(strategy, CFNumber.noble(after), k, step['T'])
        recorded = {'output': step['output'], 'timed_out': step['timed_out'], 'reads': step['reads'],
                    'answers': step['answers']}
        check(first.signature() == recorded, f"{tag}: strategy outcome differs from the record")
        check(replay.signature() == recorded, f"{tag}: strategy distinguishes gamma_i from gamma_(i+1)")

        case = step['case']
        if case == '1':
            check(not first.produced_output, f"{tag}: case 1 recorded for a strategy with output")
            check(_close(step['r'], prev['r']), f"{tag}: case 1 changed r")
        else:
            r_S = _safe_ball_union_radius(BallUnion.from_text(step['output']), config)
            check(step['r_S'] is not None and _close(r_S, step['r_S']),
                  f"{tag}: recorded r(S) {step['r_S']} != recomputed {r_S}")
            if case == '2a':
                check(prev['r'] - ell > r_S + SEPARATION * ell, f"{tag}: case 2a inequality fails")
            elif case == '2b':
                check(prev['l'] + 2 * ell < r_S - SEPARATION * ell, f"{tag}: case 2b inequality fails")
                check(step['r'] < r_S - SEPARATION * ell, f"{tag}: 2b radius not below r(S) - 8 ell")
            else:
                check(False, f"{tag}: unknown case {case!r}")
            check(_separation(step['l'], step['r'], r_S) > SEPARATION * ell - FLOAT_SLACK,
                  f"{tag}: interval meets the excluded band about r(S)")
        prev = step
        prev_k = k
    return failures


def verify_certificate(cert, config=None):
    """True iff every recorded radius, Phi value and inequality recomputes."""
    failures = certificate_failures(cert, config)
    if failures:
        logger.warning(f"verify: {len(failures)} check(s) failed")
    return not failures


def timeline_rows(doc):
    """Rows (step, case, l, r, ell, phi, work_used) for the CSV timeline."""
    initial = doc['initial']
    rows = [{'step': 0, 'case': 'init', 'l': initial['l'], 'r': initial['r'], 'ell': initial['ell'],
             'phi': initial['phi'], 'work_used': 0}]
    for s in doc['steps']:
        rows.append({'step': s['step'] + 1, 'case': s['case'], 'l': s['l'], 'r': s['r'], 'ell': s['ell'],
                     'phi': s['phi'], 'work_used': s['work_used']})
    return rows
