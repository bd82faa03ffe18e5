#!/usr/bin/env python3
"""
Lemma Suites Module

Seeded randomized checks of the digit-bump estimates. The estimates are
theorems, so any failure here means an implementation bug.

Key Features:
- 4lems: random (prefix, m, N, i) instances through check_4lems
- smlchg: phi_bump_search re-verified at eps/10, with the step bound along its trace
- notdeclem: adversarial tails after m_0 ones never drop Phi below Phi(omega) - eps
- divergence: Phi(beta^N) increases over N = 10, 10^2, ..., 10^6

Usage:
    report = run_suites(seed=7)
    python -m siegel.lemma_suites 7 1000
"""

import logging
import sys

import numpy as np

from .cf import CFNumber, check_4lems, digit_bump, phi_bump_search, tail_safety_m0, yoccoz_phi
from .configure import load_config
from .exceptions import DomainError
from .numerics import Dyadic
from .utils import atomic_write_text, canonical_json

logger = logging.getLogger(__name__)

SMLCHG_PREFIXES = ((1,), (1, 2, 3))
SMLCHG_EPS = (0.5, 0.1)
NOTDECLEM_PREFIX = (1,)
NOTDECLEM_EPS = 1.0
NOTDECLEM_TAILS = 50
DIVERGENCE_N = tuple(10 ** e for e in range(1, 7))


def generate_instances(seed, count=1000):
    """
    Random (prefix, m, N, i) instances: prefixes of 1-6 digits up to 20,
    m in [1, 20], N log-uniform in [1, 10^4], i in [0, n+m].
    """
    rng = np.random.default_rng(seed)
    instances = []
    for _ in range(count):
        length = int(rng.integers(1, 7))
        prefix = [int(a) for a in rng.integers(1, 21, size=length)]
        m = int(rng.integers(1, 21))
        N = int(10 ** rng.uniform(0, 4))
        i = int(rng.integers(0, length - 1 + m + 1))
        instances.append({'prefix': prefix, 'm': m, 'N': max(1, N), 'i': i})
    return instances


def run_4lems(instances):
    failures = []
    for inst in instances:
        parts = check_4lems(inst['prefix'], inst['m'], inst['N'], inst['i'])
        if any(p is False for p in parts):
            failures.append({**inst, 'parts': list(parts)})
            logger.error(f"4lems failed on {inst}: {parts}")
    return {'instances': len(instances), 'failures': failures, 'passed': not failures}


def _divergence(prefix, m):
    base = CFNumber.noble(prefix)
    pos = len(prefix) - 1 + m
    tol = min(1e-6, 0.25 ** pos)
    values = [yoccoz_phi(digit_bump(base, pos, N), tol) for N in DIVERGENCE_N]
    return all(b.lower > a.upper for a, b in zip(values, values[1:]))


def run_smlchg(config=None):
    """phi_bump_search on each (prefix, eps), re-verified independently."""
    config = config or load_config()
    cases = []
    for prefix in SMLCHG_PREFIXES:
        for eps in SMLCHG_EPS:
            bump = phi_bump_search(prefix, eps, config=config)
            tol = eps / 10
            phi = yoccoz_phi(bump.beta, tol)
            base = yoccoz_phi(CFNumber.noble(prefix), tol)
            window = (phi.lower > base.upper + Dyadic.from_float(eps)
                      and phi.upper < base.lower + Dyadic.from_float(2 * eps))
            steps = [float(b.upper - a.lower) for (_, a), (_, b) in zip(bump.trace, bump.trace[1:])]
            step_bound = all(s < eps for s in steps)
            case = {'prefix': list(prefix), 'eps': eps, 'm': bump.m, 'N': bump.N,
                    'phi': float(phi), 'base_phi': float(base), 'window': window,
                    'step_bound': step_bound, 'max_step': max(steps) if steps else 0.0,
                    'divergence': _divergence(prefix, bump.m)}
            logger.info(f"smlchg {list(prefix)} eps={eps}: m={bump.m} N={bump.N} "
                        f"window={window} step_bound={step_bound}")
            cases.append(case)
    passed = all(c['window'] and c['step_bound'] and c['divergence'] for c in cases)
    return {'cases': cases, 'passed': passed}


def adversarial_tails(seed, count=NOTDECLEM_TAILS):
    """Tails of 1-8 digits, log-uniform up to 10^6, biased toward large digits."""
    rng = np.random.default_rng([seed, 1])
    tails = []
    for _ in range(count):
        length = int(rng.integers(1, 9))
        tails.append([max(1, int(10 ** rng.uniform(0, 6))) for _ in range(length)])
    return tails


def run_notdeclem(seed, prefix=NOTDECLEM_PREFIX, eps=NOTDECLEM_EPS):
    prefix = tuple(prefix)
    m0 = tail_safety_m0(prefix, eps)
    base = yoccoz_phi(CFNumber.noble(prefix), 1e-6)
    floor = base.upper - Dyadic.from_float(eps)
    failures = []
    for tail in adversarial_tails(seed):
        beta = CFNumber.noble(prefix + (1,) * (m0 - 1) + tuple(tail))
        phi = yoccoz_phi(beta, 1e-6)
        if not phi.lower > floor:
            failures.append({'tail': tail, 'phi': float(phi)})
            logger.error(f"notdeclem failed: tail {tail} gives Phi={float(phi):.6f}")
    return {'prefix': list(prefix), 'eps': eps, 'm0': m0, 'tails': NOTDECLEM_TAILS,
            'failures': failures, 'passed': not failures}


def run_suites(seed, count=1000, config=None):
    """
    Run every suite.

    Returns:
        dict: Per-suite results plus an overall 'passed' flag
    """
    config = config or load_config()
    report = {
        'seed': seed,
        '4lems': run_4lems(generate_instances(seed, count)),
        'smlchg': run_smlchg(config),
        'notdeclem': run_notdeclem(seed),
    }
    report['passed'] = all(report[name]['passed'] for name in ('4lems', 'smlchg', 'notdeclem'))
    return report


def save_instances(path, seed, count):
    instances = generate_instances(seed, count)
    atomic_write_text(path, canonical_json({'seed': seed, 'count': count, 'instances': instances}))
    return instances


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("Usage: python -m siegel.lemma_suites <seed> <count>")
        return 2
    try:
        seed, count = int(argv[0]), int(argv[1])
    except ValueError:
        print("Error: seed and count must be integers", file=sys.stderr)
        return 2
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    path = f"lemma_instances_{seed}.json"
    save_instances(path, seed, count)
    print(f"Saved {count} instances to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
