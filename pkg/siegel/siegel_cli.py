#!/usr/bin/env python3
"""
Siegel CLI Module

Command-line front end for every pipeline. Each command writes its artifacts
through SiegelManager, so they carry the configuration and version and are
byte-identical across runs with the same config and seed.

Usage:
    siegel phi --cf "[1;1*]" --tol 1e-8
    siegel radius --cf "[1;1*]" --tol 1e-3
    siegel render --theta "[1;1*]" --m 6 --budget 1000000 --out j.balls
    siegel adversary --steps 3
    siegel verify --suite lemmas --seed 7

Exit codes: 0 success, 2 domain error, 3 resource exhaustion,
1 invariant violation or disqualified strategy.
"""

import argparse
import logging
import os
import sys

from . import __version__
from .adversary import certificate_failures, run_construction, timeline_rows
from .cf import CFNumber, brjuno_B, phi_bump_search, yoccoz_phi
from .circle import BlaschkeMap, commensurability, dynamical_partition, solve_tau
from .configure import load_config
from .exceptions import DomainError, InvariantViolation, ResourceExhausted, SiegelError
from .julia import render
from .lemma_suites import run_suites
from .numerics import Oracle
from .siegel_disk import radius_bump_search, siegel_radius
from .siegel_manager import SiegelManager
from .utils import canonical_json

logger = logging.getLogger(__name__)

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')
# Flags that locate or narrate a run but do not change its artifacts
RUN_EXCLUDED = ('handler', 'config', 'out_dir', 'log_level', 'out', 'pgm')


def _parse_prefix(text):
    try:
        prefix = tuple(int(a) for a in text.replace(' ', '').split(',') if a)
    except ValueError:
        raise DomainError(f"Malformed prefix {text!r}", hint="Expected comma-separated digits, e.g. 1,2,3")
    if not prefix:
        raise DomainError("Prefix must contain at least one digit")
    return prefix


def cmd_phi(args, manager):
    rows = []
    for literal in args.cf:
        c = CFNumber.parse(literal)
        phi = yoccoz_phi(c, args.tol)
        tail = float(phi.tail_bound.upper)
        rows.append({'theta': c.literal(), 'phi': float(phi), 'tail_bound': tail, 'terms': phi.terms_used})
        print(f"Phi({c.literal()}) = {float(phi):.12f} (tail bound {tail:.3g}, {phi.terms_used} terms)")
    manager.write_csv('phi.csv', ['theta', 'phi', 'tail_bound', 'terms'], rows)
    return 0


def cmd_brjuno(args, manager):
    c = CFNumber.parse(args.cf)
    B = brjuno_B(c, args.terms)
    result = {'theta': c.literal(), 'partial_sum': float(B.partial_sum), 'tail_bound': float(B.tail_bound.upper),
              'terms': args.terms, 'terms_used': B.terms_used, 'lower': float(B.lower), 'upper': float(B.upper)}
    print(f"B({c.literal()}) in [{result['lower']:.10f}, {result['upper']:.10f}] "
          f"({B.terms_used} terms, tail bound {result['tail_bound']:.3g})")
    manager.write_json('brjuno.json', result)
    return 0


def cmd_tau(args, manager):
    gamma = CFNumber.parse(args.gamma)
    tau = solve_tau(gamma, args.tol, manager.config)
    value, error = float(tau.approx), float(tau.error_radius)
    print(f"tau({gamma.literal()}) = {value:.17g} +/- {error:.3g}")
    manager.write_json('tau.json', {'gamma': gamma.literal(), 'tau': value, 'error': error,
                                    'lower': float(tau.lower), 'upper': float(tau.upper)})
    return 0


def cmd_partition(args, manager):
    gamma = CFNumber.parse(args.gamma)
    tau = solve_tau(gamma, args.tol, manager.config)
    m = BlaschkeMap(tau)
    rows = []
    for level in range(args.levels + 1):
        partition = dynamical_partition(m, gamma, level)
        rows.extend((level, index, float(angle)) for index, angle in enumerate(partition.points))
    manager.write_csv('partition.csv', ['level', 'index', 'angle'], rows)
    estimate = commensurability(gamma, manager.config)
    print(f"{len(rows)} partition points for {gamma.literal()} up to level {args.levels}; "
          f"B_hat = {estimate.b_hat:.6f}")
    return 0


def cmd_radius(args, manager):
    gamma = CFNumber.parse(args.cf)
    estimate = siegel_radius(gamma, args.tol, manager.config)
    manager.write_csv('radius.csv', ['level', 'r_n', 'eps_n', 'certified_error', 'carved'], estimate.rows)
    status = 'certified' if estimate.certified else 'NOT certified'
    print(f"r({gamma.literal()}) = {float(estimate.value):.10f} +/- {float(estimate.certified_error):.3g} "
          f"at level {estimate.level} ({status} to {args.tol:g})")
    return 0


def cmd_bump_search(args, manager):
    prefix = _parse_prefix(args.prefix)
    if args.kind == 'phi':
        bump = phi_bump_search(prefix, args.eps, args.m_min, manager.config)
        result = {'kind': 'phi', 'prefix': list(prefix), 'eps': args.eps, 'm': bump.m, 'N': bump.N,
                  'position': bump.position, 'beta': bump.beta.literal(), 'phi': float(bump.phi),
                  'base_phi': float(bump.base_phi), 'evaluations': bump.evaluations,
                  'trace': [[N, float(v)] for N, v in bump.trace]}
    else:
        bump = radius_bump_search(prefix, args.m0, args.eps, config=manager.config)
        result = {'kind': 'radius', 'prefix': list(prefix), 'eps': args.eps, 'm0': args.m0, 'm': bump.m,
                  'N': bump.N, 'beta': bump.beta.literal(), 'radius': bump.radius.to_dict(),
                  'base_radius': bump.base_radius.to_dict(), 'drop': bump.drop, 'phi': float(bump.phi),
                  'base_phi': float(bump.base_phi), 'candidates': bump.log}
    print(f"{args.kind} bump for {list(prefix)} at eps={args.eps:g}: m={bump.m}, N={bump.N} -> {bump.beta.literal()}")
    manager.write_json('bump.json', result)
    return 0


def cmd_render(args, manager):
    theta = CFNumber.parse(args.theta)
    rendering = render(Oracle.from_cf(theta), args.m, args.budget, args.interior_radius, args.iter_cap,
                       manager.config)
    stats = {'theta': theta.literal(), 'm': args.m, 'budget': args.budget,
             'incomplete': rendering.incomplete, **rendering.stats}
    if rendering.incomplete:
        print(canonical_json({'config': manager.echo, 'version': __version__, 'result': stats}), end='')
        raise ResourceExhausted(f"Budget {args.budget} ran out before C_{args.m} was complete",
                                hint="Raise --budget or lower --m.")
    manager.write_balls(args.out, rendering.balls)
    if args.pgm:
        manager.write_pgm(args.pgm, rendering)
    print(canonical_json({'config': manager.echo, 'version': __version__, 'result': stats}), end='')
    return 0


def cmd_adversary(args, manager):
    config = manager.config
    steps = args.steps if args.steps is not None else int(config['adversary_steps'])
    hardness = args.hardness or config['hardness']
    roster = config['roster']
    if args.roster:
        roster = SiegelManager.load_json(args.roster)
    try:
        gamma, doc = run_construction(roster, steps, hardness, config)
    except SiegelError as e:
        partial = getattr(e, 'certificates', None)
        if partial is not None:
            manager.write_json('certificates.json', partial)
        raise
    manager.write_json('gamma_prefix.json', {'prefix': list(gamma.prefix), 'literal': gamma.literal(),
                                             'phi_logr': doc['phi_logr']})
    manager.write_json('certificates.json', doc)
    manager.write_csv('timeline.csv', ['step', 'case', 'l', 'r', 'ell', 'phi', 'work_used'], timeline_rows(doc))
    manager.write_report(doc)
    print(f"{steps} steps -> gamma prefix {gamma.literal()} (artifacts in {manager.out_dir})")
    return 0


def cmd_verify(args, manager):
    if args.certificate:
        doc = SiegelManager.load_json(args.certificate)
        failures = certificate_failures(doc, manager.config)
        manager.write_json('verify.json', {'certificate': args.certificate, 'failures': failures,
                                           'passed': not failures})
        if failures:
            for failure in failures:
                print(f"  {failure}", file=sys.stderr)
            raise InvariantViolation(f"{len(failures)} certificate check(s) failed")
        print(f"Certificate {args.certificate}: all checks passed")
        return 0
    report = run_suites(args.seed, args.count, manager.config)
    manager.write_json('lemmas.json', report)
    for name in ('4lems', 'smlchg', 'notdeclem'):
        print(f"{name}: {'passed' if report[name]['passed'] else 'FAILED'}")
    if not report['passed']:
        raise InvariantViolation(f"Lemma suites failed for seed {args.seed}")
    return 0


def _common_flags(parser, suppress=False):
    """Global flags, accepted before or after the subcommand."""
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    parser.add_argument('--config', default=default(None), help='Configuration JSON file')
    parser.add_argument('--out-dir', default=default(None), help='Artifact directory (default runs/<stamp>)')
    parser.add_argument('--log-level', default=default(None), type=str.upper, choices=LOG_LEVELS,
                        help='Logging level (default from config)')
    parser.add_argument('--seed', type=int, default=default(0), help='Seed for randomized suites')


def build_parser():
    parser = argparse.ArgumentParser(prog='siegel', description='Rigorous numerics for quadratic Siegel disks')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    _common_flags(parser)
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        _common_flags(p, suppress=True)
        p.set_defaults(handler=handler)
        return p

    p = add('phi', cmd_phi, 'Yoccoz function with tail bound')
    p.add_argument('--cf', required=True, action='append', help='Continued fraction literal (repeatable)')
    p.add_argument('--tol', type=float, default=1e-8)

    p = add('brjuno', cmd_brjuno, 'Brjuno sum with tail bound')
    p.add_argument('--cf', required=True)
    p.add_argument('--terms', type=int, default=30)

    p = add('tau', cmd_tau, 'Blaschke parameter with a given rotation number')
    p.add_argument('--gamma', required=True)
    p.add_argument('--tol', type=float, default=1e-10)

    p = add('partition', cmd_partition, 'Dynamical partitions of the Blaschke circle map')
    p.add_argument('--gamma', required=True)
    p.add_argument('--levels', type=int, default=6)
    p.add_argument('--tol', type=float, default=1e-10)

    p = add('radius', cmd_radius, 'Conformal radius of a noble Siegel disk')
    p.add_argument('--cf', required=True)
    p.add_argument('--tol', type=float, default=1e-3)

    p = add('bump-search', cmd_bump_search, 'Digit bumps moving Phi or r by a controlled amount')
    p.add_argument('--prefix', required=True, help='Comma-separated digits, e.g. 1,2,3')
    p.add_argument('--eps', type=float, required=True)
    p.add_argument('--kind', choices=('phi', 'radius'), default='phi')
    p.add_argument('--m-min', type=int, default=1)
    p.add_argument('--m0', type=int, default=1)

    p = add('render', cmd_render, 'Render the Julia set as a ball union')
    p.add_argument('--theta', required=True)
    p.add_argument('--m', type=int, required=True)
    p.add_argument('--budget', type=int, required=True)
    p.add_argument('--out', required=True, help='BallUnion output file')
    p.add_argument('--pgm', help='Optional PGM raster')
    p.add_argument('--iter-cap', type=int)
    p.add_argument('--interior-radius', type=float)

    p = add('adversary', cmd_adversary, 'Run the diagonal construction against the roster')
    p.add_argument('--steps', type=int)
    p.add_argument('--hardness', help="Sympy expression in k, e.g. 'k**2'")
    p.add_argument('--roster', help='JSON file with a strategy list')

    p = add('verify', cmd_verify, 'Run lemma suites or re-verify a certificate')
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument('--suite', choices=('lemmas',))
    group.add_argument('--certificate')
    p.add_argument('--count', type=int, default=1000)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config and not os.path.isfile(args.config):
            raise DomainError(f"Configuration file {args.config} not found")
        config = load_config(args.config)
    except SiegelError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    logging.basicConfig(
        level=getattr(logging, args.log_level or str(config.get('log_level', 'INFO')).upper()),
        format='%(asctime)s [%(levelname)s] %(message)s',
        handlers=[logging.StreamHandler()]
    )
    run = {k: v for k, v in sorted(vars(args).items()) if k not in RUN_EXCLUDED}
    manager = SiegelManager(config, run, args.out_dir)
    try:
        return args.handler(args, manager)
    except SiegelError as e:
        print(f"Error: {e}", file=sys.stderr)
        logger.debug(f"{args.command} failed", exc_info=True)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
