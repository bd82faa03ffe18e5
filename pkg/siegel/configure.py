#!/usr/bin/env python3
"""
Configuration Module

Loads, edits and persists the JSON configuration shared by every pipeline.
The packaged `config.json` sits next to this file; the environment variable
SIEGEL_CONFIG points at an alternative file, and SIEGEL_PRECISION_CAP caps
every precision-doubling loop.

Usage:
    siegel-config --status
    siegel-config --set quasiconformal_K=20
    siegel-config --reset
"""

import argparse
import copy
import json
import os
import sys

from .exceptions import DomainError, SiegelError

DEFAULT_PRECISION_CAP = 4096

DEFAULTS = {
    'precision_bits': 64,
    'quasiconformal_K': 10,
    'b_safety_factor': 2,
    'max_orbit_points': 1000,
    'level_min': 4,
    'partition_max_points': 2000,
    'partition_levels': 10,
    'bump_max_N': 10 ** 9,
    'bump_max_m': 10 ** 4,
    'phi_search_max_evaluations': 20000,
    'radius_search_max_candidates': 60,
    'render_iteration_exponent': 8,
    'escape_radius': 3,
    'julia_preimage_depth': 8,
    'symm_min_panels': 256,
    'symm_max_panels': 2048,
    'conformal_backend': 'symm',
    'visibility_rays': 720,
    'require_certified_radius': False,
    'rotation_max_iters': 200000,
    'adversary_steps': 3,
    'hardness': 'k**2',
    'roster': [
        {'name': 'always-timeout'},
        {'name': 'constant-output'},
        {'name': 'honest-bounded-renderer'},
    ],
    'log_level': 'INFO',
}


def config_path():
    return os.environ.get('SIEGEL_CONFIG') or os.path.join(os.path.dirname(__file__), 'config.json')


def load_config(path=None):
    """
    Load the configuration, filling missing keys from the defaults.

    Args:
        path (str, optional): Explicit file to read instead of config_path()

    Returns:
        dict: Effective configuration

    Raises:
        DomainError: If the file exists but is not valid JSON
    """
    config = copy.deepcopy(DEFAULTS)
    try:
        with open(path or config_path(), 'r') as f:
            stored = json.load(f)
    except FileNotFoundError:
        return config
    except json.JSONDecodeError as e:
        raise DomainError(f"Invalid configuration file {path or config_path()}: {e}",
                          hint="Run 'siegel-config --reset' to restore the defaults.")
    config.update(stored)
    return config


def save_config(config, path=None):
    with open(path or config_path(), 'w') as f:
        json.dump(config, f, indent=4)
        f.write('\n')
    print("Configuration saved successfully!")


def precision_cap():
    """Mantissa-bit cap from SIEGEL_PRECISION_CAP (default 4096)."""
    raw = os.environ.get('SIEGEL_PRECISION_CAP')
    if raw is None or raw == '':
        return DEFAULT_PRECISION_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise DomainError(f"SIEGEL_PRECISION_CAP must be an integer, got {raw!r}")
    if cap < 53:
        raise DomainError(f"SIEGEL_PRECISION_CAP must be at least 53, got {cap}")
    return cap


def set_value(assignment, path=None):
    key, sep, raw = assignment.partition('=')
    if not sep or not key:
        raise DomainError(f"Expected key=value, got {assignment!r}")
    if key not in DEFAULTS:
        raise DomainError(f"Unknown configuration key {key!r}",
                          hint=f"Known keys: {', '.join(sorted(DEFAULTS))}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    config = load_config(path)
    config[key] = value
    save_config(config, path)
    print(f"{key} updated to: {value}")


def main(argv=None):
    parser = argparse.ArgumentParser(description='Configure Siegel pipelines')
    parser.add_argument('--status', action='store_true', help='Show current configuration')
    parser.add_argument('--set', dest='assignments', action='append', metavar='KEY=VALUE',
                        help='Persist one configuration value (JSON-parsed)')
    parser.add_argument('--reset', action='store_true', help='Restore the default configuration')

    args = parser.parse_args(argv)

    try:
        if args.status:
            config = load_config()
            print("\nCurrent Configuration:")
            print(f"File: {config_path()}")
            for key in sorted(config):
                print(f"{key}: {config[key]}")
            print(f"Precision cap: {precision_cap()} bits")
            return 0

        if args.reset:
            save_config(copy.deepcopy(DEFAULTS))

        for assignment in args.assignments or []:
            set_value(assignment)
    except SiegelError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    if not any([args.status, args.reset, args.assignments]):
        parser.print_help()
    return 0


if __name__ == '__main__':
    sys.exit(main())
