#!/usr/bin/env python3
"""
Siegel Manager Module

This module provides the artifact side of the Siegel pipelines. Every file a
command produces goes through the manager, which stamps it with the run
configuration and the package version and writes it atomically.

Key Features:
- Run directories under runs/<stamp> (or an explicit --out-dir)
- JSON artifacts wrapped in a {config, version, result} envelope
- CSV and BallUnion artifacts with '# config:' / '# version:' header lines
- PGM rasters with the same header carried as comments
- Certificate reports rendered from templates/certificate_report.md

Usage:
    manager = SiegelManager(config, run={'command': 'phi', 'cf': '[1;1*]'})

    # Write a CSV with the config header
    manager.write_csv('phi.csv', ['theta', 'phi', 'tail_bound', 'terms'], rows)

    # Write a JSON artifact
    manager.write_json('tau.json', {'tau': 0.5, 'error': 1e-9})
"""

import csv
import io
import json
import logging
import os

from . import __version__
from .configure import load_config
from .exceptions import MalformedCertificate
from .utils import atomic_write_bytes, atomic_write_text, canonical_json, header_lines, run_stamp

logger = logging.getLogger(__name__)


class SiegelManager:
    """
    Run and artifact manager for the Siegel pipelines.

    Artifacts carry only the configuration and the run parameters, never the
    wall clock, so equal configs and seeds give byte-identical files.

    Attributes:
        base_dir (str): Project root directory
        templates_dir (str): Path to report templates
        out_dir (str): Directory receiving artifacts
        config (dict): Effective configuration
        run (dict): Command-line parameters of this run (command, seed, ...)
        version (str): Package version stamped into every artifact
    """

    def __init__(self, config=None, run=None, out_dir=None, stamp=None):
        # Project root is one level up from the package directory
        self.base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        self.templates_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'templates')
        self.config = config if config is not None else load_config()
        self.run = dict(run or {})
        self.out_dir = out_dir or os.path.join(os.getcwd(), 'runs', stamp or run_stamp())
        self.version = __version__

    @property
    def echo(self):
        """The configuration echoed into every artifact."""
        return {'run': self.run, 'settings': self.config}

    def header(self):
        return header_lines(self.echo, self.version)

    def path(self, name):
        """
        Resolve an artifact name.

        Bare file names land in out_dir; anything with a directory part is
        used as given.
        """
        if os.path.isabs(name) or os.path.dirname(name):
            return name
        return os.path.join(self.out_dir, name)

    def write_text(self, name, text):
        target = self.path(name)
        atomic_write_text(target, text)
        logger.info(f"Wrote {target}")
        return target

    def write_json(self, name, result):
        """
        Write `result` inside the {config, version, result} envelope.

        Returns:
            str: Path written
        """
        envelope = {'config': self.echo, 'version': self.version, 'result': result}
        return self.write_text(name, canonical_json(envelope))

    def write_csv(self, name, columns, rows):
        """
        Write a headed CSV.

        Args:
            name (str): Artifact name
            columns (list): Column names, also the keys looked up in dict rows
            rows (iterable): Dicts or sequences
        """
        buffer = io.StringIO()
        for line in self.header():
            buffer.write(line + '\n')
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row[c] for c in columns]
            writer.writerow(row)
        return self.write_text(name, buffer.getvalue())

    def write_balls(self, name, balls):
        return self.write_text(name, balls.to_text(header=self.header()))

    def write_pgm(self, name, rendering):
        target = self.path(name)
        atomic_write_bytes(target, rendering.to_pgm(comments=self.header()))
        logger.info(f"Wrote {target}")
        return target

    def write_report(self, doc, verified=None, stem='report'):
        """Write <stem>.md and <stem>.html for a certificate document."""
        from .report import render_report, render_report_html
        md_path = self.write_text(f"{stem}.md", render_report(doc, verified, self.templates_dir))
        html_path = self.write_text(f"{stem}.html", render_report_html(doc, verified, self.templates_dir))
        return md_path, html_path

    @staticmethod
    def load_json(path):
        """
        Read a JSON artifact, unwrapping the envelope when present.

        Raises:
            MalformedCertificate: If the file is unreadable or not JSON
        """
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise MalformedCertificate(f"Cannot read {path}: {e}")
        if isinstance(data, dict) and set(data) == {'config', 'version', 'result'}:
            return data['result']
        return data
