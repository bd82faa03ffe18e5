#!/usr/bin/env python3
"""
Report Module

Renders an adversary certificate document as a Markdown summary (and HTML
through the markdown package) from templates/certificate_report.md.

Usage:
    text = render_report(doc, verified=True)
    html = render_report_html(doc)
"""

import json
import os

import markdown

TEMPLATE_NAME = 'certificate_report.md'
STEP_COLUMNS = ('step', 'case', 'strategy', 'k', 'T', 'work_used', 'l', 'r', 'ell', 'phi', 'fooled')


def _cell(value):
    if isinstance(value, float):
        return f"{value:.8g}"
    if value is None:
        return '-'
    if isinstance(value, dict) and 'name' in value:
        return value['name']
    return str(value)


def steps_table(steps):
    if not steps:
        return '_No induction steps were run._'
    lines = ['| ' + ' | '.join(STEP_COLUMNS) + ' |',
             '|' + '---|' * len(STEP_COLUMNS)]
    for s in steps:
        lines.append('| ' + ' | '.join(_cell(s.get(c)) for c in STEP_COLUMNS) + ' |')
    return '\n'.join(lines)


def checks_list(checks):
    if not checks:
        return '- (none recorded)'
    return '\n'.join(f"- [{'x' if ok else ' '}] {name}" for name, ok in sorted(checks.items()))


def verdict_text(doc, verified):
    failed = [name for name, ok in (doc.get('checks') or {}).items() if not ok]
    if failed:
        return f"**Construction checks failed**: {', '.join(sorted(failed))}"
    if verified is None:
        return "Construction checks passed; the certificate has not been re-verified."
    if verified:
        return "Construction checks passed and every step re-verified."
    return "**Re-verification failed**; see the verifier log."


def render_report(doc, verified=None, templates_dir=None):
    """
    Fill the certificate template.

    Args:
        doc (dict): Certificate document from run_construction
        verified (bool, optional): Outcome of verify_certificate, if run
        templates_dir (str, optional): Directory holding the template

    Returns:
        str: Markdown text
    """
    templates_dir = templates_dir or os.path.join(os.path.dirname(os.path.abspath(__file__)), 'templates')
    with open(os.path.join(templates_dir, TEMPLATE_NAME), 'r') as template:
        content = template.read()
    prefix = doc.get('prefix') or doc.get('initial', {}).get('prefix', [])
    initial = doc.get('initial', {})
    replacements = {
        '{{version}}': str(doc.get('version', '')),
        '{{prefix}}': '[' + ','.join(str(a) for a in prefix) + ';1*]',
        '{{hardness}}': json.dumps(doc.get('hardness'), sort_keys=True),
        '{{roster}}': ', '.join(s.get('name', '?') for s in doc.get('roster', [])),
        '{{initial}}': f"l={_cell(initial.get('l'))}, r={_cell(initial.get('r'))}, ell={_cell(initial.get('ell'))}",
        '{{steps_table}}': steps_table(doc.get('steps', [])),
        '{{checks}}': checks_list(doc.get('checks')),
        '{{verdict}}': verdict_text(doc, verified),
    }
    for placeholder, value in replacements.items():
        content = content.replace(placeholder, value)
    return content


def render_report_html(doc, verified=None, templates_dir=None):
    return markdown.markdown(render_report(doc, verified, templates_dir), extensions=['fenced_code', 'tables'])
