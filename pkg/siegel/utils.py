#!/usr/bin/env python3
import json
import os
import tempfile
from datetime import datetime

MONTH_NAMES = [
    'January', 'February', 'March', 'April',
    'May', 'June', 'July', 'August',
    'September', 'October', 'November', 'December'
]


def run_stamp(dt=None):
    """Run-directory stamp with month name (e.g. '2026_October_18_142501')"""
    if dt is None:
        dt = datetime.now()
    month_name = MONTH_NAMES[dt.month - 1]
    return f"{dt.year}_{month_name}_{dt.day:02d}_{dt.hour:02d}{dt.minute:02d}{dt.second:02d}"


def canonical_json(obj):
    """Stable JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + '\n'


def atomic_write_bytes(path, data):
    """Write to a sibling temp file, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode('utf-8'))


def header_lines(config, version):
    """Comment header carried by CSV and BallUnion artifacts."""
    return [
        f"# config: {json.dumps(config, sort_keys=True)}",
        f"# version: {version}",
    ]
