"""Deterministic report writers: delimited text, CSV, and JSON summaries.

Every writer produces byte-identical output for identical inputs: floats go
through one fixed format, JSON keys are sorted, and nothing time- or
environment-dependent is ever written.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt(value):
    """Fixed shortest-round-trip rendering for report floats."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def fmt_exact(value):
    """Full-precision rendering (17 significant digits round-trips f64)."""
    return format(float(value), ".17g")


def write_lines(path, lines):
    Path(path).write_text("\n".join(lines) + "\n")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(cell) if not isinstance(cell, str) else cell for cell in row))
    write_lines(path, lines)


def write_matrix_csv(path, matrix):
    """L x L matrix as L lines of comma-separated full-precision reals."""
    matrix = np.asarray(matrix, dtype=np.float64)
    lines = [",".join(fmt_exact(v) for v in row) for row in matrix]
    write_lines(path, lines)


def read_matrix_csv(path):
    rows = [
        [float(cell) for cell in line.split(",")]
        for line in Path(path).read_text().splitlines()
        if line
    ]
    return np.asarray(rows, dtype=np.float64)


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def metrics_dict(metrics):
    return {
        "ppv": metrics.ppv,
        "sen": metrics.sensitivity,
        "acc": metrics.accuracy,
        "tp": metrics.tp,
        "fp": metrics.fp,
        "fn": metrics.fn,
        "tn": metrics.tn,
    }
