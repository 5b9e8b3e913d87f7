"""CSV and key=value report writers.

Every file starts with ``#`` comment lines holding the resolved
configuration, followed by optional metadata.  Floats are written with
``repr`` so reruns are byte identical and values round-trip exactly.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .models import to_tl


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def header_lines(config_text, meta=None):
    lines = ["# " + line if line else "#" for line in config_text.rstrip("\n").split("\n")]
    for k, v in (meta or {}).items():
        lines.append(f"# {k} = {_cell(v)}")
    return lines


def csv_text(columns, rows, config_text="", meta=None):
    buf = io.StringIO()
    for line in header_lines(config_text, meta):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows, config_text="", meta=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(columns, rows, config_text, meta))
    return path


def read_csv(path):
    """Return ``(meta_lines, columns, rows)``; rows as float arrays where possible."""
    meta, body = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            (meta if line.startswith("#") else body).append(line)
    reader = list(csv.reader(body))
    columns, rows = reader[0], reader[1:]
    return meta, columns, rows


def profile_table(grid, values):
    """Columns and rows of a nodal profile: ``x, u1, u2, v_T, v_L`` (two
    components) or ``x, u``."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    x = grid.x
    if values.shape[1] == 2:
        v = to_tl(values)
        cols = ["x", "u1", "u2", "v_T", "v_L"]
        rows = np.column_stack([x, values, v])
    else:
        cols = ["x"] + (["u"] if values.shape[1] == 1 else [f"u{k + 1}" for k in range(values.shape[1])])
        rows = np.column_stack([x, values])
    return cols, rows.tolist()


def write_report(path, items, config_text=""):
    """Flat ``key=value`` report; ``items`` is a mapping or preformatted text."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_lines(config_text):
            fh.write(line + "\n")
        if isinstance(items, str):
            fh.write(items)
        else:
            for k, v in items.items():
                fh.write(f"{k}={_cell(v)}\n")
    return path
