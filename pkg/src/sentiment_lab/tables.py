"""Flat-file helpers shared by every stage: float formatting and labeled matrix CSVs."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import InputError


def fmt(x) -> str:
    """Round-trip float text; NaN (undefined / no-signal) becomes an empty field."""
    if x is None:
        return ""
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def parse_float(s: str) -> float:
    return float(s) if s.strip() else math.nan


def write_rows(path, header, rows) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_matrix(path, values, row_labels, col_labels, corner="") -> None:
    """Write a 2-D layer with a label row and a label column; NaN cells are left empty."""
    values = np.asarray(values)
    cell = str if np.issubdtype(values.dtype, np.integer) else fmt
    rows = [[r] + [cell(v) for v in row] for r, row in zip(row_labels, values)]
    write_rows(path, [corner] + list(col_labels), rows)


def read_matrix(path):
    """Inverse of :func:`write_matrix`: returns ``(values, row_labels, col_labels)``."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"cannot read matrix file {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InputError(f"{path}: empty matrix")
    cols = rows[0][1:]
    labels = [r[0] for r in rows[1:]]
    values = np.array([[parse_float(v) for v in r[1:]] for r in rows[1:]], dtype=float)
    return values, labels, cols


def label_number(label: str) -> int:
    """``cum_40`` -> 40, ``ret_20`` -> 20."""
    return int(label.rsplit("_", 1)[-1].lstrip("p"))
