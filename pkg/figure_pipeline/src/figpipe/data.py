"""Scan CSV loading and curve extraction.

The scan CSV schema is the only coupling to the simulation package: one
aggregate per row with columns (protocol, L, T, p, eta, estimator,
epsilon_or_blank, mean, stderr, n_samples, seed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

SCHEMA = ("protocol", "L", "T", "p", "eta", "estimator",
          "epsilon_or_blank", "mean", "stderr", "n_samples", "seed")


class SchemaError(ValueError):
    """The input file does not conform to the scan CSV schema."""


@dataclass(frozen=True)
class Row:
    protocol: str
    L: int
    T: int
    p: float
    eta: float
    estimator: str
    epsilon: float | None
    mean: float
    stderr: float
    n_samples: int
    seed: int


def load_rows(paths) -> list:
    rows = []
    for path in paths:
        with open(path, encoding="utf-8", newline="") as fh:
            rd = csv.DictReader(fh)
            missing = set(SCHEMA) - set(rd.fieldnames or ())
            if missing:
                raise SchemaError(
                    f"{path}: missing columns {sorted(missing)}")
            for i, rec in enumerate(rd, start=2):
                try:
                    rows.append(Row(
                        rec["protocol"], int(rec["L"]), int(rec["T"]),
                        float(rec["p"]), float(rec["eta"]),
                        rec["estimator"],
                        None if rec["epsilon_or_blank"] == ""
                        else float(rec["epsilon_or_blank"]),
                        float(rec["mean"]), float(rec["stderr"]),
                        int(rec["n_samples"]), int(rec["seed"])))
                except (TypeError, ValueError) as exc:
                    raise SchemaError(f"{path}:{i}: bad row: {exc}") from exc
    if not rows:
        raise SchemaError("no data rows in input")
    return rows


def estimators(rows) -> set:
    return {r.estimator for r in rows}


def require(rows, names) -> None:
    missing = set(names) - estimators(rows)
    if missing:
        raise SchemaError(f"estimator columns absent: {sorted(missing)}")


def curve(rows, estimator, L=None, eta=None, epsilon=None) -> list:
    """Sorted (p, mean, stderr) points matching the selectors."""
    pts = []
    for r in rows:
        if r.estimator != estimator:
            continue
        if L is not None and r.L != L:
            continue
        if eta is not None and abs(r.eta - eta) > 1e-12:
            continue
        if epsilon is not None and (r.epsilon is None
                                    or abs(r.epsilon - epsilon) > 1e-12):
            continue
        pts.append((r.p, r.mean, r.stderr))
    return sorted(pts)


def values_of(rows, field) -> list:
    return sorted({getattr(r, field) for r in rows
                   if getattr(r, field) is not None})
