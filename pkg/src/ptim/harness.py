"""Monte Carlo scans, crossing estimation, and the noise probe.

A scan sweeps (L, p, eta) grid points for one protocol, runs the
per-sample estimator pipeline, and persists one CSV of aggregates plus a
JSON sidecar echoing the configuration.  Sample k always draws from the
RNG streams derived from (master_seed, k), so results are a pure function
of the configuration, independent of the worker count.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool

import numpy as np

from .correction import (decode, decoded_correlation, predict_state,
                         predict_state_naive)
from .protocols import DECODE_STREAM, ProtocolConfig, run_sample, sample_rng
from .shadows import EpsilonGrid, make_shadow, _entropy_from_eigensystem

CSV_HEADER = ("protocol", "L", "T", "p", "eta", "estimator",
              "epsilon_or_blank", "mean", "stderr", "n_samples", "seed")


@dataclass(frozen=True)
class ScanConfig:
    protocol: str                      # halfchain | ancilla | decoding | shadow
    L_list: tuple
    p_grid: tuple
    eta_list: tuple = (0.0,)
    samples: int = 1000
    master_seed: int = 0
    T: int | None = None               # None: T = L
    epsilon_grid: EpsilonGrid | None = None   # shadow only
    predictor: str = "corrected"       # shadow only: corrected | naive
    out: str | None = None
    workers: int = 1

    def validate(self) -> None:
        if self.protocol not in ("halfchain", "ancilla", "decoding",
                                 "shadow"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if not self.L_list or not self.p_grid or not self.eta_list:
            raise ValueError("grids must be non-empty")
        if self.samples < 1:
            raise ValueError("need at least one sample per point")
        if self.predictor not in ("corrected", "naive"):
            raise ValueError(f"unknown predictor {self.predictor!r}")
        if self.workers < 1:
            raise ValueError("need at least one worker")


def default_p_grid() -> tuple:
    """0.30..0.70 step 0.02, refined to step 0.01 on 0.46..0.54."""
    coarse = {round(0.30 + 0.02 * k, 2) for k in range(21)}
    fine = {round(0.46 + 0.01 * k, 2) for k in range(9)}
    return tuple(sorted(coarse | fine))


@dataclass(frozen=True)
class Aggregate:
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


def _mean_se(values) -> tuple:
    arr = np.asarray(values, dtype=float)
    se = arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else 0.0
    return float(arr.mean()), float(se)


def _sample_values(args):
    """Per-sample estimator payload; pure function of (point config, k)."""
    (protocol, L, T, p, eta, seed, eps_values, predictor), k = args
    cfg = ProtocolConfig(protocol=protocol, L=L, T=T, p=p, eta=eta,
                         master_seed=seed, sample_index=k)
    s = run_sample(cfg)
    if protocol in ("halfchain", "ancilla"):
        return (float(s.entropy),)
    if protocol == "decoding":
        corr = decode(s.record, sample_rng(seed, k, DECODE_STREAM))
        return (float(decoded_correlation(s, corr)),)
    pred = (predict_state(s.record) if predictor == "corrected"
            else predict_state_naive(s.record))
    shadow_a = make_shadow(s.basis_a, s.out_a)
    shadow_al = np.kron(shadow_a, make_shadow(s.basis_l, s.out_l))
    vals_a, vecs_a = pred.ancilla_eigensystem()
    vals_al, vecs_al = pred.pair_eigensystem()
    s_a = np.empty(len(eps_values))
    s_al = np.empty(len(eps_values))
    for i, e in enumerate(eps_values):
        s_a[i] = _entropy_from_eigensystem(shadow_a, vals_a, vecs_a, e)
        s_al[i] = _entropy_from_eigensystem(shadow_al, vals_al, vecs_al, e)
    return (s_a, s_al, float(s.true_entropy))


def _point_rows(cfg: ScanConfig, L, T, p, eta, payloads) -> list:
    prefix = "naive_" if cfg.predictor == "naive" else ""
    rows = []

    def row(name, eps, mean, se):
        rows.append(Aggregate(cfg.protocol, L, T, p, eta, name, eps,
                              mean, se, cfg.samples, cfg.master_seed))

    if cfg.protocol == "halfchain":
        row("S_half", None, *_mean_se([v[0] for v in payloads]))
    elif cfg.protocol == "ancilla":
        row("S_a", None, *_mean_se([v[0] for v in payloads]))
    elif cfg.protocol == "decoding":
        row("R", None, *_mean_se([v[0] for v in payloads]))
    else:
        eps_values = cfg.epsilon_grid.values
        s_a = np.array([v[0] for v in payloads])      # (N, n_eps)
        s_al = np.array([v[1] for v in payloads])
        diag = [v[2] for v in payloads]
        up_stats = [_mean_se(s_a[:, i]) for i in range(len(eps_values))]
        lo_stats = [_mean_se(s_a[:, i] - s_al[:, i])
                    for i in range(len(eps_values))]
        for i, e in enumerate(eps_values):
            row(prefix + "S_upper", e, *up_stats[i])
            row(prefix + "S_lower", e, *lo_stats[i])
        ku = min(range(len(eps_values)), key=lambda i: up_stats[i][0])
        kl = max(range(len(eps_values)), key=lambda i: lo_stats[i][0])
        row(prefix + "S_upper_env", eps_values[ku], *up_stats[ku])
        row(prefix + "S_lower_env", eps_values[kl], *lo_stats[kl])
        row("S_a", None, *_mean_se(diag))
    return rows


def run_scan(cfg: ScanConfig) -> list:
    """Aggregate rows for every grid point; writes CSV/JSON when cfg.out."""
    cfg.validate()
    if cfg.protocol == "shadow" and cfg.epsilon_grid is None:
        cfg = ScanConfig(**{**asdict_config(cfg),
                            "epsilon_grid": EpsilonGrid.default()})
    eps_values = (cfg.epsilon_grid.values
                  if cfg.epsilon_grid is not None else ())
    rows = []
    pool = Pool(cfg.workers) if cfg.workers > 1 else None
    try:
        for L in cfg.L_list:
            T = cfg.T if cfg.T is not None else L
            for eta in cfg.eta_list:
                for p in cfg.p_grid:
                    point = (cfg.protocol, L, T, p, eta, cfg.master_seed,
                             eps_values, cfg.predictor)
                    work = [(point, k) for k in range(cfg.samples)]
                    if pool is not None:
                        payloads = pool.map(_sample_values, work,
                                            chunksize=64)
                    else:
                        payloads = [_sample_values(w) for w in work]
                    rows.extend(_point_rows(cfg, L, T, p, eta, payloads))
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    if cfg.out:
        write_csv(cfg.out, rows)
        write_sidecar(cfg.out, cfg)
    return rows


def asdict_config(cfg: ScanConfig) -> dict:
    d = asdict(cfg)
    if cfg.epsilon_grid is not None:
        d["epsilon_grid"] = cfg.epsilon_grid
    return d


def _fmt(x) -> str:
    return format(float(x), ".9g")


def write_csv(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow((r.protocol, r.L, r.T, _fmt(r.p), _fmt(r.eta),
                        r.estimator,
                        "" if r.epsilon is None else _fmt(r.epsilon),
                        _fmt(r.mean), _fmt(r.stderr), r.n_samples, r.seed))


def write_sidecar(path: str, cfg: ScanConfig) -> None:
    d = asdict(cfg)
    if cfg.epsilon_grid is not None:
        d["epsilon_grid"] = list(cfg.epsilon_grid.values)
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(d, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(path: str) -> list:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        rd = csv.DictReader(fh)
        missing = set(CSV_HEADER) - set(rd.fieldnames or ())
        if missing:
            raise ValueError(f"CSV {path} lacks columns {sorted(missing)}")
        for rec in rd:
            out.append(Aggregate(
                rec["protocol"], int(rec["L"]), int(rec["T"]),
                float(rec["p"]), float(rec["eta"]), rec["estimator"],
                None if rec["epsilon_or_blank"] == ""
                else float(rec["epsilon_or_blank"]),
                float(rec["mean"]), float(rec["stderr"]),
                int(rec["n_samples"]), int(rec["seed"])))
    return out


def curve_from_rows(rows, estimator, L, eta) -> list:
    """Sorted (p, mean, stderr) curve for one estimator at one (L, eta)."""
    pts = [(r.p, r.mean, r.stderr) for r in rows
           if r.estimator == estimator and r.L == L
           and abs(r.eta - eta) < 1e-12]
    return sorted(pts)


class NoCrossingError(ValueError):
    """The two curves do not change ordering inside the scanned grid."""


@dataclass(frozen=True)
class CrossingEstimate:
    sizes: tuple
    p_cross: float
    ci_low: float
    ci_high: float
    n_bootstrap: int


def _interp_crossing(ps, diff):
    """Abscissa where diff changes sign, or None.

    The curves must take strictly opposite orderings somewhere on the
    grid; the crossing is then searched between the two extrema of the
    difference.  This ignores spurious ties on saturation plateaus where
    both curves sit on the same exact value.
    """
    imax = int(np.argmax(diff))
    imin = int(np.argmin(diff))
    if diff[imax] <= 0 or diff[imin] >= 0:
        return None
    lo, hi = min(imax, imin), max(imax, imin)
    for i in range(lo, hi):
        a, b = diff[i], diff[i + 1]
        if a == 0.0:
            return ps[i]
        if a * b < 0:
            return ps[i] + (ps[i + 1] - ps[i]) * a / (a - b)
    return None


def find_crossing(curve_a, curve_b, sizes=(0, 0), n_bootstrap=1000,
                  seed=0) -> CrossingEstimate:
    """Crossing abscissa of two (p, mean, stderr) curves on one p grid.

    Linear interpolation of the first sign change of (mean_a - mean_b);
    the confidence interval is the 2.5/97.5 percentile band over Gaussian
    per-point perturbations by the standard errors.
    """
    pa = [q[0] for q in curve_a]
    pb = [q[0] for q in curve_b]
    if pa != pb:
        raise ValueError("curves must share one p grid")
    ps = np.asarray(pa)
    ma = np.asarray([q[1] for q in curve_a])
    mb = np.asarray([q[1] for q in curve_b])
    ea = np.asarray([q[2] for q in curve_a])
    eb = np.asarray([q[2] for q in curve_b])
    center = _interp_crossing(ps, ma - mb)
    if center is None:
        raise NoCrossingError("no crossing in range")
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_bootstrap):
        diff = (ma + rng.normal(0, 1, len(ps)) * ea
                - mb - rng.normal(0, 1, len(ps)) * eb)
        x = _interp_crossing(ps, diff)
        boots.append(center if x is None else x)
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return CrossingEstimate(tuple(sizes), float(center), float(lo),
                            float(hi), n_bootstrap)


@dataclass(frozen=True)
class DeltaPoint:
    eta: float
    p_lower_decode: CrossingEstimate | None
    p_lower_shadow: CrossingEstimate
    p_upper_shadow: CrossingEstimate
    delta: float
    delta_ci_low: float
    delta_ci_high: float


def delta_probe(shadow_rows_by_eta, decode_rows_by_eta, sizes,
                n_bootstrap=1000, seed=0) -> list:
    """delta(eta) = p_c,> - p_c,< from shadow envelope crossings.

    The lower-bound envelope curves cross left of the transition and
    give p_c,<; the upper-bound envelope curves cross right of it and
    give p_c,>.  ``shadow_rows_by_eta`` / ``decode_rows_by_eta`` map eta
    to scan rows holding both sizes; ``sizes`` is the (L1, L2) crossing
    pair.  The decoding crossing is reported alongside for the
    coincidence check with p_c,<.
    """
    L1, L2 = sizes
    out = []
    rng = np.random.default_rng(seed)
    for eta in sorted(shadow_rows_by_eta):
        rows = shadow_rows_by_eta[eta]
        cu1 = curve_from_rows(rows, "S_upper_env", L1, eta)
        cu2 = curve_from_rows(rows, "S_upper_env", L2, eta)
        cl1 = curve_from_rows(rows, "S_lower_env", L1, eta)
        cl2 = curve_from_rows(rows, "S_lower_env", L2, eta)
        lower = find_crossing(cl1, cl2, sizes, n_bootstrap,
                              int(rng.integers(2 ** 31)))
        upper = find_crossing(cu1, cu2, sizes, n_bootstrap,
                              int(rng.integers(2 ** 31)))
        dec = None
        dec_rows = decode_rows_by_eta.get(eta)
        if dec_rows is not None:
            cd1 = curve_from_rows(dec_rows, "R", L1, eta)
            cd2 = curve_from_rows(dec_rows, "R", L2, eta)
            dec = find_crossing(cd1, cd2, sizes, n_bootstrap,
                                int(rng.integers(2 ** 31)))
        delta = upper.p_cross - lower.p_cross
        spread_lo = upper.ci_low - lower.ci_high
        spread_hi = upper.ci_high - lower.ci_low
        out.append(DeltaPoint(eta, dec, lower, upper, delta,
                              spread_lo, spread_hi))
    return out


def linear_fit(xs, ys) -> tuple:
    """(slope, intercept, residuals) of a least-squares line."""
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = np.asarray(ys) - (slope * np.asarray(xs) + intercept)
    return float(slope), float(intercept), resid
