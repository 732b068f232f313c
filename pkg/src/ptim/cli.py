"""Command line front end for scans, crossings, and the noise probe.

Subcommands ``halfchain``, ``ancilla``, ``decode``, and ``shadow`` run one
scan and write the aggregate CSV plus its JSON sidecar.  ``crossing``
reads scan CSVs back and reports the finite-size crossing of one
estimator for a pair of sizes.  ``delta-probe`` runs the decoding and
shadow scans over a list of noise rates and reports the bound-gap table
with its monotonicity check and linear fit.

Flag values override entries of the optional ``--config`` JSON file.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (CrossingEstimate, NoCrossingError, ScanConfig,
                      curve_from_rows, default_p_grid, delta_probe,
                      find_crossing, linear_fit, read_csv, run_scan,
                      write_csv)
from .shadows import EpsilonGrid


def _parse_floats(text: str) -> tuple:
    """Comma list "a,b,c" or range "start:stop:step" (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0 or stop < start:
            raise ValueError(f"bad range {text!r}")
        n = int(round((stop - start) / step))
        grid = [round(start + k * step, 12) for k in range(n + 1)]
        return tuple(v for v in grid if v <= stop + 1e-12)
    return tuple(float(x) for x in text.split(","))


def _parse_ints(text: str) -> tuple:
    return tuple(int(x) for x in text.split(","))


def _add_scan_flags(sub) -> None:
    sub.add_argument("--L", help="comma list of chain lengths")
    sub.add_argument("--T", type=int, help="depth (default: T = L)")
    sub.add_argument("--p-grid", dest="p_grid",
                     help="comma list or start:stop:step")
    sub.add_argument("--eta", help="comma list of masking rates")
    sub.add_argument("--samples", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--epsilon-grid", dest="epsilon_grid",
                     help="comma list, increasing, ending in 1")
    sub.add_argument("--workers", type=int)
    sub.add_argument("--out")
    sub.add_argument("--config", help="JSON file with default flag values")


def _merged(args) -> dict:
    """Config file values overlaid by explicitly given flags."""
    merged = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            merged.update(json.load(fh))
    for key in ("L", "T", "p_grid", "eta", "samples", "seed",
                "epsilon_grid", "workers", "out", "predictor", "sizes",
                "estimator"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _scan_config(protocol: str, merged: dict) -> ScanConfig:
    if "L" not in merged:
        raise ValueError("--L is required")
    L_list = (_parse_ints(merged["L"]) if isinstance(merged["L"], str)
              else tuple(merged["L"]))
    p_grid = merged.get("p_grid", default_p_grid())
    if isinstance(p_grid, str):
        p_grid = _parse_floats(p_grid)
    eta = merged.get("eta", (0.0,))
    if isinstance(eta, str):
        eta = _parse_floats(eta)
    eps = merged.get("epsilon_grid")
    if isinstance(eps, str):
        eps = _parse_floats(eps)
    grid = None
    if protocol == "shadow":
        grid = EpsilonGrid(tuple(eps)) if eps else EpsilonGrid.default()
    return ScanConfig(
        protocol=protocol,
        L_list=L_list,
        p_grid=tuple(p_grid),
        eta_list=tuple(eta),
        samples=int(merged.get("samples", 1000)),
        master_seed=int(merged.get("seed", 0)),
        T=merged.get("T"),
        epsilon_grid=grid,
        predictor=merged.get("predictor", "corrected"),
        out=merged.get("out"),
        workers=int(merged.get("workers", 1)),
    )


def _cmd_scan(protocol: str, args) -> int:
    merged = _merged(args)
    cfg = _scan_config(protocol, merged)
    rows = run_scan(cfg)
    if not cfg.out:
        write_csv("/dev/stdout", rows)
    else:
        print(f"wrote {len(rows)} rows to {cfg.out}")
    return 0


def _fmt_crossing(label: str, c: CrossingEstimate) -> str:
    return (f"{label}: p = {c.p_cross:.6f} "
            f"[{c.ci_low:.6f}, {c.ci_high:.6f}] (L = {c.sizes})")


def _cmd_crossing(args) -> int:
    merged = _merged(args)
    rows = []
    for path in args.inputs:
        rows.extend(read_csv(path))
    sizes = _parse_ints(merged["L"]) if isinstance(merged.get("L"), str) \
        else tuple(merged.get("L", ()))
    if len(sizes) != 2:
        raise ValueError("--L must name exactly two sizes")
    eta = merged.get("eta", (0.0,))
    if isinstance(eta, str):
        eta = _parse_floats(eta)
    estimator = merged.get("estimator")
    if not estimator:
        raise ValueError("--estimator is required")
    seed = int(merged.get("seed", 0))
    for e in eta:
        a = curve_from_rows(rows, estimator, sizes[0], e)
        b = curve_from_rows(rows, estimator, sizes[1], e)
        if not a or not b:
            raise ValueError(
                f"no {estimator!r} rows for L = {sizes} at eta = {e}")
        c = find_crossing(a, b, sizes, seed=seed)
        print(_fmt_crossing(f"eta = {e}", c))
    return 0


def _cmd_delta_probe(args) -> int:
    merged = _merged(args)
    base = _scan_config("shadow", merged)
    if len(base.L_list) != 2:
        raise ValueError("--L must name exactly two sizes")
    shadow_by_eta, decode_by_eta = {}, {}
    for eta in base.eta_list:
        one = {**asdict_like(base), "eta_list": (eta,), "out": None}
        shadow_by_eta[eta] = run_scan(ScanConfig(**one))
        one.update(protocol="decoding", epsilon_grid=None)
        decode_by_eta[eta] = run_scan(ScanConfig(**one))
    points = delta_probe(shadow_by_eta, decode_by_eta, base.L_list,
                         seed=base.master_seed)
    print("eta      p_c,<(S)   p_c,>(S)   delta      95% CI            "
          "p_c,<(D)")
    for pt in points:
        dec = f"{pt.p_lower_decode.p_cross:.4f}" if pt.p_lower_decode \
            else "-"
        print(f"{pt.eta:<8.3f} {pt.p_lower_shadow.p_cross:<10.4f} "
              f"{pt.p_upper_shadow.p_cross:<10.4f} {pt.delta:<10.4f} "
              f"[{pt.delta_ci_low:+.4f}, {pt.delta_ci_high:+.4f}]  {dec}")
    deltas = [pt.delta for pt in points]
    mono = all(b > a for a, b in zip(deltas, deltas[1:]))
    print(f"monotone increasing in eta: {mono}")
    if len(points) > 1:
        slope, intercept, resid = linear_fit([pt.eta for pt in points],
                                             deltas)
        print(f"linear fit: delta = {slope:.4f} * eta + {intercept:+.4f}, "
              f"max |residual| = {max(abs(resid)):.4f}")
    if base.out:
        rows = [r for e in sorted(shadow_by_eta)
                for r in shadow_by_eta[e]]
        rows += [r for e in sorted(decode_by_eta)
                 for r in decode_by_eta[e]]
        write_csv(base.out, rows)
        print(f"wrote scan rows to {base.out}")
    return 0


def asdict_like(cfg: ScanConfig) -> dict:
    return {
        "protocol": cfg.protocol, "L_list": cfg.L_list,
        "p_grid": cfg.p_grid, "eta_list": cfg.eta_list,
        "samples": cfg.samples, "master_seed": cfg.master_seed,
        "T": cfg.T, "epsilon_grid": cfg.epsilon_grid,
        "predictor": cfg.predictor, "out": cfg.out,
        "workers": cfg.workers,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptim",
        description="scans and analysis for the projective Ising chain")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, proto in (("halfchain", "halfchain"), ("ancilla", "ancilla"),
                        ("decode", "decoding"), ("shadow", "shadow")):
        sub = subs.add_parser(name, help=f"run a {proto} scan")
        _add_scan_flags(sub)
        if name == "shadow":
            sub.add_argument("--predictor",
                             choices=("corrected", "naive"))
        sub.set_defaults(func=lambda a, p=proto: _cmd_scan(p, a))

    cross = subs.add_parser("crossing",
                            help="finite-size crossing from scan CSVs")
    cross.add_argument("inputs", nargs="+", metavar="CSV")
    cross.add_argument("--estimator", help="estimator column to cross")
    _add_scan_flags(cross)
    cross.set_defaults(func=_cmd_crossing)

    probe = subs.add_parser("delta-probe",
                            help="bound-gap table over noise rates")
    _add_scan_flags(probe)
    probe.set_defaults(func=_cmd_delta_probe)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoCrossingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
