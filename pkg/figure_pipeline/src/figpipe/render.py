"""Figure rendering from scan CSVs.

Four figure kinds:

- ``ee-curves``: half-chain or ancilla entanglement entropy versus p,
  one error-bar curve per (estimator, L, eta).
- ``decoding``: decoding correlation versus p per (L, eta).
- ``bound-fan``: the per-epsilon upper and lower entropy-bound curves for
  the largest size at the smallest noise rate, with both envelopes drawn
  on top.
- ``bound-comparison``: decoding correlation, both bound envelopes, and
  the diagnostic ancilla entropy overlaid per size, with a vertical line
  at the self-dual point p = 0.5.

Rendering is a pure function of the input CSVs: figures carry no
timestamps, so re-running on identical inputs reproduces identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .data import SchemaError, curve, load_rows, require, values_of

KINDS = ("ee-curves", "decoding", "bound-fan", "bound-comparison")

STYLE = {
    "figure.figsize": (5.2, 3.6),
    "figure.dpi": 160,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "svg.hashsalt": "figpipe",
}


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple
    kind: str
    out: str
    style: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def _errorbar(ax, pts, label, **kw):
    ps = [q[0] for q in pts]
    ms = [q[1] for q in pts]
    es = [q[2] for q in pts]
    ax.errorbar(ps, ms, yerr=es, label=label, marker="o", markersize=3,
                capsize=2, linewidth=1.2, **kw)


def _ee_curves(ax, rows) -> None:
    names = [n for n in ("S_half", "S_a") if n in {r.estimator
                                                   for r in rows}]
    if not names:
        raise SchemaError("estimator columns absent: ['S_a', 'S_half']")
    for name in names:
        sel = [r for r in rows if r.estimator == name]
        for L in values_of(sel, "L"):
            for eta in values_of(sel, "eta"):
                pts = curve(sel, name, L=L, eta=eta)
                if pts:
                    _errorbar(ax, pts, f"{name}, L={L}, eta={eta:g}")
    ax.set_ylabel("entanglement entropy")


def _decoding(ax, rows) -> None:
    require(rows, ["R"])
    for L in values_of(rows, "L"):
        for eta in values_of(rows, "eta"):
            pts = curve(rows, "R", L=L, eta=eta)
            if pts:
                _errorbar(ax, pts, f"L={L}, eta={eta:g}")
    ax.set_ylabel("decoding correlation")


def _fan_names(rows):
    est = {r.estimator for r in rows}
    for up, lo in (("S_upper", "S_lower"),
                   ("naive_S_upper", "naive_S_lower")):
        if up in est and f"{up}_env" in est:
            return up, lo, f"{up}_env", f"{lo}_env"
    raise SchemaError(
        "estimator columns absent: ['S_upper', 'S_upper_env']")


def _bound_fan(ax, rows) -> None:
    up, lo, up_env, lo_env = _fan_names(rows)
    L = values_of(rows, "L")[-1]
    eta = values_of(rows, "eta")[0]
    sel = [r for r in rows if r.L == L and abs(r.eta - eta) < 1e-12]
    epsilons = values_of([r for r in sel if r.estimator == up], "epsilon")
    cmap = plt.get_cmap("viridis")
    for i, eps in enumerate(epsilons):
        shade = cmap(i / max(1, len(epsilons) - 1))
        for name, ls in ((up, "-"), (lo, "--")):
            pts = curve(sel, name, epsilon=eps)
            if pts:
                ax.plot([q[0] for q in pts], [q[1] for q in pts],
                        color=shade, linestyle=ls, linewidth=0.8,
                        label=f"eps={eps:g}" if ls == "-" else None)
    for name, label in ((up_env, "upper envelope"),
                        (lo_env, "lower envelope")):
        pts = sorted({(r.p, r.mean, r.stderr) for r in sel
                      if r.estimator == name})
        _errorbar(ax, pts, label, color="black",
                  linestyle="-" if "upper" in label else "--")
    ax.set_ylabel("entropy bound")
    ax.set_title(f"L={L}, eta={eta:g}")


def _bound_comparison(ax, rows) -> None:
    require(rows, ["R", "S_upper_env", "S_lower_env", "S_a"])
    env_etas = values_of([r for r in rows
                          if r.estimator == "S_upper_env"], "eta")
    eta = env_etas[-1]
    sel = [r for r in rows if abs(r.eta - eta) < 1e-12]
    colors = {"R": "tab:red", "S_upper_env": "tab:blue",
              "S_lower_env": "tab:cyan", "S_a": "tab:gray"}
    styles = ["-", "--", ":", "-."]
    for name in ("R", "S_upper_env", "S_lower_env", "S_a"):
        sizes = values_of([r for r in sel if r.estimator == name], "L")
        for i, L in enumerate(sizes):
            pts = sorted({(r.p, r.mean, r.stderr) for r in sel
                          if r.estimator == name and r.L == L})
            _errorbar(ax, pts, f"{name}, L={L}", color=colors[name],
                      linestyle=styles[i % len(styles)])
    ax.axvline(0.5, color="black", linewidth=0.8, alpha=0.6)
    ax.set_ylabel("bound / correlation")
    ax.set_title(f"eta={eta:g}")


_PANELS = {
    "ee-curves": _ee_curves,
    "decoding": _decoding,
    "bound-fan": _bound_fan,
    "bound-comparison": _bound_comparison,
}


def render(spec: FigureSpec) -> str:
    """Render the figure and return the output path."""
    spec.validate()
    rows = load_rows(spec.inputs)
    with plt.rc_context({**STYLE, **spec.style}):
        fig, ax = plt.subplots()
        try:
            _PANELS[spec.kind](ax, rows)
            ax.set_xlabel("p")
            ax.legend(fontsize=6, loc="best")
            fig.tight_layout()
            fig.savefig(spec.out, metadata=_no_date(spec.out))
        finally:
            plt.close(fig)
    return spec.out


def _no_date(path: str) -> dict | None:
    if path.endswith(".svg"):
        return {"Date": None}
    if path.endswith(".pdf"):
        return {"CreationDate": None}
    return None
