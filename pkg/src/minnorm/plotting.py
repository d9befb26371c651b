"""SVG figures drawn from experiment CSV files alone."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed series colours; LS branch is black
S_COLOURS = {0.0: "tab:blue", 1.0: "tab:red", 2.0: "gold", 3.0: "tab:purple", 4.0: "tab:green"}
LS_COLOUR = "black"
_EXTRA = ["tab:orange", "tab:brown", "tab:pink", "tab:gray", "tab:olive", "tab:cyan"]


def colour_for(s: float) -> str:
    if s in S_COLOURS:
        return S_COLOURS[s]
    return _EXTRA[int(round(s * 7)) % len(_EXTRA)]


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _num(v):
    if v in ("", None):
        return math.nan
    return float(v)


def _save(fig, out):
    matplotlib.rcParams["svg.hashsalt"] = "minnorm"
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)


def _runge(rows, ax):
    mean = [r for r in rows if r["realization"] == "mean"]
    n = int(mean[0]["n"])
    s_vals = sorted({float(r["s"]) for r in mean})
    ls = [r for r in mean if r["regime"] == "LS" and float(r["s"]) == s_vals[0]]
    ax.semilogy([int(r["p"]) for r in ls], [_num(r["Einf"]) for r in ls], color=LS_COLOUR, label="least squares")
    for s in s_vals:
        mn = [r for r in mean if r["regime"] == "min-norm" and float(r["s"]) == s]
        ker = [r for r in mean if r["regime"] == "kernel" and float(r["s"]) == s]
        c = colour_for(s)
        if mn:
            ax.semilogy([int(r["p"]) for r in mn], [_num(r["Einf"]) for r in mn], color=c, label=f"s={s:g}")
        if ker:
            ax.axhline(_num(ker[0]["Einf"]), color=c, linestyle=":", linewidth=1)
    ax.axvline(n, color="0.5", linestyle="--", linewidth=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("p (number of basis functions)")
    ax.set_ylabel("mean sup error")
    ax.set_title(f"Runge sweep, n={n}")
    ax.legend(fontsize=8)


def _rate(rows, ax):
    good = [r for r in rows if r["status"] in ("ok", "fallback")]
    h = [_num(r["hX"]) for r in good]
    e = [_num(r["Einf"]) for r in good]
    ax.loglog(h, e, "o-", color="black", label="sup error")
    if len(h) >= 2:
        lh = [math.log(v) for v in h]
        le = [math.log(v) for v in e]
        k = len(lh)
        mx, my = sum(lh) / k, sum(le) / k
        slope = sum((a - mx) * (b - my) for a, b in zip(lh, le)) / sum((a - mx) ** 2 for a in lh)
        ax.loglog(h, [math.exp(my + slope * (a - mx)) for a in lh], "--", color="tab:red", label=f"slope {slope:.2f}")
    ax.set_xlabel("mesh norm h_X")
    ax.set_ylabel("sup error")
    ax.set_title(f"Rate study, s={rows[0]['s']}")
    ax.legend(fontsize=8)


def _kernel(rows, ax):
    ps = sorted({int(r["p"]) for r in rows})
    for i, p in enumerate(ps):
        sel = [r for r in rows if int(r["p"]) == p]
        ax.plot([_num(r["t"]) for r in sel], [_num(r["K_p"]) for r in sel], color=_EXTRA[i % len(_EXTRA)], label=f"p={p}")
    sel = [r for r in rows if int(r["p"]) == ps[0]]
    ax.plot([_num(r["t"]) for r in sel], [_num(r["K_ref"]) for r in sel], "k--", label="reference")
    ax.set_xlabel("t")
    ax.set_ylabel("K(t)")
    ax.legend(fontsize=8)


def _near(rows, ax):
    good = [r for r in rows if r["status"] in ("ok", "fallback")]
    ps = sorted({int(r["p"]) for r in good})
    gap = [max(_num(r["gap"]) for r in good if int(r["p"]) == p) for p in ps]
    proj = [_num(next(r for r in good if int(r["p"]) == p)["projection_residual"]) for p in ps]
    ax.semilogy(ps, [max(g, 1e-18) for g in gap], "o-", color="black", label="largest gap")
    ax.semilogy(ps, proj, "s--", color="tab:blue", label="projection residual")
    ax.set_xlabel("p")
    ax.legend(fontsize=8)


def _ntk(rows, ax):
    labels = [f"{r['case']} (n={r['n']})" for r in rows]
    ax.bar(labels, [max(abs(_num(r["ratio"])), 1e-20) for r in rows], color=["tab:red", "tab:green"][: len(rows)])
    ax.set_yscale("log")
    ax.axhline(1e-8, color="0.4", linestyle="--", linewidth=0.8)
    ax.set_ylabel("|lambda_min| / trace")


_DRAW = {
    "runge-sweep": _runge,
    "rate-study": _rate,
    "kernel-eval": _kernel,
    "near-optimal": _near,
    "ntk-check": _ntk,
}


def plot_csv(csv_path, svg_path=None) -> Path:
    """Render the figure for an experiment CSV; returns the SVG path."""
    csv_path = Path(csv_path)
    rows = _read(csv_path)
    if not rows:
        raise ValueError(f"{csv_path} has no rows")
    kind = rows[0]["experiment"]
    svg_path = Path(svg_path) if svg_path else csv_path.with_suffix(".svg")
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    _DRAW[kind](rows, ax)
    fig.tight_layout()
    _save(fig, svg_path)
    return svg_path
