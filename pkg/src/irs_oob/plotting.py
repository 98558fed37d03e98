"""Figure rendering for experiment tables.

Uses the object-oriented matplotlib API (no pyplot global state) so figures
can be produced from worker code and in headless environments.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from irs_oob.experiments import ResultTable

_STYLE = {"X": "-", "Y": "--"}
_MARKERS = {"mc": "o", "analytic": None}


def _color_for(palette: dict, key) -> str:
    # one colour per (sweep value, operator) so mc and analytic curves pair up
    if key not in palette:
        palette[key] = f"C{len(palette) % 10}"
    return palette[key]


def _new_axes(width=6.4, height=4.4):
    fig = Figure(figsize=(width, height))
    ax = fig.add_subplot(1, 1, 1)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _se_curves(table: ResultTable, xcol: str):
    """Group SE rows into ``{(other_key, operator, source): [(x, se)]}``."""
    idx = {c: i for i, c in enumerate(table.columns)}
    curves = defaultdict(list)
    for row in table.rows:
        source = row[idx["source"]]
        if source.startswith("slope_fit"):
            continue
        other = "n_elements" if xcol == "gamma_db" else "gamma_db"
        key = (row[idx[other]], row[idx["operator"]], source)
        curves[key].append((row[idx[xcol]], row[idx["se_bits"]]))
    return curves


def render_se_vs_snr(table: ResultTable, path: Path) -> Path:
    fig, ax = _new_axes()
    colors = {}
    for (n, op, source), pts in sorted(_se_curves(table, "gamma_db").items()):
        x, y = np.array(sorted(pts)).T
        label = f"{op}, N={n} ({source})"
        style = _STYLE[op] if source == "analytic" else ":"
        ax.plot(x, y, style, color=_color_for(colors, (n, op)), marker=_MARKERS[source], markersize=4, label=label)
    ax.set_xlabel("transmit SNR (dB)")
    ax.set_ylabel("ergodic sum-SE (bits/s/Hz)")
    ax.legend(fontsize=7, ncol=2)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    return path


def render_se_vs_n(table: ResultTable, path: Path) -> Path:
    fig, ax = _new_axes()
    colors = {}
    for (g_db, op, source), pts in sorted(_se_curves(table, "n_elements").items()):
        pts = [(n, se) for n, se in sorted(pts) if n > 0]
        x = np.log2([p[0] for p in pts])
        y = [p[1] for p in pts]
        style = _STYLE[op] if source == "analytic" else ":"
        ax.plot(x, y, style, color=_color_for(colors, (g_db, op)), marker=_MARKERS[source], markersize=4,
                label=f"{op}, {g_db:g} dB ({source})")
    idx = {c: i for i, c in enumerate(table.columns)}
    notes = [
        f"{r[idx['operator']]} {r[idx['gamma_db']]:g} dB: slope {r[idx['se_bits']]:.2f}"
        for r in table.rows
        if r[idx["source"]] == "slope_fit"
    ]
    if notes:
        ax.text(0.02, 0.98, "\n".join(notes), transform=ax.transAxes, va="top", fontsize=7)
    ax.set_xlabel("log2(N)")
    ax.set_ylabel("ergodic sum-SE (bits/s/Hz)")
    ax.legend(fontsize=7, loc="lower right")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    return path


def render_ccdf(table: ResultTable, path: Path) -> Path:
    fig, ax = _new_axes()
    by_n = defaultdict(list)
    for n, z, emp, ana, _ in table.rows:
        by_n[n].append((z, emp, ana))
    for n in sorted(by_n):
        z, emp, ana = np.array(by_n[n]).T
        (line,) = ax.plot(z, emp, marker="o", markersize=2, linestyle="none", label=f"N={n} simulated")
        ax.plot(z, ana, color=line.get_color(), label=f"N={n} analytic")
    ax.set_xlabel("gain offset z (linear)")
    ax.set_ylabel("Pr(Z >= z)")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7, ncol=2)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    return path


RENDERERS = {
    "se-vs-snr": render_se_vs_snr,
    "se-vs-n": render_se_vs_n,
    "ccdf": render_ccdf,
}
