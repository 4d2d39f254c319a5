"""SVG line plots of benchmark CSVs (matplotlib, Agg backend, no display).

Figures are written next to the CSV they come from.  The SVG hash salt and
date metadata are pinned so identical CSVs give identical SVG files.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .core import ContractError, atomic_write  # noqa: E402

STYLE = {
    "svg.hashsalt": "boostlab",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.frameon": False,
    "lines.markersize": 4,
}
COLORS = {"graph-boost": "#1f5fa8", "adaboost": "#c0392b"}


def _save(fig, path: Path) -> Path:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())
    return path


def _read(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ContractError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def _suite_points(paths) -> dict:
    """algorithm -> list of (m, gamma_star, rounds) from ok result rows."""
    pts = defaultdict(list)
    for path in paths:
        header, body = _read(path)
        if header[:2] != ["cell", "algorithm"]:
            raise ContractError(f"{path}: not a suite results CSV")
        col = {name: k for k, name in enumerate(header)}
        for row in body:
            if row[0] == "summary" or row[col["status"]] != "ok":
                continue
            try:
                rounds = int(row[col["rounds"]])
            except ValueError:
                continue
            gs = Fraction(row[col["gamma_star"]])
            if gs > 0:
                pts[row[col["algorithm"]]].append((int(row[col["m"]]), gs, rounds))
    return pts


def _bound_lines(ax, xs, ys_simple, ys_half) -> None:
    ax.plot(xs, ys_simple, "k--", lw=1, label=r"$2\ln m/\gamma^*$")
    ax.plot(xs, ys_half, "k:", lw=1, label=r"$4\ln m/\gamma^*$ ($\gamma/2$ edge)")


def plot_suite(paths, out_dir: Path, stem: str) -> list:
    pts = _suite_points(paths)
    if not pts:
        raise ContractError("no completed runs to plot")
    written = []
    with plt.rc_context(STYLE):
        # rounds against sample size
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        by_m = defaultdict(list)
        for alg, rows in sorted(pts.items()):
            groups = defaultdict(list)
            for m, gs, T in rows:
                groups[m].append(T)
                by_m[m].append(gs)
            ms = sorted(groups)
            ax.plot(ms, [sum(groups[m]) / len(groups[m]) for m in ms], "o-", color=COLORS.get(alg), label=f"{alg} (mean T)")
        ms = sorted(by_m)
        gmin = [min(by_m[m]) for m in ms]
        _bound_lines(
            ax, ms,
            [2 * math.log(m) / float(g) for m, g in zip(ms, gmin)],
            [4 * math.log(m) / float(g) for m, g in zip(ms, gmin)],
        )
        ax.set_xlabel("training size m")
        ax.set_ylabel("rounds T")
        ax.legend(fontsize=7)
        fig.tight_layout()
        written.append(_save(fig, out_dir / f"{stem}.T_vs_m.svg"))

        # rounds against the inverse edge
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        all_inv = set()
        for alg, rows in sorted(pts.items()):
            groups = defaultdict(list)
            for m, gs, T in rows:
                groups[1 / gs].append(T)
            inv = sorted(groups)
            all_inv.update((x, m) for m, gs, _ in rows for x in [1 / gs])
            ax.plot([float(x) for x in inv], [sum(groups[x]) / len(groups[x]) for x in inv], "o-",
                    color=COLORS.get(alg), label=f"{alg} (mean T)")
        pairs = sorted(all_inv)
        _bound_lines(
            ax, [float(x) for x, _ in pairs],
            [2 * math.log(m) * float(x) for x, m in pairs],
            [4 * math.log(m) * float(x) for x, m in pairs],
        )
        ax.set_xlabel(r"$1/\gamma^*$")
        ax.set_ylabel("rounds T")
        ax.legend(fontsize=7)
        fig.tight_layout()
        written.append(_save(fig, out_dir / f"{stem}.T_vs_inv_gamma.svg"))
    return written


def plot_comparison(path, out_dir: Path, stem: str) -> list:
    header, body = _read(path)
    col = {name: k for k, name in enumerate(header)}
    ms = [int(r[col["m"]]) for r in body]
    gs = [Fraction(r[col["gamma_star"]]) for r in body]
    graph = [int(r[col["graph_rounds"]]) for r in body]
    ada = [(m, int(r[col["adaboost_rounds"]])) for m, r in zip(ms, body) if r[col["adaboost_rounds"]].isdigit()]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.plot(ms, graph, "o-", color=COLORS["graph-boost"], label="graph-boost T")
        if ada:
            ax.plot([a for a, _ in ada], [b for _, b in ada], "s-", color=COLORS["adaboost"], label="AdaBoost rounds")
        _bound_lines(
            ax, ms,
            [2 * math.log(m) / float(g) for m, g in zip(ms, gs)],
            [4 * math.log(m) / float(g) for m, g in zip(ms, gs)],
        )
        ax.set_xlabel("training size m")
        ax.set_ylabel("weak-learner calls")
        ax.legend(fontsize=7)
        fig.tight_layout()
        return [_save(fig, out_dir / f"{stem}.T_vs_m.svg")]


def plot_probe(path, out_dir: Path, stem: str) -> list:
    header, body = _read(path)
    col = {name: k for k, name in enumerate(header)}
    ns = [int(r[col["n"]]) for r in body]
    vals = [float(Fraction(r[col["min_gamma_star"]])) for r in body]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.plot(ns, vals, "o-", color=COLORS["graph-boost"])
        ax.set_xlabel("grid side n")
        ax.set_ylabel(r"min over labelings of $\gamma^*$")
        ax.set_xticks(ns)
        fig.tight_layout()
        return [_save(fig, out_dir / f"{stem}.gamma_vs_n.svg")]


def plot_results(path, experiment: str = "suite", extra=()) -> list:
    """Render the figures for a results CSV into its directory."""
    path = Path(path)
    out_dir, stem = path.parent, path.stem
    if experiment == "suite":
        return plot_suite([path, *extra], out_dir, stem)
    if experiment == "comparison":
        return plot_comparison(path, out_dir, stem)
    if experiment == "grid-probe":
        return plot_probe(path, out_dir, stem)
    raise ContractError(f"unknown experiment {experiment!r}")


def detect_experiment(path) -> str:
    header, _ = _read(path)
    if header[:2] == ["cell", "algorithm"]:
        return "suite"
    if "graph_rounds" in header:
        return "comparison"
    if "min_gamma_star" in header:
        return "grid-probe"
    raise ContractError(f"{path}: unrecognized results CSV")
