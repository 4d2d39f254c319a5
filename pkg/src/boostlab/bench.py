"""Seeded experiment harness: task families, suites, and the halfspace grid probe.

Every run is a pure function of (config, seed).  Result CSVs hold only
deterministic columns; wall-clock times go to a separate ``*.timings.csv``
so that rerunning a config reproduces the results file byte for byte.

Config schema (JSON object)::

    experiment   "suite" (default) | "grid-probe" | "comparison"
    family       alternating-thresholds | k-sign-changes | grid-random-labels
                 | finite-class-mixture
    params       family parameters: m; k; n, d, labeling ("random"|"xor");
                 gamma, s
    class        base class spec ("thresholds", "stumps2", ...) or "auto"
    algorithms   list of "graph-boost" and/or "adaboost"
    mode         "full-erm" (default) | "sampled"
    m_test       held-out draws per run (default 200)
    gamma        optional edge parameter "p/q" (sampled m0, round budget)
    m0           optional explicit sampled-mode draw count
    seeds        nonempty list of unsigned integers
    max_rounds   optional round cap for graph boosting
    adaboost_budget  round budget for AdaBoost (default 2000)
    delta        nominal confidence, carried into the output only
    output       results CSV path
    ns           grid sizes for "grid-probe"; ms for "comparison"
    samples      sampled labelings per grid size beyond exhaustive range
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import adaboost, boost
from .base_classes import Halfspaces, Thresholds1D, make_class
from .core import ContractError, LabeledSample, atomic_write, fmt_fraction, pattern_str, to_fraction
from .gamma_vc import hadamard_class, labelings_up_to_negation
from .realizability import gamma_star
from .rng import Rng, derive

FAMILIES = ("alternating-thresholds", "k-sign-changes", "grid-random-labels", "finite-class-mixture")
ALGORITHMS = ("graph-boost", "adaboost")
EXPERIMENTS = ("suite", "grid-probe", "comparison")
GRID_EXHAUSTIVE_POINTS = 9

RESULT_COLUMNS = [
    "cell", "algorithm", "seed", "family", "m", "class", "mode", "gamma_star",
    "rounds", "oracle_calls", "train_error", "test_error", "bound_exact", "bound_simple",
    "edge_counts", "status",
]


@dataclass
class ExperimentConfig:
    family: str = "alternating-thresholds"
    params: dict = field(default_factory=dict)
    cls: str = "auto"
    algorithms: list = field(default_factory=lambda: ["graph-boost"])
    mode: str = boost.FULL_ERM
    m_test: int = 200
    gamma: str | None = None
    m0: int | None = None
    seeds: list = field(default_factory=lambda: [0])
    max_rounds: int | None = None
    adaboost_budget: int = 2000
    delta: str = "1/20"
    output: str | None = None
    experiment: str = "suite"
    ns: list = field(default_factory=lambda: [2, 3])
    ms: list = field(default_factory=lambda: [4, 8, 16])
    samples: int = 256

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | os.PathLike | None = None) -> "ExperimentConfig":
        d = dict(d)
        if "class" in d:
            d["cls"] = d.pop("class")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ContractError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        if cfg.output and base_dir is not None and not os.path.isabs(cfg.output):
            cfg.output = str(Path(base_dir) / cfg.output)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContractError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ContractError(f"{path}: config must be a JSON object")
        return cls.from_dict(data, base_dir=Path(path).parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class"] = d.pop("cls")
        return d

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ContractError(f"experiment must be one of {EXPERIMENTS}")
        if not self.seeds:
            raise ContractError("seeds must be a nonempty list")
        for s in self.seeds:
            if not isinstance(s, int) or not 0 <= s < 2**64:
                raise ContractError(f"seed {s!r} is not an unsigned 64-bit integer")
        if self.experiment == "grid-probe":
            return
        if self.family not in FAMILIES:
            raise ContractError(f"family must be one of {FAMILIES}, got {self.family!r}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ContractError(f"unknown algorithm {a!r}")
        if not self.algorithms:
            raise ContractError("algorithms must be nonempty")
        if self.mode not in (boost.FULL_ERM, boost.SAMPLED):
            raise ContractError(f"unknown mode {self.mode!r}")
        if self.m_test < 0:
            raise ContractError("m_test must be nonnegative")
        if self.gamma is not None:
            g = to_fraction(self.gamma)
            if not 0 < g <= 1:
                raise ContractError("gamma must lie in (0, 1]")
        if self.mode == boost.SAMPLED and self.gamma is None and self.m0 is None:
            raise ContractError("sampled mode needs gamma or m0")


# --- task families -------------------------------------------------------------


@dataclass
class Task:
    train: LabeledSample
    test: LabeledSample | None
    cls: object
    meta: dict


def _param(params: dict, key: str, default=None):
    if key in params:
        return params[key]
    if default is None:
        raise ContractError(f"missing family parameter {key!r}")
    return default


def _piecewise_task(m: int, cuts: list, m_test: int, rng: Rng) -> tuple:
    """Points 0..m-1; the label flips after every index in ``cuts``.

    Held-out points are uniform on [-1/2, m - 1/2) and take the label of the
    nearest training point (ties to the right), so the target is the same
    step function the training labels sample.
    """
    cuts = sorted(cuts)

    def label(i: int) -> int:
        flips = sum(1 for c in cuts if c < i)
        return 1 if flips % 2 == 0 else -1

    train = LabeledSample([(i,) for i in range(m)], [label(i) for i in range(m)])
    xs = [Fraction(rng.random()) * m - Fraction(1, 2) for _ in range(m_test)]
    test = None
    if xs:
        test = LabeledSample([(x,) for x in xs], [label(math.floor(x + Fraction(1, 2))) for x in xs])
    return train, test


def generate_task(family: str, params: dict, rng: Rng, m_test: int = 200, cls_spec: str = "auto") -> Task:
    if family == "alternating-thresholds":
        m = int(_param(params, "m"))
        if m < 1:
            raise ContractError("m must be positive")
        train, test = _piecewise_task(m, list(range(m - 1)), m_test, rng)
        cls = Thresholds1D()
    elif family == "k-sign-changes":
        m, k = int(_param(params, "m")), int(_param(params, "k"))
        if not 0 <= k < m:
            raise ContractError("k-sign-changes needs 0 <= k < m")
        positions = list(range(m - 1))
        rng.shuffle(positions)
        train, test = _piecewise_task(m, positions[:k], m_test, rng)
        cls = Thresholds1D()
    elif family == "grid-random-labels":
        n, d = int(_param(params, "n")), int(_param(params, "d", 2))
        if n < 1 or not 1 <= d <= 3:
            raise ContractError("grid-random-labels needs n >= 1 and 1 <= d <= 3")
        pts = [tuple(int(v) for v in p) for p in np.ndindex(*([n] * d))]
        how = params.get("labeling", "random")
        if how == "random":
            labs = [1 if rng.next_u64() >> 63 else -1 for _ in pts]
        elif how == "xor":
            labs = [1 if sum(p) % 2 == 0 else -1 for p in pts]
        else:
            raise ContractError(f"unknown grid labeling {how!r}")
        train = LabeledSample(pts, labs)
        idx = [rng.randbelow(len(pts)) for _ in range(m_test)]
        test = LabeledSample([pts[i] for i in idx], [labs[i] for i in idx]) if idx else None
        cls = Halfspaces(d)
    elif family == "finite-class-mixture":
        g = to_fraction(_param(params, "gamma"))
        s = int(params.get("s", 1))
        if not 0 < g <= 1:
            raise ContractError("finite-class-mixture needs 0 < gamma <= 1")
        # largest power of two t with 1/sqrt(t) >= gamma, at least 2
        t = 2
        while t * 2 <= 16 and Fraction(1, t * 2) >= g * g:
            t *= 2
        cls = hadamard_class(t, s)
        n = s * t
        pts = [(i,) for i in range(n)]
        labs = [1 if rng.next_u64() >> 63 else -1 for _ in pts]
        train = LabeledSample(pts, labs)
        idx = [rng.randbelow(n) for _ in range(m_test)]
        test = LabeledSample([pts[i] for i in idx], [labs[i] for i in idx]) if idx else None
    else:
        raise ContractError(f"unknown family {family!r}")
    if cls_spec not in ("auto", None, ""):
        if family == "finite-class-mixture":
            raise ContractError("finite-class-mixture fixes its own class; use class 'auto'")
        cls = make_class(cls_spec)
        if cls.dim != train.dim:
            raise ContractError(f"class {cls_spec} has dimension {cls.dim}, task has {train.dim}")
    value, _ = gamma_star(train, cls)
    meta = {"family": family, "m": len(train), "class": cls.name, "gamma_star": value}
    return Task(train, test, cls, meta)


# --- suites --------------------------------------------------------------------


@dataclass
class RunRecord:
    cell: int
    algorithm: str
    seed: int
    family: str
    m: int
    cls: str
    mode: str
    gamma_star: Fraction | None
    rounds: int | str | None
    oracle_calls: int | None
    train_error: float | None
    test_error: float | None
    bound_exact: float | None
    bound_simple: float | None
    edge_counts: tuple = ()
    status: str = "ok"
    wall_time: float = 0.0

    def row(self) -> list:
        def f(x):
            return "" if x is None else f"{x:.6f}"

        return [
            self.cell, self.algorithm, self.seed, self.family, self.m, self.cls, self.mode,
            "" if self.gamma_star is None else fmt_fraction(self.gamma_star),
            "" if self.rounds is None else self.rounds,
            "" if self.oracle_calls is None else self.oracle_calls,
            f(self.train_error), f(self.test_error), f(self.bound_exact), f(self.bound_simple),
            "/".join(str(e) for e in self.edge_counts), self.status,
        ]


def _error(predict, sample) -> float | None:
    if sample is None or len(sample) == 0:
        return None
    wrong = sum(predict(x) != y for x, y in zip(sample.points, sample.labels))
    return wrong / len(sample)


def run_cell(cfg: ExperimentConfig, cell: int, algorithm: str, seed: int) -> RunRecord:
    """One (algorithm, seed) run; failures come back as a record with status."""
    start = time.perf_counter()
    rec = RunRecord(cell, algorithm, seed, cfg.family, 0, cfg.cls, cfg.mode, None, None, None, None, None, None, None)
    try:
        task = generate_task(cfg.family, cfg.params, Rng(derive(seed, 1)), cfg.m_test, cfg.cls)
        m = len(task.train)
        gs = task.meta["gamma_star"]
        rec.m, rec.cls, rec.gamma_star = m, task.cls.name, gs
        if gs > 0:
            rec.bound_exact = boost.round_bound_exact(m, gs)
            rec.bound_simple = boost.round_bound_simple(m, gs) if m > 1 else 0.0
        if algorithm == "graph-boost":
            gamma = to_fraction(cfg.gamma) if cfg.gamma is not None else (gs if cfg.mode == boost.SAMPLED else None)
            trace = boost.FitTrace()
            model = boost.fit(
                task.train, task.cls, mode=cfg.mode, rng=Rng(derive(seed, 2)), max_rounds=cfg.max_rounds,
                m0=cfg.m0, gamma=gamma, gamma_star=gs if cfg.mode == boost.FULL_ERM else None, trace=trace,
            )
            rec.rounds = rec.oracle_calls = model.rounds
            rec.edge_counts = model.edge_history
            rec.train_error = _error(lambda x: boost.predict(model, x), task.train)
            rec.test_error = _error(lambda x: boost.predict(model, x), task.test)
            _check_record(rec)
        else:
            rec.mode = "majority"
            model = adaboost.adaboost_fit(task.train, task.cls, cfg.adaboost_budget)
            rec.oracle_calls = model.rounds_used
            rec.rounds = model.rounds_used if model.reached_zero_error else adaboost.EXCEEDED
            rec.train_error = _error(model.predict, task.train)
            rec.test_error = _error(model.predict, task.test)
    except (ContractError, boost.BoostError, boost.InvariantViolation, AssertionError) as exc:
        rec.status = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    rec.wall_time = time.perf_counter() - start
    return rec


def _check_record(rec: RunRecord) -> None:
    if rec.train_error != 0:
        raise boost.InvariantViolation("graph boosting finished with nonzero training error")
    e = rec.edge_counts
    if rec.mode == boost.FULL_ERM and any(b >= a for a, b in zip(e, e[1:])):
        raise boost.InvariantViolation(f"edge counts not strictly decreasing: {e}")


def _workers(n_cells: int) -> int:
    env = os.environ.get("BOOSTLAB_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError as exc:
            raise ContractError(f"BOOSTLAB_THREADS must be an integer, got {env!r}") from exc
    return max(1, min(cap, n_cells))


def _run_cell_args(args):
    return run_cell(*args)


def run_suite(cfg: ExperimentConfig) -> list:
    """All (algorithm, seed) cells, in config order regardless of worker count."""
    cfg.validate()
    jobs = [(cfg, k, a, s) for k, (a, s) in enumerate((a, s) for a in cfg.algorithms for s in cfg.seeds)]
    workers = _workers(len(jobs))
    if workers == 1:
        return [_run_cell_args(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_args, jobs))


def _quantile(values: list, q: float) -> float:
    return float(np.quantile(np.array(values, dtype=np.float64), q, method="lower"))


def summary_rows(records: list) -> list:
    rows = []
    for alg in dict.fromkeys(r.algorithm for r in records):
        rs = [r for r in records if r.algorithm == alg and r.status == "ok"]
        rounds = [r.rounds for r in rs if isinstance(r.rounds, int)]
        tests = [r.test_error for r in rs if r.test_error is not None]
        rows.append([
            "summary", alg, len(rs), f"failed={sum(1 for r in records if r.algorithm == alg) - len(rs)}",
            f"mean_T={statistics.fmean(rounds):.6f}" if rounds else "mean_T=",
            f"median_T={statistics.median(rounds)}" if rounds else "median_T=",
            f"exceeded={sum(1 for r in rs if r.rounds == adaboost.EXCEEDED)}",
            f"test_q10={_quantile(tests, 0.1):.6f}" if tests else "test_q10=",
            f"test_q50={_quantile(tests, 0.5):.6f}" if tests else "test_q50=",
            f"test_q90={_quantile(tests, 0.9):.6f}" if tests else "test_q90=",
        ])
    return rows


def results_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow(r.row())
    for row in summary_rows(records):
        w.writerow(row)
    return buf.getvalue()


def timings_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell", "algorithm", "seed", "wall_time_s"])
    for r in records:
        w.writerow([r.cell, r.algorithm, r.seed, f"{r.wall_time:.6f}"])
    return buf.getvalue()


def timings_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".timings.csv")


# --- comparison table ----------------------------------------------------------


COMPARISON_COLUMNS = ["m", "gamma_star", "graph_rounds", "bound_simple", "within_bound", "adaboost_rounds"]


def comparison_table(ms, adaboost_budget: int = 2000) -> list:
    """Graph boosting (full ERM) vs AdaBoost rounds on alternating thresholds."""
    rows = []
    for m in ms:
        task = generate_task("alternating-thresholds", {"m": m}, Rng(0), m_test=0)
        gs = task.meta["gamma_star"]
        model = boost.fit(task.train, task.cls, gamma_star=gs)
        bound = boost.round_bound_simple(m, gs) if m > 1 else 0.0
        ada = adaboost.rounds_to_zero_error(task.train, task.cls, adaboost_budget)
        rows.append([m, fmt_fraction(gs), model.rounds, f"{bound:.6f}", model.rounds <= bound, ada])
    return rows


def table_csv(columns: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


# --- halfspace grid probe --------------------------------------------------------


PROBE_COLUMNS = ["n", "d", "points", "labelings", "exact", "min_gamma_star", "worst_labeling"]


@dataclass
class ProbeRow:
    n: int
    d: int
    points: int
    labelings: int
    exact: bool
    min_gamma_star: Fraction
    worst_labeling: tuple
    wall_time: float

    def row(self) -> list:
        return [self.n, self.d, self.points, self.labelings, self.exact,
                fmt_fraction(self.min_gamma_star), pattern_str(self.worst_labeling)]


def halfspace_grid_probe(ns, d: int = 2, samples: int = 256, seed: int = 0) -> list:
    """Minimum gamma* over labelings of the n^d grid under d-dimensional halfspaces.

    Grids with at most nine points are scanned exhaustively (labelings up to
    global negation, which leaves gamma* unchanged); larger grids use
    ``samples`` seeded random labelings and report a sampled minimum.
    """
    cls = Halfspaces(d)
    out = []
    for n in ns:
        if n < 1:
            raise ContractError("grid size must be positive")
        start = time.perf_counter()
        pts = [tuple(int(v) for v in p) for p in np.ndindex(*([n] * d))]
        N = len(pts)
        exact = N <= GRID_EXHAUSTIVE_POINTS
        if exact:
            labelings = list(labelings_up_to_negation(N))
        else:
            rng = Rng(derive(seed, n, d))
            labelings = [(1,) + tuple(1 if rng.next_u64() >> 63 else -1 for _ in range(N - 1)) for _ in range(samples)]
        best, worst = None, None
        for lab in labelings:
            v, _ = gamma_star(LabeledSample(pts, lab), cls)
            if best is None or v < best:
                best, worst = v, lab
        out.append(ProbeRow(n, d, N, len(labelings), exact, best, worst, time.perf_counter() - start))
    return out


# --- entry point used by the CLI -------------------------------------------------


def run_config(cfg: ExperimentConfig, output=None, plots: bool = True) -> dict:
    """Run whatever the config describes and write CSV (+ timings, + SVG)."""
    output = output or cfg.output
    if not output:
        raise ContractError("no output path: set 'output' in the config or pass --out")
    written = {"csv": str(output)}
    if cfg.experiment == "suite":
        records = run_suite(cfg)
        atomic_write(output, results_csv(records))
        atomic_write(timings_path(output), timings_csv(records))
        written["timings"] = str(timings_path(output))
        written["failed"] = sum(1 for r in records if r.status != "ok")
    elif cfg.experiment == "comparison":
        rows = comparison_table(cfg.ms, cfg.adaboost_budget)
        atomic_write(output, table_csv(COMPARISON_COLUMNS, rows))
    else:
        rows = halfspace_grid_probe(cfg.ns, int(cfg.params.get("d", 2)), cfg.samples, cfg.seeds[0])
        atomic_write(output, table_csv(PROBE_COLUMNS, [r.row() for r in rows]))
        atomic_write(
            timings_path(output),
            table_csv(["n", "wall_time_s"], [[r.n, f"{r.wall_time:.6f}"] for r in rows]),
        )
        written["timings"] = str(timings_path(output))
    if plots:
        from .plotting import plot_results

        written["figures"] = [str(p) for p in plot_results(output, cfg.experiment)]
    return written
