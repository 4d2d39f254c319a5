"""Command-line interface.

Exit status: 0 on success, 1 on a domain error (bad data, unrealizable
input, failed certificate), 2 on a usage error (argparse).
"""

from __future__ import annotations

import argparse
import json
import platform
import shlex
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, adaboost, bench, boost, discrepancy, gamma_vc, lp, realizability
from .base_classes import make_class
from .core import (
    ContractError,
    atomic_write,
    fmt_fraction,
    parse_rational_strict,
    pattern_str,
    read_points_csv,
    read_sample_csv,
)
from .rng import HAVE_NUMBA, Rng


def _rational(text: str) -> Fraction:
    try:
        return parse_rational_strict(text)
    except ContractError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _version() -> str:
    return (
        f"boostlab {__version__} (python {platform.python_version()}, numpy {np.__version__}, "
        f"numba {'yes' if HAVE_NUMBA else 'no'})"
    )


# --- subcommands -----------------------------------------------------------------


def cmd_boost(args) -> int:
    sample = read_sample_csv(args.train)
    cls = make_class(args.cls)
    weak = boost.ExternalLearner(shlex.split(args.learner), args.learner_timeout) if args.learner else None
    model = boost.fit(
        sample, cls, weak=weak, mode=args.mode, rng=Rng(args.seed), max_rounds=args.max_rounds,
        m0=args.m0, gamma=args.gamma, unseen_rule=args.unseen,
    )
    atomic_write(args.model, model.dumps())
    edges = "/".join(str(e) for e in model.edge_history)
    print(f"rounds={model.rounds} cells={len(model.cell_table)} edges={edges}")
    print(f"model: {args.model}")
    return 0


def cmd_adaboost(args) -> int:
    sample = read_sample_csv(args.train)
    model = adaboost.adaboost_fit(sample, make_class(args.cls), args.rounds)
    atomic_write(args.model, model.dumps())
    err = adaboost.majority_training_error(model, sample)
    flag = " (round budget exhausted)" if model.budget_exhausted else ""
    print(f"rounds={model.rounds_used} train_error={err:.6f}{flag}")
    print(f"model: {args.model}")
    return 0


def cmd_predict(args) -> int:
    with open(args.model) as fh:
        data = json.load(fh)
    points = read_points_csv(args.points)
    if "cell_table" in data:
        model = boost.BoostModel.from_json(data)
        preds = boost.predict_many(model, points, args.rule)
    else:
        model = adaboost.MajorityModel.from_json(data)
        preds = [model.predict(x) for x in points]
    text = "label\n" + "".join(f"{p}\n" for p in preds)
    if args.out:
        atomic_write(args.out, text)
        print(f"predictions: {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args) -> int:
    sample = read_sample_csv(args.data)
    cls = make_class(args.cls)
    if args.gamma is not None:
        cert = realizability.is_gamma_realizable(sample, cls, args.gamma)
    else:
        _, cert = realizability.gamma_star(sample, cls)
    if not realizability.verify_certificate(sample, cls, cert):
        raise lp.LPError("certificate failed independent verification")
    path = args.cert or str(Path(args.data).with_suffix(".cert.json"))
    atomic_write(path, cert.dumps())
    if args.gamma is not None:
        print(f"{cert.verdict}, gamma_star={fmt_fraction(cert.gamma_star)}")
    else:
        print(f"gamma_star={fmt_fraction(cert.gamma_star)}")
    print(f"certificate: {path}")
    return 0


def cmd_gamma_vc(args) -> int:
    points = read_points_csv(args.points)
    rep = gamma_vc.gamma_shatter_check(make_class(args.cls), points, args.gamma, stop_at_failure=args.stop_at_failure)
    status = "gamma-shattered" if rep.all_realizable else "not gamma-shattered"
    print(f"{status}: {len(points)} points, worst gamma_star={fmt_fraction(rep.worst_gamma_star)} "
          f"at labeling {pattern_str(rep.worst_labeling)}")
    if args.report:
        atomic_write(args.report, json.dumps(rep.to_json(), indent=2, sort_keys=True) + "\n")
        print(f"report: {args.report}")
    return 0


def cmd_disc(args) -> int:
    if bool(args.sets) == bool(args.points):
        raise ContractError("give exactly one of --sets or --points (with --class)")
    cls = None
    if args.sets:
        system = discrepancy.SetSystem.from_csv(args.sets)
    else:
        if not args.cls:
            raise ContractError("--points needs --class")
        cls = make_class(args.cls)
        points = read_points_csv(args.points)
        system = discrepancy.SetSystem.from_class(cls, points)
    coloring, value = discrepancy.min_discrepancy_coloring(system, args.method)
    print(f"disc={value} normalized={fmt_fraction(Fraction(value, max(system.n, 1)))} "
          f"coloring={pattern_str(coloring)} sets={len(system.sets)} n={system.n}")
    if cls is not None:
        bound = discrepancy.coloring_to_gamma_bound(cls, points, coloring)
        edge = discrepancy.uniform_edge(cls, points, coloring)
        print(f"uniform_edge={fmt_fraction(edge)} disc_bound={fmt_fraction(bound)}")
    return 0


def cmd_bench(args) -> int:
    cfg = bench.ExperimentConfig.load(args.config)
    written = bench.run_config(cfg, output=args.out, plots=not args.no_plots)
    print(f"results: {written['csv']}")
    if "timings" in written:
        print(f"timings: {written['timings']}")
    for fig in written.get("figures", []):
        print(f"figure: {fig}")
    if written.get("failed"):
        print(f"{written['failed']} cell(s) failed; see the status column", file=sys.stderr)
        return 1
    return 0


def cmd_plot(args) -> int:
    from .plotting import detect_experiment, plot_results

    first = args.results[0]
    kind = args.experiment or detect_experiment(first)
    for fig in plot_results(first, kind, extra=args.results[1:]):
        print(f"figure: {fig}")
    return 0


def cmd_selftest(args) -> int:
    from . import selftest

    return 0 if selftest.run() else 1


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="boostlab", description="Graph separation boosting with exact gamma-realizability certificates."
    )
    p.add_argument("--version", action="version", version=_version())
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cls_arg(sp, required=True):
        sp.add_argument("--class", dest="cls", required=required,
                        help="thresholds | stumpsD | halfspacesD (D<=3) | finite:PATH")

    sp = sub.add_parser("boost", help="fit graph separation boosting")
    cls_arg(sp)
    sp.add_argument("--train", required=True, help="CSV with header x_1..x_d,label")
    sp.add_argument("--model", required=True, help="output model JSON")
    sp.add_argument("--mode", choices=[boost.FULL_ERM, boost.SAMPLED], default=boost.FULL_ERM)
    sp.add_argument("--max-rounds", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--gamma", type=_rational, help="edge parameter p/q (sampled m0, round budget)")
    sp.add_argument("--m0", type=int, help="draws per round in sampled mode")
    sp.add_argument("--unseen", choices=[boost.UNSEEN_NEGATIVE, boost.UNSEEN_NEAREST], default=boost.UNSEEN_NEGATIVE)
    sp.add_argument("--learner", help="external weak learner command (run once per round)")
    sp.add_argument("--learner-timeout", type=float, default=60.0)
    sp.set_defaults(func=cmd_boost)

    sp = sub.add_parser("adaboost", help="fit the AdaBoost baseline")
    cls_arg(sp)
    sp.add_argument("--train", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--rounds", type=int, default=1000, help="round budget")
    sp.set_defaults(func=cmd_adaboost)

    sp = sub.add_parser("predict", help="predict with a saved model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--points", required=True, help="CSV with header x_1..x_d (label column ignored)")
    sp.add_argument("--out")
    sp.add_argument("--rule", choices=[boost.UNSEEN_NEGATIVE, boost.UNSEEN_NEAREST])
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("check", help="exact gamma* and a verified certificate")
    cls_arg(sp)
    sp.add_argument("--data", required=True)
    sp.add_argument("--gamma", type=_rational, help="query value as p/q")
    sp.add_argument("--cert", help="certificate path (default: DATA.cert.json)")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("gamma-vc", help="check that a point set is gamma-shattered")
    cls_arg(sp)
    sp.add_argument("--points", required=True)
    sp.add_argument("--gamma", type=_rational, required=True)
    sp.add_argument("--report")
    sp.add_argument("--stop-at-failure", action="store_true")
    sp.set_defaults(func=cmd_gamma_vc)

    sp = sub.add_parser("disc", help="minimum-discrepancy coloring")
    cls_arg(sp, required=False)
    sp.add_argument("--sets", help="set-system CSV (first line n=N)")
    sp.add_argument("--points", help="points whose class supports form the set system")
    sp.add_argument("--method", choices=["auto", "exhaustive", "branch"], default="auto")
    sp.set_defaults(func=cmd_disc)

    sp = sub.add_parser("bench", help="run an experiment config; writes CSV and SVG figures")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help="override the config's output path")
    sp.add_argument("--no-plots", action="store_true")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("plot", help="render SVG figures for result CSVs")
    sp.add_argument("results", nargs="+")
    sp.add_argument("--experiment", choices=list(bench.EXPERIMENTS))
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("selftest", help="fast invariant checks")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_rounds", None) is not None and args.max_rounds < 1:
        parser.error("--max-rounds must be at least 1")
    try:
        return args.func(args)
    except (ContractError, boost.BoostError, lp.LPError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
