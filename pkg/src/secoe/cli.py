"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .correlation import GroupingPlan, correlation_matrix, describe_groups, form_groups
from .dataset import DatasetError, SplitSpec, load_csv, split
from .engine import FailureMask, build_engine, load_engine, predict_batch, save_engine
from .learners import FAMILIES, ClassifierSpec
from .planner import PlanError, EnsemblePlan, random_selection_plan, select_features, validate_plan
from .simlab.experiment import ConfigError, ExperimentConfig, read_results_csv, run_experiment, summarize
from .simlab.plots import render_plots

logger = logging.getLogger("secoe")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _label_col(v: str):
    return int(v) if v.lstrip("-").isdigit() else v


def _add_data_args(p, required=True):
    p.add_argument("--data", type=Path, required=required, help="CSV file with one header row")
    p.add_argument("--label-col", type=_label_col, default=-1,
                   help="label column name or index (default: last column)")
    p.add_argument("--train-fraction", type=float, default=0.85)
    p.add_argument("--split-seed", type=int, default=0)


def _train_split(args):
    ds = load_csv(args.data, args.label_col)
    if getattr(args, "all_rows", False):
        return ds, None
    return split(ds, SplitSpec(args.train_fraction, args.split_seed))


def cmd_analyze(args) -> int:
    train, _ = _train_split(args)
    cm = correlation_matrix(train)
    groups = form_groups(cm)
    args.groups_out.write_text(groups.to_json(), encoding="utf-8")
    if args.matrix_out:
        with open(args.matrix_out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + list(cm.sensor_names))
            for name, row in zip(cm.sensor_names, cm.values):
                w.writerow([name] + [repr(float(v)) for v in row])
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["group", "sensor", "partner", "r", "category"])
    for r in describe_groups(cm, groups):
        w.writerow([r["group"], r["sensor"], r["partner"], f"{r['r']:.4f}", r["category"]])
    logger.info("%d groups written to %s", len(groups.groups), args.groups_out)
    return EXIT_OK


def cmd_plan(args) -> int:
    if args.method == "secoe":
        if not args.groups_file:
            raise UsageError("plan --method secoe needs --groups-file")
        groups = GroupingPlan.load(args.groups_file)
        plan = select_features(groups, args.num_models, allow_below_min=args.allow_below_min)
        sensors = groups.sensors
    else:
        if args.groups_file:
            groups = GroupingPlan.load(args.groups_file)
            sensors = sorted(groups.sensors)
        elif args.num_sensors:
            from .dataset import sensor_names

            sensors = sensor_names(args.num_sensors)
        else:
            raise UsageError("plan --method random_selection needs --groups-file or --num-sensors")
        if args.num_models is None:
            from .planner import min_models

            if not args.groups_file:
                raise UsageError("random_selection without groups needs --num-models")
            n = min_models(groups.largest_size)
        else:
            n = args.num_models
        plan = random_selection_plan(sensors, n, args.seed)
    args.plan_out.write_text(plan.to_json(), encoding="utf-8")
    rep = validate_plan(plan, sensors)
    logger.info("%s plan with %d sub-models: condition (a) %s, condition (b) %s",
                plan.method, plan.num_models, rep.condition_a_ok, rep.condition_b_ok)
    for j, mf in enumerate(plan.model_features):
        print(f"MF{j + 1}\t{','.join(mf)}")
    return EXIT_OK


def cmd_train(args) -> int:
    train, _ = _train_split(args)
    if args.plan_file:
        plan = EnsemblePlan.load(args.plan_file)
    else:
        groups = GroupingPlan.load(args.groups_file) if args.groups_file else form_groups(correlation_matrix(train))
        plan = select_features(groups, args.num_models)
    spec = ClassifierSpec(args.family, {}, args.seed)
    engine = build_engine(train, plan, spec)
    save_engine(engine, args.bundle_out, train, spec)
    logger.info("engine bundle written to %s", args.bundle_out)
    return EXIT_OK


def _read_records(path: Path, sensors: tuple[str, ...], label_col) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise DatasetError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if set(sensors) <= set(header):
        cols = [header.index(s) for s in sensors]
    else:
        cols = list(range(len(header)))
        if label_col is not None and len(header) == len(sensors) + 1:
            li = header.index(label_col) if isinstance(label_col, str) and label_col in header else int(label_col)
            cols.pop(li % len(header))
        if len(cols) != len(sensors):
            raise DatasetError(f"{path}: expected {len(sensors)} sensor columns, found {len(cols)}")
    out = np.full((len(rows) - 1, len(sensors)), np.nan)
    for i, r in enumerate(rows[1:]):
        for j, c in enumerate(cols):
            cell = r[c].strip() if c < len(r) else ""
            if cell:
                try:
                    out[i, j] = float(cell)
                except ValueError:
                    raise DatasetError(f"{path}:{i + 2}: {header[c]!r} is not a number: {cell!r}") from None
    return out


def cmd_predict(args) -> int:
    engine = load_engine(args.bundle)
    mask = FailureMask.of(args.failed)
    records = _read_records(args.records, engine.sensor_names, args.label_col)
    results = predict_batch(engine, records, mask)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["row", "label", "class", "route", "models_used", "imputations"])
        for i, r in enumerate(results):
            w.writerow([i, r.label, engine.class_names[r.label], r.route.value, "+".join(r.models_used),
                        r.imputations])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.data:
        cfg.dataset = args.data
    if args.label_col is not None:
        cfg.label_col = args.label_col
    if args.family:
        cfg.families = tuple(args.family)
    if args.seed is not None:
        cfg.learner_seed = args.seed
    if args.split_seed is not None:
        cfg.split_seed = args.split_seed
    if args.train_fraction:
        cfg.split_fractions = tuple(args.train_fraction)
    cfg.__post_init__()
    report = run_experiment(cfg, args.out)
    for e in report.errors:
        logger.warning("cell error: %s", e)
    logger.info("%d result rows written to %s", len(report.rows), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    report_json = args.results.parent / "report.json"
    if report_json.exists():
        summary = json.loads(report_json.read_text(encoding="utf-8"))["summary"]
    else:
        summary = summarize(read_results_csv(args.results))
    for p in render_plots(summary, args.out):
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="secoe", description="Correlation-based sub-model ensembles for sensor failures.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="correlation matrix and correlated groups")
    _add_data_args(p)
    p.add_argument("--all-rows", action="store_true", help="use every row instead of the training split")
    p.add_argument("--groups-out", type=Path, required=True)
    p.add_argument("--matrix-out", type=Path)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plan", help="sub-model feature sets")
    p.add_argument("--groups-file", type=Path)
    p.add_argument("--method", choices=("secoe", "random_selection"), default="secoe")
    p.add_argument("--num-models", type=int)
    p.add_argument("--num-sensors", type=int)
    p.add_argument("--allow-below-min", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plan-out", type=Path, required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("train", help="train an engine bundle")
    _add_data_args(p)
    p.add_argument("--plan-file", type=Path)
    p.add_argument("--groups-file", type=Path)
    p.add_argument("--num-models", type=int)
    p.add_argument("--family", choices=FAMILIES, default="mlp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bundle-out", type=Path, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict records under a failure mask")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--records", type=Path, required=True)
    p.add_argument("--failed", default="", help="comma-separated failed sensors, e.g. H,B,D")
    p.add_argument("--label-col", type=_label_col, default=None,
                   help="label column to ignore when records carry one")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="run a failure-injection experiment")
    p.add_argument("--config", type=Path, required=True, help="TOML or JSON experiment config")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--data", type=Path)
    p.add_argument("--label-col", type=_label_col)
    p.add_argument("--family", choices=FAMILIES, action="append")
    p.add_argument("--seed", type=int, help="learner seed")
    p.add_argument("--split-seed", type=int)
    p.add_argument("--train-fraction", type=float, action="append")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="re-render plots from results.csv")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, PlanError, ConfigError, FileNotFoundError, KeyError, ValueError,
            json.JSONDecodeError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
