"""Config-driven failure-injection experiments.

A run trains one engine per (approach, learner, split, num_models) cell,
evaluates every configured scenario on it and writes ``results.csv``,
``report.json`` and ``plots/*.svg``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import sys
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..correlation import GroupingPlan, correlation_matrix, form_groups
from ..dataset import Dataset, SplitSpec, load_csv, split
from ..engine import Engine, build_engine, dataset_fingerprint, model_id
from ..learners import ClassifierSpec
from ..planner import EnsemblePlan, min_models, random_selection_plan, select_features
from .metrics import MaskResult, confidence_interval, evaluate, format_route_counts, parse_route_counts
from .scenarios import (
    DEFAULT_RANDOM_FRACTIONS,
    DEFAULT_STATIC_FRACTIONS,
    RANDOM,
    STATIC,
    Scenario,
    generate_random_scenarios,
    generate_static_scenarios,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

APPROACH_SECOE = "secoe"
APPROACH_BASE = "base"
APPROACH_RANDOM = "random_selection"
APPROACHES = (APPROACH_SECOE, APPROACH_BASE, APPROACH_RANDOM)

CSV_COLUMNS = ("approach", "learner", "split", "num_models", "scenario_kind", "fraction", "iteration",
               "accuracy", "imputations", "route_counts")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioSpec:
    kind: str = RANDOM
    fractions: tuple[float, ...] = DEFAULT_RANDOM_FRACTIONS
    iterations: int = 10
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        kind = d.get("kind", RANDOM)
        if kind not in (STATIC, RANDOM):
            raise ConfigError(f"scenario kind must be {STATIC!r} or {RANDOM!r}, got {kind!r}")
        default = DEFAULT_STATIC_FRACTIONS if kind == STATIC else DEFAULT_RANDOM_FRACTIONS
        fr = tuple(float(f) for f in d.get("fractions", default))
        if any(not 0.0 <= f <= 1.0 for f in fr):
            raise ConfigError("failure fractions must lie in [0, 1]")
        it = int(d.get("iterations", 1 if kind == STATIC else 10))
        if it < 1:
            raise ConfigError("iterations must be >= 1")
        return cls(kind, fr, it, int(d.get("seed", 0)))


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass
class ExperimentConfig:
    dataset: Path
    label_col: str | int = -1
    split_fractions: tuple[float, ...] = (0.85,)
    split_seed: int = 0
    families: tuple[str, ...] = ("mlp",)
    learner_seed: int = 0
    hyperparameters: dict = field(default_factory=dict)
    approaches: tuple[str, ...] = APPROACHES
    scenarios: tuple[ScenarioSpec, ...] = (ScenarioSpec(),)
    num_models: tuple[int | None, ...] = (None,)
    groups_file: Path | None = None
    plan_seed: int = 0

    def __post_init__(self):
        bad = [a for a in self.approaches if a not in APPROACHES]
        if bad:
            raise ConfigError(f"unknown approaches {bad}; choose from {APPROACHES}")
        for f in self.split_fractions:
            SplitSpec(f, self.split_seed)
        for fam in self.families:
            ClassifierSpec(fam, dict(self.hyperparameters), self.learner_seed)
        for n in self.num_models:
            if n is not None and n < 1:
                raise ConfigError("num_models entries must be >= 1 or 'min'")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        base_dir = base_dir or Path.cwd()
        if "dataset" not in d:
            raise ConfigError("config needs a 'dataset' entry")

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base_dir / p

        sp = d.get("split", {})
        lr = d.get("learner", {})
        sc = d.get("scenarios", {})
        scs = [ScenarioSpec.from_dict(s) for s in _as_list(sc)] if sc else [ScenarioSpec()]
        nm = tuple(None if (n is None or n == "min") else int(n) for n in _as_list(d.get("num_models", ["min"])))
        groups = d.get("groups_file")
        return cls(
            dataset=resolve(d["dataset"]),
            label_col=d.get("label_col", -1),
            split_fractions=tuple(float(f) for f in _as_list(sp.get("fraction", 0.85))),
            split_seed=int(sp.get("seed", 0)),
            families=tuple(_as_list(lr.get("family", "mlp"))),
            learner_seed=int(lr.get("seed", 0)),
            hyperparameters=dict(lr.get("hyperparameters", {})),
            approaches=tuple(d.get("approaches", APPROACHES)),
            scenarios=tuple(scs),
            num_models=nm,
            groups_file=resolve(groups) if groups else None,
            plan_seed=int(d.get("plan_seed", 0)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json":
            d = json.loads(text)
        else:
            try:
                d = tomllib.loads(text)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(d, path.parent)

    def to_dict(self) -> dict:
        return {
            "dataset": str(self.dataset),
            "label_col": self.label_col,
            "split": {"fraction": list(self.split_fractions), "seed": self.split_seed},
            "learner": {"family": list(self.families), "seed": self.learner_seed,
                        "hyperparameters": self.hyperparameters},
            "approaches": list(self.approaches),
            "scenarios": [vars(s) | {"fractions": list(s.fractions)} for s in self.scenarios],
            "num_models": ["min" if n is None else n for n in self.num_models],
            "groups_file": str(self.groups_file) if self.groups_file else None,
            "plan_seed": self.plan_seed,
        }


@dataclass
class EvaluationReport:
    metadata: dict
    rows: list[dict]
    summary: list[dict]
    models: list[dict] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "summary": self.summary, "models": self.models,
                "errors": self.errors}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def lookup(self, approach: str, kind: str, fraction: float, num_models: int | None = None,
               learner: str | None = None, split_fraction: float | None = None) -> dict:
        """The unique summary entry matching the given cell coordinates."""
        hits = [s for s in self.summary
                if s["approach"] == approach and s["scenario_kind"] == kind
                and abs(s["fraction"] - fraction) < 1e-9
                and (num_models is None or s["num_models"] == num_models)
                and (learner is None or s["learner"] == learner)
                and (split_fraction is None or abs(s["split"] - split_fraction) < 1e-9)]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} summary entries match {approach}/{kind}/{fraction}/{num_models}")
        return hits[0]


def _row(approach, learner, split_fraction, num_models, kind, fraction, iteration, res: MaskResult) -> dict:
    return {
        "approach": approach,
        "learner": learner,
        "split": split_fraction,
        "num_models": num_models,
        "scenario_kind": kind,
        "fraction": fraction,
        "iteration": iteration,
        "accuracy": res.accuracy,
        "imputations": res.imputations,
        "route_counts": format_route_counts(res.route_counts),
    }


def summarize(rows: Sequence[dict], static_correct: dict | None = None) -> list[dict]:
    """Aggregate per-mask rows into mean accuracy, CI and imputations.

    Random scenarios take the interval over iterations; a single static mask
    takes it over per-record correctness (``static_correct``).
    """
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for r in rows:
        key = (r["approach"], r["learner"], float(r["split"]), int(r["num_models"]), r["scenario_kind"],
               float(r["fraction"]))
        groups[key].append(r)
    out = []
    for key in sorted(groups):
        rs = groups[key]
        accs = [float(r["accuracy"]) for r in rs]
        if len(accs) >= 2:
            mean, half = confidence_interval(accs)
        elif static_correct is not None and key in static_correct and static_correct[key].size >= 2:
            mean = accs[0]
            half = confidence_interval(static_correct[key])[1]
        else:
            mean, half = accs[0], 0.0
        routes = Counter()
        for r in rs:
            routes.update(parse_route_counts(r["route_counts"]) if isinstance(r["route_counts"], str)
                          else r["route_counts"])
        out.append({
            "approach": key[0], "learner": key[1], "split": key[2], "num_models": key[3],
            "scenario_kind": key[4], "fraction": key[5], "n_masks": len(rs),
            "mean_accuracy": mean, "ci_half_width": half,
            "mean_imputations": float(np.mean([float(r["imputations"]) for r in rs])),
            "routes": dict(sorted(routes.items())),
        })
    return out


def _scenarios_for(spec: ScenarioSpec, secoe_plan: EnsemblePlan, names) -> list[Scenario]:
    if spec.kind == STATIC:
        return generate_static_scenarios(secoe_plan, spec.fractions, names)
    return generate_random_scenarios(names, spec.fractions, spec.iterations, spec.seed)


def _model_accuracies(engine: Engine, test: Dataset) -> list[dict]:
    out = [{"model": "base", "features": "".join(engine.sensor_names),
            "test_accuracy": float(np.mean(engine.base_model.predict_matrix(test.features) == test.labels)),
            "training_accuracy": engine.base_model.training_accuracy}]
    for j, m in enumerate(engine.sub_models):
        acc = float(np.mean(m.predict_matrix(test.columns(m.feature_subset)) == test.labels))
        out.append({"model": model_id(j), "features": "".join(m.feature_subset), "test_accuracy": acc,
                    "training_accuracy": m.training_accuracy})
    return out


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None,
                   dataset: Dataset | None = None) -> EvaluationReport:
    if dataset is None:
        dataset = load_csv(config.dataset, config.label_col)
    fixed_groups = GroupingPlan.load(config.groups_file) if config.groups_file else None
    rows: list[dict] = []
    models: list[dict] = []
    errors: list[dict] = []
    static_correct: dict[tuple, np.ndarray] = {}
    plans_meta: list[dict] = []

    for split_fraction in config.split_fractions:
        train, test = split(dataset, SplitSpec(split_fraction, config.split_seed))
        for family in config.families:
            spec = ClassifierSpec(family, dict(config.hyperparameters), config.learner_seed)
            try:
                groups = fixed_groups or form_groups(correlation_matrix(train))
                minm = min_models(groups.largest_size)
                minm_plan = select_features(groups, minm)
            except Exception as exc:  # a planning failure voids every cell of this (split, learner)
                logger.exception("planning failed for split=%s learner=%s", split_fraction, family)
                errors.append({"split": split_fraction, "learner": family, "stage": "plan", "error": repr(exc)})
                continue
            scenarios = [s for sp in config.scenarios for s in _scenarios_for(sp, minm_plan, train.sensor_names)]
            plans_meta.append({"split": split_fraction, "learner": family,
                               "groups": [list(g) for g in groups.groups], "min_models": minm})
            base_model = None
            for approach in config.approaches:
                counts = [0] if approach == APPROACH_BASE else [minm if n is None else n for n in config.num_models]
                for n_models in counts:
                    cell = {"approach": approach, "learner": family, "split": split_fraction,
                            "num_models": n_models}
                    try:
                        if approach == APPROACH_SECOE:
                            plan = select_features(groups, n_models, allow_below_min=True)
                        elif approach == APPROACH_RANDOM:
                            plan = random_selection_plan(train.sensor_names, n_models, config.plan_seed, minm)
                        else:
                            plan = EnsemblePlan((), minm)
                        engine = build_engine(train, plan, spec, base_model)
                        base_model = engine.base_model
                        models.append({**cell, "plan": plan.to_dict(), "accuracies": _model_accuracies(engine, test)})
                        for sc in scenarios:
                            if not sc.feasible:
                                errors.append({**cell, "stage": "scenario", "scenario_kind": sc.kind,
                                               "fraction": sc.fraction, "error": "infeasible static scenario"})
                                continue
                            for it, res in enumerate(evaluate(engine, test, sc)):
                                rows.append(_row(approach, family, split_fraction, n_models, sc.kind,
                                                 sc.fraction, it, res))
                                if sc.kind == STATIC:
                                    key = (approach, family, float(split_fraction), int(n_models), STATIC,
                                           float(sc.fraction))
                                    static_correct[key] = res.correct.astype(np.float64)
                    except Exception as exc:
                        logger.exception("cell %s failed", cell)
                        errors.append({**cell, "stage": "cell", "error": repr(exc)})

    report = EvaluationReport(
        metadata={
            "dataset": str(config.dataset),
            "dataset_fingerprint": dataset_fingerprint(dataset),
            "n_samples": dataset.n_samples,
            "n_sensors": dataset.n_sensors,
            "class_names": list(dataset.class_names),
            "config": config.to_dict(),
            "plans": plans_meta,
        },
        rows=rows,
        summary=summarize(rows, static_correct),
        models=models,
        errors=errors,
    )
    if out_dir is not None:
        write_outputs(report, out_dir)
    return report


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_results_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["split"] = float(r["split"])
        r["num_models"] = int(r["num_models"])
        r["fraction"] = float(r["fraction"])
        r["iteration"] = int(r["iteration"])
        r["accuracy"] = float(r["accuracy"])
        r["imputations"] = float(r["imputations"])
    return rows


def write_outputs(report: EvaluationReport, out_dir: str | Path) -> Path:
    from .plots import render_plots

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(rows_to_csv(report.rows), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    render_plots(report.summary, out / "plots")
    return out
