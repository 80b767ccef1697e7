"""Ensemble construction and failure-aware prediction routing.

With no failed sensors the base model (trained on every sensor) answers.
Otherwise the sub-models whose feature sets overlap the failed set the
least are "suitable": one suitable model answers alone, two defer to the
one with the higher training accuracy, three or more take a plurality vote.
Failed sensors that an executing model still needs are mean-imputed in raw
units before that model standardizes its input.
"""
from __future__ import annotations

import enum
import hashlib
import json
import logging
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .learners import ClassifierSpec, TrainedModel, fit, load_model, save_model
from .planner import EnsemblePlan

logger = logging.getLogger(__name__)

BUNDLE_VERSION = 1
BASE = "base"


class Route(enum.Enum):
    BASE = "Base"
    SINGLE_SUB = "SingleSub"
    TWO_SUB_TIE_BREAK = "TwoSubTieBreak"
    MAJORITY_VOTE = "MajorityVote"


@dataclass(frozen=True)
class FailureMask:
    failed: frozenset = frozenset()

    @classmethod
    def of(cls, sensors: Iterable[str] | str) -> "FailureMask":
        if isinstance(sensors, str):
            sensors = [s.strip() for s in sensors.split(",") if s.strip()]
        return cls(frozenset(sensors))

    def __len__(self):
        return len(self.failed)

    def __str__(self):
        return ",".join(sorted(self.failed))


@dataclass(frozen=True)
class PredictionResult:
    label: int
    models_used: tuple[str, ...]
    imputations: int
    route: Route


def model_id(j: int) -> str:
    return f"MF{j + 1}"


def derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class Engine:
    base_model: TrainedModel
    sub_models: tuple[TrainedModel, ...]
    plan: EnsemblePlan
    class_names: tuple[str, ...]
    sensor_names: tuple[str, ...]

    def __post_init__(self):
        if tuple(self.base_model.feature_subset) != tuple(self.sensor_names):
            raise ValueError("base model must use every sensor, in dataset order")
        if len(self.sub_models) != self.plan.num_models:
            raise ValueError("one sub-model per planned feature set required")
        for j, (m, mf) in enumerate(zip(self.sub_models, self.plan.model_features)):
            if tuple(m.feature_subset) != tuple(mf):
                raise ValueError(f"sub-model {j} features differ from the plan")

    def without_sub_models(self) -> "Engine":
        """The base-model-only engine sharing this engine's base model."""
        return Engine(self.base_model, (), EnsemblePlan((), self.plan.min_models, self.plan.method),
                      self.class_names, self.sensor_names)


def build_engine(train: Dataset, plan: EnsemblePlan, spec: ClassifierSpec,
                 base_model: TrainedModel | None = None) -> Engine:
    """Train the base model (seed index 0) and one sub-model per feature set
    (seed index j + 1). A pre-trained ``base_model`` may be reused."""
    known = set(train.sensor_names)
    for j, mf in enumerate(plan.model_features):
        missing = [s for s in mf if s not in known]
        if missing:
            raise ValueError(f"sub-model {j} uses unknown sensors {missing}")
    if base_model is None:
        logger.info("training base model on %d sensors", train.n_sensors)
        base_model = fit(spec.with_seed(derive_seed(spec.seed, 0)), train.features, train.labels,
                         train.sensor_names, train.n_classes)
    subs = []
    for j, mf in enumerate(plan.model_features):
        logger.info("training %s on %s", model_id(j), "".join(mf))
        subs.append(fit(spec.with_seed(derive_seed(spec.seed, j + 1)), train.columns(mf), train.labels,
                        mf, train.n_classes))
    return Engine(base_model, tuple(subs), plan, train.class_names, train.sensor_names)


def overlaps(engine: Engine, mask: FailureMask) -> list[int]:
    return [len(mask.failed.intersection(mf)) for mf in engine.plan.model_features]


def suitable_models(engine: Engine, mask: FailureMask) -> list[int]:
    ov = overlaps(engine, mask)
    if not ov:
        return []
    best = min(ov)
    return [j for j, o in enumerate(ov) if o == best]


@dataclass(frozen=True)
class _Routing:
    route: Route
    executing: tuple[int, ...]  # sub-model indices, or (-1,) for the base model
    imputations: int


def resolve_route(engine: Engine, mask: FailureMask) -> _Routing:
    unknown = mask.failed - set(engine.sensor_names)
    if unknown:
        raise ValueError(f"mask names unknown sensors {sorted(unknown)}")
    suitable = suitable_models(engine, mask)
    if not mask.failed or not suitable:
        return _Routing(Route.BASE, (-1,), len(mask.failed))
    imps = len(mask.failed.intersection(engine.plan.model_features[suitable[0]]))
    if len(suitable) == 1:
        return _Routing(Route.SINGLE_SUB, (suitable[0],), imps)
    if len(suitable) == 2:
        a, b = suitable
        pick = b if engine.sub_models[b].training_accuracy > engine.sub_models[a].training_accuracy else a
        return _Routing(Route.TWO_SUB_TIE_BREAK, (pick,), imps)
    return _Routing(Route.MAJORITY_VOTE, tuple(suitable), imps)


def _run_model(engine: Engine, model: TrainedModel, records: np.ndarray, mask: FailureMask) -> np.ndarray:
    cols = [engine.sensor_names.index(s) for s in model.feature_subset]
    X = records[:, cols].copy()
    fill = [k for k, s in enumerate(model.feature_subset) if s in mask.failed]
    if fill:
        X[:, fill] = model.imputation_means[fill]
    return model.predict_matrix(X)


def _vote(engine: Engine, executing: tuple[int, ...], preds: np.ndarray) -> np.ndarray:
    """Plurality per row; ties go to the tied label backed by the most
    accurate voter (lower index on equal accuracy)."""
    n_classes = len(engine.class_names)
    rows = np.arange(preds.shape[1])
    counts = np.zeros((preds.shape[1], n_classes), dtype=np.int64)
    for p in preds:
        counts[rows, p] += 1
    top = counts.max(axis=1)
    out = np.argmax(counts, axis=1)
    tied = np.flatnonzero((counts == top[:, None]).sum(axis=1) > 1)
    if tied.size:
        rank = sorted(range(len(executing)),
                      key=lambda k: (-engine.sub_models[executing[k]].training_accuracy, executing[k]))
        for r in tied:
            for k in rank:
                if counts[r, preds[k, r]] == top[r]:
                    out[r] = preds[k, r]
                    break
    return out


def _check_records(engine: Engine, records: np.ndarray, mask: FailureMask) -> None:
    if records.ndim != 2 or records.shape[1] != len(engine.sensor_names):
        raise ValueError(f"records must have {len(engine.sensor_names)} columns, got shape {records.shape}")
    live = [i for i, s in enumerate(engine.sensor_names) if s not in mask.failed]
    bad = ~np.isfinite(records[:, live])
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ValueError(f"record {r} lacks a value for live sensor {engine.sensor_names[live[c]]}")


def predict_batch(engine: Engine, records, mask: FailureMask) -> list[PredictionResult]:
    records = np.atleast_2d(np.asarray(records, dtype=np.float64))
    if records.shape[0] == 0:
        return []
    labels, routing = predict_labels(engine, records, mask)
    used = (BASE,) if routing.route is Route.BASE else tuple(model_id(j) for j in routing.executing)
    return [PredictionResult(int(lab), used, routing.imputations, routing.route) for lab in labels]


def predict_labels(engine: Engine, records: np.ndarray, mask: FailureMask) -> tuple[np.ndarray, _Routing]:
    """Array-level prediction for a batch sharing one failure mask."""
    records = np.asarray(records, dtype=np.float64)
    _check_records(engine, records, mask)
    routing = resolve_route(engine, mask)
    if routing.route is Route.BASE:
        return _run_model(engine, engine.base_model, records, mask), routing
    preds = np.stack([_run_model(engine, engine.sub_models[j], records, mask) for j in routing.executing])
    if routing.route is Route.MAJORITY_VOTE:
        return _vote(engine, routing.executing, preds), routing
    return preds[0], routing


def predict_one(engine: Engine, record, mask: FailureMask) -> PredictionResult:
    record = np.asarray(record, dtype=np.float64)
    if record.ndim != 1:
        raise ValueError("predict_one takes a single record")
    return predict_batch(engine, record[None, :], mask)[0]


def dataset_fingerprint(ds: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.features).tobytes())
    h.update(np.ascontiguousarray(ds.labels).tobytes())
    return h.hexdigest()


def save_engine(engine: Engine, directory: str | Path, train: Dataset | None = None,
                spec: ClassifierSpec | None = None) -> Path:
    d = Path(directory)
    (d / "models").mkdir(parents=True, exist_ok=True)
    (d / "plan.json").write_text(engine.plan.to_json(), encoding="utf-8")
    save_model(engine.base_model, d / "models" / "base.npz")
    for j, m in enumerate(engine.sub_models):
        save_model(m, d / "models" / f"{model_id(j)}.npz")
    manifest = {
        "format": "secoe-engine",
        "version": BUNDLE_VERSION,
        "class_names": list(engine.class_names),
        "sensor_names": list(engine.sensor_names),
        "num_sub_models": len(engine.sub_models),
        "dataset_fingerprint": dataset_fingerprint(train) if train is not None else None,
        "spec": spec.to_dict() if spec is not None else engine.base_model.spec.to_dict(),
        "model_seeds": {BASE: engine.base_model.spec.seed,
                        **{model_id(j): m.spec.seed for j, m in enumerate(engine.sub_models)}},
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return d


def load_engine(directory: str | Path) -> Engine:
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("format") != "secoe-engine" or manifest.get("version") != BUNDLE_VERSION:
        raise ValueError(f"{d}: not a version-{BUNDLE_VERSION} engine bundle")
    plan = EnsemblePlan.load(d / "plan.json")
    base = load_model(d / "models" / "base.npz")
    subs = tuple(load_model(d / "models" / f"{model_id(j)}.npz") for j in range(manifest["num_sub_models"]))
    return Engine(base, subs, plan, tuple(manifest["class_names"]), tuple(manifest["sensor_names"]))
