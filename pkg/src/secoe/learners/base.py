"""Classifier specification, trained-model container and mean imputation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..dataset import StandardizationParams, apply_standardizer, fit_standardizer
from . import forest, mlp, svm

FORMAT_VERSION = 1

MLP = "mlp"
RANDOM_FOREST = "random_forest"
LINEAR_SVM = "linear_svm"

_FAMILIES = {
    MLP: (mlp.MLPClassifier, mlp.DEFAULTS, mlp.check_params),
    RANDOM_FOREST: (forest.RandomForestClassifier, forest.DEFAULTS, forest.check_params),
    LINEAR_SVM: (svm.LinearSVMClassifier, svm.DEFAULTS, svm.check_params),
}
FAMILIES = tuple(_FAMILIES)


@dataclass(frozen=True)
class ClassifierSpec:
    family: str = MLP
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown learner family {self.family!r}; choose from {FAMILIES}")
        _, defaults, check = _FAMILIES[self.family]
        unknown = set(self.hyperparameters) - set(defaults)
        if unknown:
            raise ValueError(f"unknown {self.family} hyperparameters: {sorted(unknown)}")
        check(self.resolved())
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def resolved(self) -> dict:
        return {**_FAMILIES[self.family][1], **self.hyperparameters}

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return ClassifierSpec(self.family, dict(self.hyperparameters), seed)

    def to_dict(self) -> dict:
        return {"family": self.family, "hyperparameters": dict(self.hyperparameters), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierSpec":
        return cls(d.get("family", MLP), dict(d.get("hyperparameters", {})), int(d.get("seed", 0)))


class ConstantClassifier:
    family = "constant"

    def __init__(self, label: int = 0):
        self.label = int(label)

    def predict(self, X):
        return np.full(X.shape[0], self.label, dtype=np.int64)

    def get_state(self) -> dict:
        return {"label": np.array(self.label)}

    def set_state(self, state):
        self.label = int(state["label"])
        return self


@dataclass(frozen=True)
class TrainedModel:
    """A fitted classifier bound to its sensor subset and preprocessing.

    ``predict`` takes raw readings in ``feature_subset`` order; the model
    standardizes them itself.
    """

    spec: ClassifierSpec
    feature_subset: tuple[str, ...]
    estimator: object = field(repr=False)
    training_accuracy: float
    standardizer: StandardizationParams = field(repr=False)
    imputation_means: np.ndarray = field(repr=False)
    n_classes: int

    def predict_matrix(self, X_raw) -> np.ndarray:
        X_raw = np.atleast_2d(np.asarray(X_raw, dtype=np.float64))
        if X_raw.shape[1] != len(self.feature_subset):
            raise ValueError(
                f"model expects {len(self.feature_subset)} features, got {X_raw.shape[1]}"
            )
        return self.estimator.predict(apply_standardizer(self.standardizer, X_raw))


def fit(spec: ClassifierSpec, X_raw, y, feature_subset: Sequence[str] | None = None,
        n_classes: int | None = None) -> TrainedModel:
    """Fit a classifier on raw readings of one sensor subset.

    The standardizer and the imputation means are both taken from ``X_raw``.
    """
    X_raw = np.asarray(X_raw, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X_raw.ndim != 2 or X_raw.shape[0] != y.shape[0]:
        raise ValueError(f"X has shape {X_raw.shape} but y has {y.shape[0]} labels")
    if X_raw.shape[0] == 0:
        raise ValueError("cannot fit on zero rows")
    if feature_subset is None:
        from ..dataset import sensor_names

        feature_subset = sensor_names(X_raw.shape[1])
    if len(feature_subset) != X_raw.shape[1]:
        raise ValueError("feature_subset length must match the number of columns")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    std = fit_standardizer(X_raw)
    X = apply_standardizer(std, X_raw)
    present = np.unique(y)
    if present.size == 1:
        est = ConstantClassifier(int(present[0]))
    else:
        cls = _FAMILIES[spec.family][0]
        est = cls(**spec.hyperparameters).fit(X, y, n_classes, np.random.default_rng(spec.seed))
    acc = float(np.mean(est.predict(X) == y))
    return TrainedModel(spec, tuple(feature_subset), est, acc, std, std.means.copy(), n_classes)


def predict(model: TrainedModel, x_raw) -> int:
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if x_raw.ndim != 1:
        raise ValueError("predict takes a single record; use predict_matrix for batches")
    return int(model.predict_matrix(x_raw[None, :])[0])


def impute(x_raw, missing, means) -> np.ndarray:
    """Replace the entries listed in ``missing`` with the training means."""
    out = np.array(x_raw, dtype=np.float64, copy=True)
    idx = np.fromiter(missing, dtype=np.int64) if not isinstance(missing, np.ndarray) else missing
    if idx.size:
        out[..., idx] = np.asarray(means, dtype=np.float64)[idx]
    return out


def mlp_gradient_check(spec: ClassifierSpec, X, y, n_classes: int | None = None) -> float:
    """Max relative error of the MLP's backprop gradient against central differences."""
    if spec.family != MLP:
        raise ValueError("gradient check only applies to the mlp family")
    p = spec.resolved()
    y = np.asarray(y, dtype=np.int64)
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    return mlp.gradient_check(np.asarray(X, dtype=np.float64), y, n_classes, hidden=int(p["hidden"]),
                              alpha=p["alpha"], seed=spec.seed, init=p["init"])


def save_model(model: TrainedModel, path: str | Path) -> None:
    meta = {
        "format": "secoe-model",
        "version": FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "estimator": model.estimator.family,
        "feature_subset": list(model.feature_subset),
        "training_accuracy": model.training_accuracy,
        "n_classes": model.n_classes,
    }
    arrays = {f"param__{k}": np.asarray(v) for k, v in model.estimator.get_state().items()}
    with open(path, "wb") as fh:
        np.savez(
            fh,
            meta=np.array(json.dumps(meta, sort_keys=True)),
            std_means=model.standardizer.means,
            std_stds=model.standardizer.stds,
            imputation_means=model.imputation_means,
            **arrays,
        )


def load_model(path: str | Path) -> TrainedModel:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("format") != "secoe-model" or meta.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: not a version-{FORMAT_VERSION} secoe model blob")
        spec = ClassifierSpec.from_dict(meta["spec"])
        state = {k[len("param__"):]: z[k] for k in z.files if k.startswith("param__")}
        if meta["estimator"] == "constant":
            est = ConstantClassifier().set_state(state)
        else:
            est = _FAMILIES[meta["estimator"]][0](**spec.hyperparameters).set_state(state)
        return TrainedModel(
            spec,
            tuple(meta["feature_subset"]),
            est,
            float(meta["training_accuracy"]),
            StandardizationParams(z["std_means"].copy(), z["std_stds"].copy()),
            z["imputation_means"].copy(),
            int(meta["n_classes"]),
        )
