from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..dataset import Dataset
from ..engine import Engine, FailureMask, Route, predict_labels

Z_95 = 1.96


def confidence_interval(values) -> tuple[float, float]:
    """Mean and 95% half-width under the normal approximation (sample std)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise ValueError("a confidence interval needs at least 2 values")
    return float(v.mean()), float(Z_95 * v.std(ddof=1) / np.sqrt(v.size))


@dataclass
class MaskResult:
    mask: FailureMask
    accuracy: float
    imputations: float
    route_counts: Counter = field(default_factory=Counter)
    correct: np.ndarray | None = field(default=None, repr=False)


def hide(records: np.ndarray, sensor_order, mask: FailureMask) -> np.ndarray:
    out = np.array(records, dtype=np.float64, copy=True)
    cols = [i for i, s in enumerate(sensor_order) if s in mask.failed]
    out[:, cols] = np.nan
    return out


def evaluate_mask(engine: Engine, test: Dataset, mask: FailureMask) -> MaskResult:
    if test.n_samples == 0:
        raise ValueError("evaluation needs a non-empty test set")
    records = hide(test.features, test.sensor_names, mask)
    labels, routing = predict_labels(engine, records, mask)
    correct = labels == test.labels
    return MaskResult(
        mask,
        float(correct.mean()),
        float(routing.imputations),
        Counter({routing.route.value: test.n_samples}),
        correct,
    )


def evaluate(engine: Engine, test: Dataset, scenario) -> list[MaskResult]:
    """Accuracy and mean imputations per query for every mask of a scenario."""
    return [evaluate_mask(engine, test, m) for m in scenario.masks]


def format_route_counts(counts: Counter) -> str:
    return ";".join(f"{r.value}:{counts.get(r.value, 0)}" for r in Route)


def parse_route_counts(text: str) -> Counter:
    out = Counter()
    for part in filter(None, text.split(";")):
        k, v = part.split(":")
        out[k] = int(v)
    return out
