"""Pearson correlation between sensors and correlated-group formation."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import Dataset


def pearson(x, y) -> float:
    """Sample Pearson coefficient; 0.0 when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"pearson needs two equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray
    sensor_names: tuple[str, ...]

    def __getitem__(self, pair: tuple[str, str]) -> float:
        a, b = pair
        return float(self.values[self.sensor_names.index(a), self.sensor_names.index(b)])


def correlation_matrix(train: Dataset | np.ndarray, names: Sequence[str] | None = None) -> CorrelationMatrix:
    if isinstance(train, Dataset):
        X, names = train.features, train.sensor_names
    else:
        X = np.asarray(train, dtype=np.float64)
    if names is None:
        from .dataset import sensor_names

        names = sensor_names(X.shape[1])
    if X.shape[0] < 2:
        raise ValueError("correlation needs at least 2 rows")
    D = X - X.mean(axis=0)
    norms = np.sqrt((D * D).sum(axis=0))
    ok = norms > 0.0
    Z = np.zeros_like(D)
    Z[:, ok] = D[:, ok] / norms[ok]
    R = np.clip(Z.T @ Z, -1.0, 1.0)
    R = (R + R.T) / 2.0
    idx = np.flatnonzero(ok)
    R[idx, idx] = 1.0
    return CorrelationMatrix(R, tuple(names))


class CorrelationCategory(enum.Enum):
    STRONG = "Strong"
    MODERATE = "Moderate"
    WEAK = "Weak"
    VERY_WEAK = "VeryWeak"
    NONE = "None"


# Lower bounds, highest band first; each band is closed below and open above.
_BANDS = (
    (0.76, CorrelationCategory.STRONG),
    (0.50, CorrelationCategory.MODERATE),
    (0.25, CorrelationCategory.WEAK),
    (0.10, CorrelationCategory.VERY_WEAK),
)


def categorize(r: float) -> CorrelationCategory:
    if not -1.0 <= r <= 1.0 or np.isnan(r):
        raise ValueError(f"correlation {r} outside [-1, 1]")
    for lower, cat in _BANDS:
        if r >= lower:
            return cat
    return CorrelationCategory.NONE


@dataclass(frozen=True)
class GroupingPlan:
    """Ordered correlated groups. Order inside each group is significant."""

    groups: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        seen: set[str] = set()
        for g in self.groups:
            if not g:
                raise ValueError("correlated groups must be non-empty")
            for s in g:
                if s in seen:
                    raise ValueError(f"sensor {s!r} appears in more than one group")
                seen.add(s)

    @property
    def largest_size(self) -> int:
        return max((len(g) for g in self.groups), default=0)

    @property
    def sensors(self) -> list[str]:
        return [s for g in self.groups for s in g]

    def to_json(self) -> str:
        return json.dumps({"groups": [list(g) for g in self.groups]})

    @classmethod
    def from_json(cls, text: str) -> "GroupingPlan":
        d = json.loads(text)
        return cls(tuple(tuple(g) for g in d["groups"]))

    @classmethod
    def load(cls, path: str | Path) -> "GroupingPlan":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def best_partners(values: np.ndarray) -> np.ndarray:
    """Index of each sensor's most positively correlated other sensor.

    Negative coefficients count as zero; ties resolve to the lowest index.
    """
    R = np.clip(np.asarray(values, dtype=np.float64), 0.0, None)
    np.fill_diagonal(R, -np.inf)
    return np.argmax(R, axis=1)


def form_groups(matrix: CorrelationMatrix) -> GroupingPlan:
    """Union every sensor with its best partner and return the components.

    Sensors are visited by ascending index. A new link either starts a group
    ``[sensor, partner]``, appends the newcomer to an existing group, or
    concatenates two groups (the visiting sensor's group first). Groups are
    returned sorted by their smallest sensor index.
    """
    n = len(matrix.sensor_names)
    if n < 2:
        raise ValueError("grouping needs at least 2 sensors")
    partner = best_partners(matrix.values)
    member_of: dict[int, list[int]] = {}
    for i in range(n):
        p = int(partner[i])
        gi, gp = member_of.get(i), member_of.get(p)
        if gi is None and gp is None:
            g = [i, p]
            member_of[i] = member_of[p] = g
        elif gi is not None and gp is None:
            gi.append(p)
            member_of[p] = gi
        elif gi is None:
            gp.append(i)
            member_of[i] = gp
        elif gi is not gp:
            gi.extend(gp)
            for s in gp:
                member_of[s] = gi
    unique = {id(g): g for g in member_of.values()}.values()
    ordered = sorted(unique, key=min)
    names = matrix.sensor_names
    return GroupingPlan(tuple(tuple(names[s] for s in g) for g in ordered))


def describe_groups(matrix: CorrelationMatrix, plan: GroupingPlan) -> list[dict]:
    """Per-sensor best partner, coefficient and band, for reporting."""
    partner = best_partners(matrix.values)
    names = matrix.sensor_names
    rows = []
    for gi, g in enumerate(plan.groups):
        for s in g:
            i = names.index(s)
            r = float(matrix.values[i, partner[i]])
            rows.append({
                "group": gi,
                "sensor": s,
                "partner": names[partner[i]],
                "r": r,
                "category": categorize(r).value,
            })
    return rows
