"""Sub-model feature planning.

Two planners share the :class:`EnsemblePlan` output type:

* :func:`select_features` slides a half-size window over every correlated
  group, shifting it one position left per sub-model.
* :func:`random_selection_plan` draws each sub-model's half of the sensors
  uniformly at random (the correlation-blind baseline).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .correlation import GroupingPlan
from .dataset import round_half_up, sensor_names

logger = logging.getLogger(__name__)

SECOE = "secoe"
RANDOM_SELECTION = "random_selection"
METHODS = (SECOE, RANDOM_SELECTION)


class PlanError(ValueError):
    pass


def min_models(largest_group: int) -> int:
    """Minimum sub-model count for a largest correlated group of size L."""
    if largest_group < 1:
        raise ValueError(f"largest group size must be >= 1, got {largest_group}")
    half = round_half_up(0.5 * largest_group)
    return half + 1 if largest_group % 2 == 0 else half


def half_per_group(group_size: int) -> int:
    if group_size < 1:
        raise ValueError(f"group size must be >= 1, got {group_size}")
    return round_half_up(0.5 * group_size)


@dataclass(frozen=True)
class EnsemblePlan:
    model_features: tuple[tuple[str, ...], ...]
    min_models: int
    method: str = SECOE
    source_groups: GroupingPlan | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise PlanError(f"unknown planning method {self.method!r}")
        for j, mf in enumerate(self.model_features):
            if not mf:
                raise PlanError(f"sub-model {j} has no features")
            if len(set(mf)) != len(mf):
                raise PlanError(f"sub-model {j} lists a sensor twice")

    @property
    def num_models(self) -> int:
        return len(self.model_features)

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "min_models": self.min_models,
            "models": [list(mf) for mf in self.model_features],
        }
        if self.source_groups is not None:
            d["groups"] = [list(g) for g in self.source_groups.groups]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "EnsemblePlan":
        groups = d.get("groups")
        return cls(
            tuple(tuple(m) for m in d["models"]),
            int(d["min_models"]),
            d.get("method", SECOE),
            GroupingPlan(tuple(tuple(g) for g in groups)) if groups is not None else None,
        )

    @classmethod
    def from_json(cls, text: str) -> "EnsemblePlan":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "EnsemblePlan":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def group_windows(group: Sequence[str], num_models: int) -> list[tuple[str, ...]]:
    """The per-model slices of one group: leftmost H, then shift left by one."""
    g = list(group)
    h = half_per_group(len(g))
    return [tuple(g[(j + k) % len(g)] for k in range(h)) for j in range(num_models)]


def select_features(
    plan_groups: GroupingPlan,
    num_models: int | None = None,
    allow_below_min: bool = False,
) -> EnsemblePlan:
    """Build sub-model feature lists from ordered correlated groups.

    ``num_models`` defaults to :func:`min_models` of the largest group. Values
    above the minimum continue the same shift loop, wrapping around each
    group; values below it are refused unless ``allow_below_min`` is set.
    """
    if not plan_groups.groups:
        raise PlanError("no correlated groups to plan from")
    minm = min_models(plan_groups.largest_size)
    if num_models is None:
        num_models = minm
    if num_models < 1:
        raise PlanError("num_models must be >= 1")
    if num_models < minm and not allow_below_min:
        raise PlanError(
            f"num_models={num_models} is below the minimum {minm}; inclusion/exclusion "
            "coverage may break (pass allow_below_min to force)"
        )
    per_group = [group_windows(g, num_models) for g in plan_groups.groups]
    models = tuple(
        tuple(s for windows in per_group for s in windows[j]) for j in range(num_models)
    )
    plan = EnsemblePlan(models, minm, SECOE, plan_groups)
    report = validate_plan(plan, plan_groups.sensors)
    if not (report.condition_a_ok and report.condition_b_ok):
        logger.warning(
            "plan violates coverage conditions (a=%s, b=%s) for sensors %s",
            report.condition_a_ok, report.condition_b_ok, report.violating_sensors,
        )
    return plan


def random_selection_plan(
    num_sensors: int | Sequence[str],
    num_models: int,
    seed: int,
    min_models_hint: int | None = None,
) -> EnsemblePlan:
    """Each sub-model gets an independent uniform draw of half the sensors.

    ``num_sensors`` may be a count (sensors named A, B, ...) or explicit names.
    """
    names = sensor_names(num_sensors) if isinstance(num_sensors, int) else list(num_sensors)
    if len(names) < 2:
        raise PlanError("random selection needs at least 2 sensors")
    if num_models < 1:
        raise PlanError("num_models must be >= 1")
    take = round_half_up(0.5 * len(names))
    rng = np.random.default_rng(seed)
    models = tuple(
        tuple(names[i] for i in np.sort(rng.choice(len(names), size=take, replace=False)))
        for _ in range(num_models)
    )
    return EnsemblePlan(
        models,
        num_models if min_models_hint is None else min_models_hint,
        RANDOM_SELECTION,
    )


@dataclass(frozen=True)
class PlanValidationReport:
    condition_a_ok: bool
    condition_b_ok: bool
    violating_sensors: tuple[str, ...]
    per_model_fraction: tuple[float, ...]
    never_included: tuple[str, ...] = ()
    never_excluded: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.condition_a_ok and self.condition_b_ok


def validate_plan(plan: EnsemblePlan, all_sensors: Sequence[str]) -> PlanValidationReport:
    """Check (a) every sensor is in some sub-model and (b) every sensor is
    missing from some sub-model."""
    sets = [set(mf) for mf in plan.model_features]
    never_in = tuple(s for s in all_sensors if not any(s in m for m in sets))
    never_out = tuple(s for s in all_sensors if sets and all(s in m for m in sets))
    if not sets:
        never_out = tuple(all_sensors)
    violating = tuple(s for s in all_sensors if s in never_in or s in never_out)
    total = len(all_sensors)
    fractions = tuple(len(mf) / total if total else 0.0 for mf in plan.model_features)
    return PlanValidationReport(
        condition_a_ok=not never_in,
        condition_b_ok=not never_out,
        violating_sensors=violating,
        per_model_fraction=fractions,
        never_included=never_in,
        never_excluded=never_out,
    )
