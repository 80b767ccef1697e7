"""Failure-mask generation for static and random failure scenarios."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..dataset import sensor_names
from ..engine import FailureMask
from ..planner import EnsemblePlan

logger = logging.getLogger(__name__)

STATIC = "static"
RANDOM = "random"

DEFAULT_STATIC_FRACTIONS = (0.05, 0.10, 0.20, 0.30, 0.40, 0.50)
DEFAULT_RANDOM_FRACTIONS = (0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60)


def mask_size(fraction: float, total: int) -> int:
    # floor, with a small guard so 0.3 * 10 is 3 and not 2
    return int(math.floor(fraction * total + 1e-9))


@dataclass(frozen=True)
class Scenario:
    kind: str
    fraction: float
    masks: tuple[FailureMask, ...]
    iterations: int
    seed: int | None = None
    feasible: bool = True
    anchor_model: int | None = field(default=None, compare=False)


def generate_static_scenarios(plan: EnsemblePlan, fractions: Sequence[float] = DEFAULT_STATIC_FRACTIONS,
                              all_sensors: Sequence[str] | None = None) -> list[Scenario]:
    """One hand-constructed mask per fraction, disjoint from some sub-model.

    The anchor is the sub-model with the largest complement (ties go to the
    later sub-model); the failed sensors are the first ``floor(f * S)``
    members of that complement in sensor order. Fractions whose mask would
    not fit in any complement are returned with ``feasible=False``.
    """
    if all_sensors is None:
        all_sensors = sorted({s for mf in plan.model_features for s in mf}, key=_sensor_key)
    all_sensors = list(all_sensors)
    if plan.num_models == 0:
        raise ValueError("static scenarios need at least one sub-model")
    complements = [[s for s in all_sensors if s not in set(mf)] for mf in plan.model_features]
    sizes = [len(c) for c in complements]
    anchor = max(range(len(sizes)), key=lambda j: (sizes[j], j))
    out = []
    for f in fractions:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"failure fraction {f} outside [0, 1]")
        k = mask_size(f, len(all_sensors))
        if k > sizes[anchor]:
            logger.warning("static fraction %.2f needs %d failed sensors but the largest complement has %d; "
                           "skipping", f, k, sizes[anchor])
            out.append(Scenario(STATIC, f, (), 1, None, False, anchor))
            continue
        out.append(Scenario(STATIC, f, (FailureMask(frozenset(complements[anchor][:k])),), 1, None, True, anchor))
    return out


def _sensor_key(name: str):
    from ..dataset import SENSOR_ALPHABET

    idx = SENSOR_ALPHABET.find(name) if len(name) == 1 else -1
    return (idx < 0, idx, name)


def generate_random_scenarios(num_sensors: int | Sequence[str],
                              fractions: Sequence[float] = DEFAULT_RANDOM_FRACTIONS,
                              iterations: int = 10, seed: int = 0) -> list[Scenario]:
    """``iterations`` uniform failed sets of size ``floor(f * S)`` per fraction.

    Each fraction draws from its own stream keyed on (seed, position), so the
    masks for one fraction do not depend on how many others were requested
    after it.
    """
    names = sensor_names(num_sensors) if isinstance(num_sensors, int) else list(num_sensors)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    out = []
    for pos, f in enumerate(fractions):
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"failure fraction {f} outside [0, 1]")
        k = mask_size(f, len(names))
        rng = np.random.default_rng([seed, pos])
        masks = tuple(
            FailureMask(frozenset(names[i] for i in rng.choice(len(names), size=k, replace=False)))
            for _ in range(iterations)
        )
        out.append(Scenario(RANDOM, f, masks, iterations, seed))
    return out
