from .experiment import (
    APPROACHES,
    EvaluationReport,
    ExperimentConfig,
    ScenarioSpec,
    read_results_csv,
    rows_to_csv,
    run_experiment,
    summarize,
    write_outputs,
)
from .metrics import MaskResult, confidence_interval, evaluate, evaluate_mask
from .scenarios import (
    RANDOM,
    STATIC,
    Scenario,
    generate_random_scenarios,
    generate_static_scenarios,
    mask_size,
)

__all__ = [
    "APPROACHES",
    "EvaluationReport",
    "ExperimentConfig",
    "MaskResult",
    "RANDOM",
    "STATIC",
    "Scenario",
    "ScenarioSpec",
    "confidence_interval",
    "evaluate",
    "evaluate_mask",
    "generate_random_scenarios",
    "generate_static_scenarios",
    "mask_size",
    "read_results_csv",
    "rows_to_csv",
    "run_experiment",
    "summarize",
    "write_outputs",
]
