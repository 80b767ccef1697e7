"""Sensor-correlation ensembles that keep classifiers usable when sensors fail."""
from .correlation import (
    CorrelationCategory,
    CorrelationMatrix,
    GroupingPlan,
    categorize,
    correlation_matrix,
    form_groups,
    pearson,
)
from .dataset import (
    Dataset,
    DatasetError,
    SplitSpec,
    StandardizationParams,
    apply_standardizer,
    fit_standardizer,
    load_csv,
    sensor_name,
    split,
)
from .engine import (
    Engine,
    FailureMask,
    PredictionResult,
    Route,
    build_engine,
    load_engine,
    predict_batch,
    predict_one,
    save_engine,
    suitable_models,
)
from .planner import (
    EnsemblePlan,
    PlanValidationReport,
    half_per_group,
    min_models,
    random_selection_plan,
    select_features,
    validate_plan,
)

__version__ = "0.1.0"
