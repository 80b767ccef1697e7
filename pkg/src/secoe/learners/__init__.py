from .base import (
    FAMILIES,
    LINEAR_SVM,
    MLP,
    RANDOM_FOREST,
    ClassifierSpec,
    ConstantClassifier,
    TrainedModel,
    fit,
    impute,
    load_model,
    mlp_gradient_check,
    predict,
    save_model,
)

__all__ = [
    "FAMILIES",
    "LINEAR_SVM",
    "MLP",
    "RANDOM_FOREST",
    "ClassifierSpec",
    "ConstantClassifier",
    "TrainedModel",
    "fit",
    "impute",
    "load_model",
    "mlp_gradient_check",
    "predict",
    "save_model",
]
