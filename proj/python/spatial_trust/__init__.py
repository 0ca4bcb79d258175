"""Vision-based confidence estimation for VLM spatial predictions."""

from ._core import (
    FEATURE_NAMES,
    DatasetError,
    Model,
    ModelFormatError,
    TrainingError,
    auroc,
    coverage_at_accuracy,
    extract_features,
    generate,
    iou,
    load_model,
    parse_dataset,
    sweep_tau,
    train,
    write_dataset,
    youden_threshold,
)

__all__ = [
    "FEATURE_NAMES",
    "DatasetError",
    "Model",
    "ModelFormatError",
    "TrainingError",
    "auroc",
    "coverage_at_accuracy",
    "extract_features",
    "generate",
    "iou",
    "load_model",
    "parse_dataset",
    "sweep_tau",
    "train",
    "write_dataset",
    "youden_threshold",
]
