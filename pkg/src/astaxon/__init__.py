"""AS taxonomy classification with AdaBoost.MH over routing and registry attributes."""

from .core import AsClass, AsRecord, LabeledExample, Prediction, Ranking, decide, rank_order
from .boosting import Model, TrainConfig, classify, load_model, save_model, train

__version__ = "0.1.0"

__all__ = [
    "AsClass",
    "AsRecord",
    "LabeledExample",
    "Model",
    "Prediction",
    "Ranking",
    "TrainConfig",
    "classify",
    "decide",
    "load_model",
    "rank_order",
    "save_model",
    "train",
]
