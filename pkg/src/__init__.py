"""skimread - cheap-first model cascades for sentence classification.

A bag-of-words classifier answers every input; a bi-LSTM is run only when a
routing strategy asks for it. The package trains both models plus a
decision network, sweeps the routing knobs and scores the resulting
speed-accuracy curves.
"""

from .cascade import (
    Choice,
    ConfusionMatrix,
    CostModel,
    DecisionNetThreshold,
    EvalPredictions,
    NaiveRatio,
    ProbThreshold,
    compute_cost,
    confusion,
    expected_accuracy,
    generate_decision_labels,
    route,
)
from .config import PipelineConfig, TrainConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "Choice",
    "ConfusionMatrix",
    "CostModel",
    "DecisionNetThreshold",
    "EvalPredictions",
    "NaiveRatio",
    "PipelineConfig",
    "ProbThreshold",
    "TrainConfig",
    "compute_cost",
    "confusion",
    "expected_accuracy",
    "generate_decision_labels",
    "load_config",
    "route",
]
