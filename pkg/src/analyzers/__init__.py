"""Analyzers for routed predictions: confidence diagnostics, speed-accuracy curves, host costs, sweep checks."""

from .acceptance import BehaviorCheck, behavior_checks
from .cost_profiler import measure_costs, time_per_sample
from .curves import (
    Curve,
    CurvePoint,
    auc,
    knob_grid,
    naive_ratio_curve,
    normalize_points,
    sampled_naive_ratio_curve,
    speed_accuracy_curve,
)
from .diagnostics import (
    BucketHistogram,
    bucket_accuracy,
    cumulative_lstm_usage,
    format_bucket_chart,
    format_usage_chart,
    usage_thresholds,
)

__all__ = [
    "BehaviorCheck",
    "BucketHistogram",
    "Curve",
    "CurvePoint",
    "auc",
    "behavior_checks",
    "bucket_accuracy",
    "cumulative_lstm_usage",
    "format_bucket_chart",
    "format_usage_chart",
    "knob_grid",
    "measure_costs",
    "naive_ratio_curve",
    "normalize_points",
    "sampled_naive_ratio_curve",
    "speed_accuracy_curve",
    "time_per_sample",
    "usage_thresholds",
]
