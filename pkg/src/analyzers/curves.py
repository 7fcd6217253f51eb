"""
Speed-accuracy curves and their area.

A curve maps "fraction of LSTM-only computation time saved" to the accuracy
the routed predictions reach. Every curve starts at the pure-LSTM anchor
(savings 0) and knob settings that cost more than running the LSTM alone
are dropped.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.cascade import (
    STRATEGY_TAGS,
    CostModel,
    DecisionNetThreshold,
    EvalPredictions,
    NaiveRatio,
    ProbThreshold,
    compute_cost,
    expected_accuracy,
    route_mask,
)
from src.errors import DegenerateCurveError, InputError, ParameterError

DEFAULT_GRID_SIZE = 201
INTERPOLATION = "trapezoid"


@dataclass(frozen=True)
class CurvePoint:
    savings: float
    accuracy: float
    knob: Optional[float] = None  # None marks the pure-LSTM anchor


@dataclass
class Curve:
    strategy: str
    points: list[CurvePoint] = field(default_factory=list)

    @property
    def savings(self) -> np.ndarray:
        return np.array([p.savings for p in self.points])

    @property
    def accuracy(self) -> np.ndarray:
        return np.array([p.accuracy for p in self.points])

    @property
    def max_savings(self) -> float:
        return self.points[-1].savings if self.points else 0.0

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "points": [{"knob": p.knob, "savings": p.savings, "accuracy": p.accuracy} for p in self.points],
        }


def normalize_points(points: list[CurvePoint]) -> list[CurvePoint]:
    """Sort by savings, drop negative savings, keep the best accuracy per savings value."""
    kept = sorted((p for p in points if p.savings >= 0.0), key=lambda p: (p.savings, -p.accuracy))
    result = []
    for point in kept:
        if result and point.savings == result[-1].savings:
            continue
        result.append(point)
    return result


def knob_grid(strategy: str, grid_size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    if grid_size < 2:
        raise ParameterError(f"grid_size must be >= 2, got {grid_size}")
    if strategy == "prob_threshold":
        return np.linspace(0.5, 1.0, grid_size)
    if strategy in ("decision_net", "naive_ratio"):
        return np.linspace(0.0, 1.0, grid_size)
    raise ParameterError(f"unknown strategy family {strategy!r}; expected one of {STRATEGY_TAGS}")


def _savings(cost: float, costs: CostModel) -> float:
    return 1.0 - cost / costs.c_lstm


def naive_ratio_curve(a_bow: float, a_lstm: float, costs: CostModel,
                      grid_size: int = DEFAULT_GRID_SIZE) -> Curve:
    """Analytic line of the random fixed-ratio baseline."""
    points = [CurvePoint(0.0, a_lstm)]
    for alpha in knob_grid("naive_ratio", grid_size):
        alpha = float(alpha)
        points.append(CurvePoint(
            savings=_savings(compute_cost("ratio", alpha, costs), costs),
            accuracy=expected_accuracy(alpha, a_bow, a_lstm),
            knob=alpha,
        ))
    return Curve("naive_ratio", normalize_points(points))


def sampled_naive_ratio_curve(preds: EvalPredictions, costs: CostModel, rng: np.random.Generator,
                              grid_size: int = DEFAULT_GRID_SIZE) -> Curve:
    """Fixed-ratio baseline realised by actually flipping the coin per example."""
    return _routed_curve("naive_ratio", preds, costs, grid_size, rng=rng)


def _routed_curve(strategy: str, preds: EvalPredictions, costs: CostModel, grid_size: int,
                  include_decision: bool = False, rng: Optional[np.random.Generator] = None) -> Curve:
    bow_correct = preds.bow_correct
    lstm_correct = preds.lstm_correct
    kind = "ratio" if strategy == "naive_ratio" else "strategy"
    points = [CurvePoint(0.0, preds.lstm_accuracy)]
    for knob in knob_grid(strategy, grid_size):
        knob = float(knob)
        if strategy == "prob_threshold":
            mask = route_mask(ProbThreshold(knob), preds)
        elif strategy == "decision_net":
            mask = route_mask(DecisionNetThreshold(knob), preds)
        else:
            mask = route_mask(NaiveRatio(knob), preds, rng)
        n_lstm = int(mask.sum())
        alpha = (preds.n - n_lstm) / preds.n
        correct = int(np.sum(np.where(mask, lstm_correct, bow_correct)))
        cost = compute_cost(kind, alpha, costs, include_decision=include_decision)
        points.append(CurvePoint(_savings(cost, costs), correct / preds.n, knob))
    return Curve(strategy, normalize_points(points))


def speed_accuracy_curve(strategy: str, preds: EvalPredictions, costs: CostModel,
                         grid_size: int = DEFAULT_GRID_SIZE, include_decision: bool = False,
                         naive_mode: str = "analytic", rng: Optional[np.random.Generator] = None) -> Curve:
    """
    Sweep one strategy family's knob and collect (savings, accuracy) points.

    Args:
        strategy: "prob_threshold", "decision_net" or "naive_ratio".
        preds: Predictions for one evaluation split.
        costs: Per-sample costs.
        grid_size: Number of knob values.
        include_decision: Charge c_decision on top of the strategy cost
            (decision-network family only).
        naive_mode: "analytic" or "sampled" for the naive-ratio family.
        rng: Needed when naive_mode is "sampled".

    Returns:
        Curve with the pure-LSTM anchor first and strictly increasing savings.

    Raises:
        InputError: decision probabilities missing for the decision-network family.
    """
    if preds.n == 0:
        raise InputError("cannot build a curve over an empty split")
    if strategy == "naive_ratio":
        if naive_mode == "analytic":
            return naive_ratio_curve(preds.bow_accuracy, preds.lstm_accuracy, costs, grid_size)
        if naive_mode != "sampled":
            raise ParameterError(f"naive_mode must be 'analytic' or 'sampled', got {naive_mode!r}")
        if rng is None:
            raise InputError("sampled naive-ratio curve needs an rng")
        return sampled_naive_ratio_curve(preds, costs, rng, grid_size)
    if strategy == "decision_net" and preds.decision_probs is None:
        raise InputError("decision-network curve needs decision probabilities")
    return _routed_curve(strategy, preds, costs, grid_size,
                         include_decision=include_decision and strategy == "decision_net")


def auc(curve: Curve) -> float:
    """Mean accuracy (percent) of the piecewise-linear curve over [0, max savings]."""
    if len(curve.points) < 2:
        raise DegenerateCurveError(f"{curve.strategy}: need at least 2 points, got {len(curve.points)}")
    savings = curve.savings
    accuracy = curve.accuracy
    s_max = savings[-1] - savings[0]
    if s_max <= 0.0:
        raise DegenerateCurveError(f"{curve.strategy}: curve spans no savings")
    area = float(np.sum(np.diff(savings) * (accuracy[1:] + accuracy[:-1]) / 2.0))
    return 100.0 * area / s_max
