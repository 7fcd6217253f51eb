"""
Cascade routing - decide per input whether the cheap BoW answer stands or
the expensive LSTM is run, plus the cost/accuracy algebra used to score a
routing policy.

Strategies:
- NaiveRatio(alpha): BoW with probability alpha, independent of the input.
- ProbThreshold(tau): BoW iff its max class probability is >= tau.
- DecisionNetThreshold(tau_d): LSTM iff the decision network's P(LSTM) > tau_d.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Union

import numpy as np

from src.errors import AlignmentError, InputError, ParameterError

STRATEGY_TAGS = ("naive_ratio", "prob_threshold", "decision_net")


class Choice(IntEnum):
    BOW = 0
    LSTM = 1


@dataclass(frozen=True)
class CostModel:
    """Per-sample milliseconds; defaults are the batch-64 GPU timings of the reference setup."""

    c_bow: float = 0.16
    c_lstm: float = 1.36
    c_decision: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.c_bow < self.c_lstm:
            raise ParameterError(f"need 0 < c_bow < c_lstm, got ({self.c_bow}, {self.c_lstm})")
        if self.c_decision < 0.0:
            raise ParameterError(f"c_decision must be >= 0, got {self.c_decision}")

    def as_dict(self) -> dict:
        return {"c_bow": self.c_bow, "c_lstm": self.c_lstm, "c_decision": self.c_decision}


def _check_fraction(name: str, value: float, low: float = 0.0, high: float = 1.0) -> None:
    if not low <= value <= high:
        raise ParameterError(f"{name} must be in [{low}, {high}], got {value}")


@dataclass(frozen=True)
class NaiveRatio:
    alpha: float
    tag: str = field(default="naive_ratio", init=False)

    def __post_init__(self):
        _check_fraction("alpha", self.alpha)


@dataclass(frozen=True)
class ProbThreshold:
    tau: float
    tag: str = field(default="prob_threshold", init=False)

    def __post_init__(self):
        _check_fraction("tau", self.tau, 0.5, 1.0)


@dataclass(frozen=True)
class DecisionNetThreshold:
    tau_d: float
    tag: str = field(default="decision_net", init=False)

    def __post_init__(self):
        _check_fraction("tau_d", self.tau_d)


Strategy = Union[NaiveRatio, ProbThreshold, DecisionNetThreshold]


def route(strategy: Strategy, bow_max_prob: float, decision_prob: Optional[float] = None,
          rng: Optional[np.random.Generator] = None) -> Choice:
    """
    Pick the model for one input.

    Ties at bow_max_prob == tau go to the BoW.

    Raises:
        InputError: decision_prob missing for DecisionNetThreshold, or rng
            missing for NaiveRatio.
    """
    if isinstance(strategy, ProbThreshold):
        return Choice.BOW if bow_max_prob >= strategy.tau else Choice.LSTM
    if isinstance(strategy, DecisionNetThreshold):
        if decision_prob is None:
            raise InputError("decision-network routing needs decision_prob")
        return Choice.LSTM if decision_prob > strategy.tau_d else Choice.BOW
    if isinstance(strategy, NaiveRatio):
        if rng is None:
            raise InputError("naive-ratio routing needs an rng")
        return Choice.BOW if rng.random() < strategy.alpha else Choice.LSTM
    raise ParameterError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class RoutedPrediction:
    choice: Choice
    predicted_label: int
    bow_max_prob: float
    gold_label: int
    decision_prob: Optional[float] = None

    @property
    def correct(self) -> bool:
        return self.predicted_label == self.gold_label


def _aligned(*arrays) -> list[np.ndarray]:
    arrays = [np.asarray(a) for a in arrays]
    lengths = {len(a) for a in arrays}
    if len(lengths) > 1:
        raise AlignmentError(f"sequences are not aligned: lengths {sorted(lengths)}")
    return arrays


def generate_decision_labels(bow_preds, lstm_preds, gold) -> np.ndarray:
    """1 (LSTM) where the LSTM is right and the BoW wrong, 0 (BoW) otherwise."""
    bow_preds, lstm_preds, gold = _aligned(bow_preds, lstm_preds, gold)
    return ((bow_preds != gold) & (lstm_preds == gold)).astype(np.int64)


def expected_accuracy(alpha: float, a_bow: float, a_lstm: float) -> float:
    """alpha * A_BoW + (1 - alpha) * A_LSTM."""
    _check_fraction("alpha", alpha)
    _check_fraction("a_bow", a_bow)
    _check_fraction("a_lstm", a_lstm)
    return alpha * a_bow + (1.0 - alpha) * a_lstm


def compute_cost(kind: str, alpha: float, costs: CostModel, include_decision: bool = False) -> float:
    """
    Average ms/sample when a fraction alpha of inputs stays with the BoW.

    strategy: C_BoW + (1 - alpha) * C_LSTM   (BoW always runs)
    ratio:    alpha * C_BoW + (1 - alpha) * C_LSTM
    """
    _check_fraction("alpha", alpha)
    if kind == "strategy":
        cost = costs.c_bow + (1.0 - alpha) * costs.c_lstm
        if include_decision:
            cost += costs.c_decision
        return cost
    if kind == "ratio":
        return alpha * costs.c_bow + (1.0 - alpha) * costs.c_lstm
    raise ParameterError(f"cost kind must be 'strategy' or 'ratio', got {kind!r}")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Joint correctness fractions: tt both right, tf BoW only, ft LSTM only, ff neither."""

    tt: float
    tf: float
    ft: float
    ff: float

    @property
    def bow_accuracy(self) -> float:
        return self.tt + self.tf

    @property
    def lstm_accuracy(self) -> float:
        return self.tt + self.ft

    def as_dict(self) -> dict:
        return {"tt": self.tt, "tf": self.tf, "ft": self.ft, "ff": self.ff}


def confusion(bow_preds, lstm_preds, gold) -> ConfusionMatrix:
    bow_preds, lstm_preds, gold = _aligned(bow_preds, lstm_preds, gold)
    n = len(gold)
    if n == 0:
        raise AlignmentError("confusion matrix over an empty set")
    bow_ok = bow_preds == gold
    lstm_ok = lstm_preds == gold
    return ConfusionMatrix(
        tt=int(np.sum(bow_ok & lstm_ok)) / n,
        tf=int(np.sum(bow_ok & ~lstm_ok)) / n,
        ft=int(np.sum(~bow_ok & lstm_ok)) / n,
        ff=int(np.sum(~bow_ok & ~lstm_ok)) / n,
    )


@dataclass
class EvalPredictions:
    """Everything the router needs about one evaluation split."""

    gold: np.ndarray
    bow_probs: np.ndarray
    lstm_probs: np.ndarray
    decision_probs: Optional[np.ndarray] = None
    bow_hidden: Optional[np.ndarray] = None

    def __post_init__(self):
        self.gold = np.asarray(self.gold, dtype=np.int64)
        arrays = [self.gold, self.bow_probs, self.lstm_probs]
        if self.decision_probs is not None:
            arrays.append(self.decision_probs)
        if self.bow_hidden is not None:
            arrays.append(self.bow_hidden)
        _aligned(*arrays)

    @property
    def n(self) -> int:
        return len(self.gold)

    @property
    def bow_pred(self) -> np.ndarray:
        return np.argmax(self.bow_probs, axis=1)

    @property
    def lstm_pred(self) -> np.ndarray:
        return np.argmax(self.lstm_probs, axis=1)

    @property
    def bow_max_prob(self) -> np.ndarray:
        return np.max(self.bow_probs, axis=1)

    @property
    def bow_correct(self) -> np.ndarray:
        return self.bow_pred == self.gold

    @property
    def lstm_correct(self) -> np.ndarray:
        return self.lstm_pred == self.gold

    @property
    def bow_accuracy(self) -> float:
        return int(self.bow_correct.sum()) / self.n

    @property
    def lstm_accuracy(self) -> float:
        return int(self.lstm_correct.sum()) / self.n


def route_mask(strategy: Strategy, preds: EvalPredictions,
               rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Vectorised route(): True where the LSTM is used."""
    if isinstance(strategy, ProbThreshold):
        return preds.bow_max_prob < strategy.tau
    if isinstance(strategy, DecisionNetThreshold):
        if preds.decision_probs is None:
            raise InputError("decision-network routing needs decision probabilities")
        return np.asarray(preds.decision_probs) > strategy.tau_d
    if isinstance(strategy, NaiveRatio):
        if rng is None:
            raise InputError("naive-ratio routing needs an rng")
        return rng.random(preds.n) >= strategy.alpha
    raise ParameterError(f"unknown strategy {strategy!r}")


def route_all(strategy: Strategy, preds: EvalPredictions,
              rng: Optional[np.random.Generator] = None) -> list[RoutedPrediction]:
    bow_pred = preds.bow_pred
    lstm_pred = preds.lstm_pred
    max_prob = preds.bow_max_prob
    routed = []
    for i in range(preds.n):
        decision_prob = None if preds.decision_probs is None else float(preds.decision_probs[i])
        choice = route(strategy, float(max_prob[i]), decision_prob, rng)
        label = bow_pred[i] if choice == Choice.BOW else lstm_pred[i]
        routed.append(RoutedPrediction(
            choice=choice,
            predicted_label=int(label),
            bow_max_prob=float(max_prob[i]),
            gold_label=int(preds.gold[i]),
            decision_prob=decision_prob,
        ))
    return routed


def cascade_accuracy(routed: list[RoutedPrediction]) -> float:
    if not routed:
        raise AlignmentError("no routed predictions")
    return sum(1 for r in routed if r.correct) / len(routed)
