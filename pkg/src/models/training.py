"""
Mini-batch Adam training with early stopping.

After each epoch the model is scored on validation data; the best-scoring
snapshot (strict improvement, so the earliest of equal scores) is restored
at the end. Training stops after `patience` epochs without improvement or
at `max_epochs`.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import tqdm

from src.analyzers.curves import auc, speed_accuracy_curve
from src.cascade import CostModel, EvalPredictions, generate_decision_labels
from src.config import TrainConfig
from src.data.treebank import Example
from src.errors import InputError, NumericError, TrainingError
from src.models.base import Network
from src.models.decision import DecisionNet
from src.nn.optim import Adam
from src.nn.tensor import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    metric: float

    def as_dict(self) -> dict:
        return {"epoch": self.epoch, "loss": self.loss, "metric": self.metric}


@dataclass
class DecisionValidation:
    """What the decision network is scored against after each epoch."""

    examples: list[Example]
    preds: EvalPredictions  # model-train BoW/LSTM predictions on `examples`
    costs: CostModel
    grid_size: int = 201
    include_decision: bool = False


def fit(model: Network, train: list[Example], config: TrainConfig, scorer: Callable[[Network], float],
        name: str = "") -> list[EpochRecord]:
    """
    Train `model` in place and restore its best snapshot.

    Args:
        model: Network to train; only model.parameters() are updated.
        train: Training examples.
        config: Optimizer, batching and early-stopping settings.
        scorer: Validation score of the current model, higher is better.
        name: Label for log lines.

    Returns:
        Per-epoch history.

    Raises:
        TrainingError: the loss or a gradient became non-finite.
    """
    if not train:
        raise InputError(f"{name or model.kind}: empty training set")
    rng = make_rng(config.seed)
    params = model.parameters()
    for p in params:
        p.reset_state()
    optimizer = Adam(params, config.lr, config.beta1, config.beta2, config.eps)
    show_progress = logger.isEnabledFor(logging.DEBUG)

    history = []
    best_metric = -math.inf
    best_snapshot = model.snapshot()
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train))
        total_loss = 0.0
        batches = range(0, len(train), config.batch_size)
        for start in tqdm.tqdm(batches, desc=f"{name or model.kind} epoch {epoch}", disable=not show_progress,
                          leave=False):
            batch = [train[i] for i in order[start:start + config.batch_size]]
            optimizer.zero_grad()
            loss = model.loss_and_backward(batch, rng)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite training loss ({loss})", epoch)
            try:
                optimizer.step()
            except NumericError as e:
                raise TrainingError(str(e), epoch) from e
            total_loss += loss * len(batch)

        record = EpochRecord(epoch, total_loss / len(train), float(scorer(model)))
        history.append(record)
        logger.info("%s epoch %d: loss=%.4f metric=%.4f", name or model.kind, epoch, record.loss, record.metric)

        if record.metric > best_metric:
            best_metric = record.metric
            best_snapshot = model.snapshot()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                logger.info("%s: early stop after epoch %d", name or model.kind, epoch)
                break

    model.load_arrays(best_snapshot)
    return history


def train_classifier(model: Network, train: list[Example], valid: list[Example],
                     config: TrainConfig, name: str = ""):
    """Train a BoW or LSTM classifier, selecting the epoch with the best validation accuracy.

    Returns:
        (model, history)
    """
    if not valid:
        raise InputError(f"{name or model.kind}: empty validation set")
    history = fit(model, train, config, lambda m: m.accuracy(valid), name)
    return model, history


def relabel(examples: list[Example], labels) -> list[Example]:
    """Same inputs with decision labels (0 BoW, 1 LSTM)."""
    labels = np.asarray(labels)
    if len(labels) != len(examples):
        raise InputError(f"{len(examples)} examples but {len(labels)} labels")
    return [dataclasses.replace(e, label=int(y)) for e, y in zip(examples, labels)]


def decision_auc(net: DecisionNet, bundle: DecisionValidation) -> float:
    """Validation AUC of the decision-network strategy."""
    preds = dataclasses.replace(bundle.preds, decision_probs=net.predict_lstm_prob(bundle.examples))
    curve = speed_accuracy_curve("decision_net", preds, bundle.costs, bundle.grid_size,
                                 include_decision=bundle.include_decision)
    return auc(curve)


def train_decision_net(net: DecisionNet, decision_train: list[Example], bundle: DecisionValidation,
                       config: TrainConfig):
    """
    Train the decision head on labeled decision-train examples.

    Snapshot selection maximizes validation AUC unless the config asks for
    accuracy. The inherited trunk is never updated.

    Returns:
        (net, history)
    """
    labels = {e.label for e in decision_train}
    if len(labels) < 2:
        logger.warning("decision labels are all %s; the decision network will learn a constant",
                       "LSTM" if labels == {1} else "BoW")
    if config.selection_metric == "auc":
        scorer = lambda m: decision_auc(m, bundle)  # noqa: E731
    else:
        gold = generate_decision_labels(bundle.preds.bow_pred, bundle.preds.lstm_pred, bundle.preds.gold)
        scorer = lambda m: float(np.mean(m.predict(bundle.examples) == gold))  # noqa: E731
    history = fit(net, decision_train, config, scorer, "decision")
    return net, history
