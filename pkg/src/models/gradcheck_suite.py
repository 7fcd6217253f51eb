"""Finite-difference checks for every layer and each full network (dropout off)."""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from src.data.treebank import Example
from src.models.bow import BoWClassifier
from src.models.decision import DecisionNet
from src.models.lstm import LSTMClassifier
from src.nn.gradcheck import grad_check
from src.nn.layers import BiLSTM, Dense, mean_max_pool, mean_max_pool_backward, softmax_cross_entropy_batch
from src.nn.tensor import Parameter, derive_rng, make_rng

logger = logging.getLogger(__name__)

PASS_THRESHOLD = 1e-4
SUITE_SEEDS = range(20)
VOCAB = 12
EMB_DIM = 5


@dataclass(frozen=True)
class GradcheckResult:
    name: str
    seed: int
    max_rel_error: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < PASS_THRESHOLD


def _random_examples(rng, n: int = 4, max_len: int = 5) -> list[Example]:
    return [
        Example(tuple(int(t) for t in rng.integers(2, VOCAB, size=int(rng.integers(1, max_len + 1)))),
                int(rng.integers(2)))
        for _ in range(n)
    ]


def _offset_biases(layers, seed: int) -> None:
    """Nonzero biases keep ReLU pre-activations off the kink when a layer sees an all-zero input."""
    rng = derive_rng(seed, "gradcheck.biases")
    for layer in layers:
        magnitude = rng.uniform(0.1, 0.5, size=layer.b.value.shape)
        layer.b.value[...] = magnitude * rng.choice([-1.0, 1.0], size=magnitude.shape)


def _weighted_sum_loss(forward: Callable[[], np.ndarray], backward: Callable[[np.ndarray], object],
                       weights: np.ndarray) -> Callable[[], float]:
    """Scalar loss sum(weights * output) so any layer can be checked in isolation."""
    def loss_fn():
        out = forward()
        backward(weights)
        return float(np.sum(weights * out))
    return loss_fn


def check_dense(seed: int) -> float:
    rng = make_rng(seed)
    layer = Dense("check.dense", 6, 4, "relu", rng)
    x = rng.normal(size=(3, 6))
    weights = rng.normal(size=(3, 4))
    return grad_check(_weighted_sum_loss(lambda: layer.forward(x), layer.backward, weights),
                      layer.parameters(), seed=seed)


def check_bilstm(seed: int) -> float:
    rng = make_rng(seed)
    layer = BiLSTM("check.bilstm", 3, 4, rng)
    x = rng.normal(size=(2, 5, 3))
    weights = rng.normal(size=(2, 5, 8))
    return grad_check(_weighted_sum_loss(lambda: layer.forward(x), layer.backward, weights),
                      layer.parameters(), seed=seed)


def check_pool(seed: int) -> float:
    rng = make_rng(seed)
    states = Parameter("check.states", rng.normal(size=(2, 4, 3)))
    weights = rng.normal(size=(2, 6))

    def loss_fn():
        pooled = mean_max_pool(states.value)
        states.grad += mean_max_pool_backward(weights, states.value)
        return float(np.sum(weights * pooled))

    return grad_check(loss_fn, [states], seed=seed)


def check_softmax_cross_entropy(seed: int) -> float:
    rng = make_rng(seed)
    logits = Parameter("check.logits", rng.normal(size=(4, 2)))
    labels = rng.integers(2, size=4)

    def loss_fn():
        loss, _, grad = softmax_cross_entropy_batch(logits.value, labels)
        logits.grad += grad
        return loss

    return grad_check(loss_fn, [logits], seed=seed)


def _model_check(model, examples: list[Example], seed: int) -> float:
    rng = make_rng(seed)
    return grad_check(lambda: model.loss_and_backward(examples, rng), model.parameters(), seed=seed)


def check_bow(seed: int) -> float:
    rng = make_rng(seed)
    model = BoWClassifier(rng.normal(size=(VOCAB, EMB_DIM)), hidden=6, dropout=0.0, rng=rng)
    return _model_check(model, _random_examples(rng), seed)


def check_lstm(seed: int) -> float:
    rng = make_rng(seed)
    model = LSTMClassifier(rng.normal(size=(VOCAB, EMB_DIM)), projection=4, hidden=3, mlp_hidden=5,
                           dropout=0.0, rng=rng)
    return _model_check(model, _random_examples(rng), seed)


def check_decision(seed: int) -> float:
    rng = make_rng(seed)
    bow = BoWClassifier(rng.normal(size=(VOCAB, EMB_DIM)), hidden=6, dropout=0.0, rng=rng)
    net = DecisionNet.from_bow(bow, hidden=4, dropout=0.0, rng=rng)
    _offset_biases([net.head_hidden, net.head_output], seed)
    return _model_check(net, _random_examples(rng), seed)


CHECKS: dict[str, Callable[[int], float]] = {
    "dense": check_dense,
    "bilstm": check_bilstm,
    "mean_max_pool": check_pool,
    "softmax_cross_entropy": check_softmax_cross_entropy,
    "bow": check_bow,
    "lstm": check_lstm,
    "decision": check_decision,
}


def gradcheck_suite(seeds: Iterable[int] = SUITE_SEEDS, names: Iterable[str] | None = None) -> list[GradcheckResult]:
    """Run the named checks (all by default) once per seed."""
    selected = list(names) if names is not None else list(CHECKS)
    results = []
    for seed in seeds:
        for name in selected:
            error = CHECKS[name](seed)
            results.append(GradcheckResult(name, seed, error))
            logger.info("gradcheck %s seed=%d max rel. err %.3e", name, seed, error)
    return results
