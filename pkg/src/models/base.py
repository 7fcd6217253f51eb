"""Common interface for the three networks."""

from abc import ABC, abstractmethod

import numpy as np

from src.data.treebank import Example
from src.errors import DimensionError, EmptySequenceError
from src.nn.tensor import Parameter, Rng

PREDICT_BATCH = 256


def check_tokens(batch_tokens) -> list[np.ndarray]:
    arrays = [np.asarray(tokens, dtype=np.int64) for tokens in batch_tokens]
    for tokens in arrays:
        if tokens.size == 0:
            raise EmptySequenceError("cannot encode an empty token sequence")
    return arrays


class Network(ABC):
    kind: str = ""

    @abstractmethod
    def parameters(self) -> list[Parameter]:
        """Trainable parameters only."""

    @abstractmethod
    def all_parameters(self) -> list[Parameter]:
        """Every array the network needs for inference, frozen ones included."""

    @abstractmethod
    def architecture(self) -> dict:
        """Constructor arguments needed to rebuild the network."""

    @abstractmethod
    def loss_and_backward(self, examples: list[Example], rng: Rng) -> float:
        """Train-mode forward + backward over a batch; returns the mean loss."""

    @abstractmethod
    def predict_proba(self, examples: list[Example]) -> np.ndarray:
        """Eval-mode class probabilities, shape [N, 2]."""

    def named_arrays(self) -> dict[str, np.ndarray]:
        return {p.name: p.value for p in self.all_parameters()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        params = {p.name: p for p in self.all_parameters()}
        if set(params) != set(arrays):
            missing = sorted(set(params) ^ set(arrays))
            raise DimensionError(f"parameter sets differ: {missing}")
        for name, value in arrays.items():
            if params[name].shape != value.shape:
                raise DimensionError(f"{name}: shape {value.shape}, expected {params[name].shape}")
            params[name].value[...] = value

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.named_arrays().items()}

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def predict(self, examples: list[Example]) -> np.ndarray:
        return np.argmax(self.predict_proba(examples), axis=1)

    def accuracy(self, examples: list[Example]) -> float:
        if not examples:
            return 0.0
        gold = np.array([e.label for e in examples])
        return int(np.sum(self.predict(examples) == gold)) / len(examples)
