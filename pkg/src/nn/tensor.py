"""Parameters and random streams.

Tensors are plain float64 numpy arrays; a Parameter bundles a value with its
gradient and Adam moment buffers.
"""

import zlib
from dataclasses import dataclass, field

import numpy as np

from src.errors import DimensionError, NumericError

DTYPE = np.float64

Rng = np.random.Generator


def make_rng(seed: int) -> Rng:
    """PCG64 generator; same seed gives the same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_rng(seed: int, name: str) -> Rng:
    """Independent stream for a named stage, derived from a master seed."""
    sequence = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode("utf-8"))])
    return np.random.Generator(np.random.PCG64(sequence))


def check_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        raise NumericError(f"non-finite values in {what}")


@dataclass
class Parameter:
    name: str
    value: np.ndarray
    grad: np.ndarray = field(default=None)
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)
    step_count: int = 0

    def __post_init__(self):
        self.value = np.ascontiguousarray(self.value, dtype=DTYPE)
        for buffer in ("grad", "m", "v"):
            current = getattr(self, buffer)
            if current is None:
                setattr(self, buffer, np.zeros_like(self.value))
            elif np.shape(current) != self.value.shape:
                raise DimensionError(
                    f"{self.name}.{buffer} has shape {np.shape(current)}, expected {self.value.shape}"
                )

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def reset_state(self) -> None:
        """Clear optimizer moments (used when a fresh training phase starts)."""
        self.m[...] = 0.0
        self.v[...] = 0.0
        self.step_count = 0
        self.zero_grad()


def derive_seed(seed: int, name: str) -> int:
    """Integer seed for a named stage (for configs that carry plain ints)."""
    sequence = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode("utf-8"))])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
