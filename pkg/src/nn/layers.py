"""Differentiable building blocks.

The functional ops (dense_forward, dropout, softmax_cross_entropy,
bilstm_forward, mean_max_pool) are the reference contract. The layer
classes wrap them with a cached forward pass and a backward pass that
accumulates into Parameter.grad. Layer caches hold one forward call, so
forward/backward must alternate.
"""

import math

import numpy as np

from src.errors import (
    DimensionError,
    EmptySequenceError,
    LabelIndexError,
    ParameterError,
)
from src.nn.tensor import DTYPE, Parameter, Rng

ACTIVATIONS = ("identity", "relu")
MODES = ("train", "eval")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")


def sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


# ---------------------------------------------------------------------------
# Dense
# ---------------------------------------------------------------------------
def dense_forward(x, W, b, activation: str = "identity") -> np.ndarray:
    """activation(W x + b) for x of shape [n_in] or [B, n_in]."""
    x = np.asarray(x, dtype=DTYPE)
    W = np.asarray(W, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    if activation not in ACTIVATIONS:
        raise ParameterError(f"unknown activation {activation!r}")
    if W.ndim != 2 or b.shape != (W.shape[0],) or x.shape[-1] != W.shape[1]:
        raise DimensionError(
            f"dense shapes do not conform: x{x.shape}, W{W.shape}, b{b.shape}"
        )
    z = x @ W.T + b
    if activation == "relu":
        return np.maximum(z, 0.0)
    return z


class Dense:
    """Fully connected layer over a batch [B, n_in]."""

    def __init__(self, name: str, n_in: int, n_out: int, activation: str = "identity",
                 rng: Rng | None = None, zero: bool = False):
        if activation not in ACTIVATIONS:
            raise ParameterError(f"unknown activation {activation!r}")
        self.name = name
        self.activation = activation
        if zero or rng is None:
            weight = np.zeros((n_out, n_in))
        else:
            limit = math.sqrt(6.0 / (n_in + n_out))
            weight = rng.uniform(-limit, limit, size=(n_out, n_in))
        self.W = Parameter(f"{name}.W", weight)
        self.b = Parameter(f"{name}.b", np.zeros(n_out))
        self._cache = None

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.W.shape[0]

    def parameters(self) -> list[Parameter]:
        return [self.W, self.b]

    def forward(self, x: np.ndarray) -> np.ndarray:
        y = dense_forward(x, self.W.value, self.b.value, self.activation)
        self._cache = (np.asarray(x, dtype=DTYPE), y)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x, y = self._cache
        dz = dy * (y > 0.0) if self.activation == "relu" else dy
        x2 = np.atleast_2d(x)
        dz2 = np.atleast_2d(dz)
        self.W.grad += dz2.T @ x2
        self.b.grad += dz2.sum(axis=0)
        return dz @ self.W.value


# ---------------------------------------------------------------------------
# Dropout
# ---------------------------------------------------------------------------
def _dropout_mask(shape, p: float, rng: Rng) -> np.ndarray:
    return (rng.random(shape) >= p) / (1.0 - p)


def dropout(x, p: float, mode: str, rng: Rng | None = None) -> np.ndarray:
    """Inverted dropout: eval mode is the identity, train mode rescales survivors."""
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"dropout probability must be in [0, 1), got {p}")
    _check_mode(mode)
    x = np.asarray(x, dtype=DTYPE)
    if mode == "eval" or p == 0.0:
        return x
    if rng is None:
        raise ParameterError("train-mode dropout needs an rng")
    return x * _dropout_mask(x.shape, p, rng)


class Dropout:
    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise ParameterError(f"dropout probability must be in [0, 1), got {p}")
        self.p = p
        self._mask = None

    def forward(self, x: np.ndarray, mode: str, rng: Rng | None = None) -> np.ndarray:
        _check_mode(mode)
        if mode == "eval" or self.p == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ParameterError("train-mode dropout needs an rng")
        self._mask = _dropout_mask(x.shape, self.p, rng)
        return x * self._mask

    def backward(self, dy: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return dy
        return dy * self._mask


# ---------------------------------------------------------------------------
# Softmax / cross-entropy
# ---------------------------------------------------------------------------
def softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=DTYPE)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, label: int) -> tuple[float, np.ndarray]:
    """Returns (-log softmax(logits)[label], softmax(logits))."""
    logits = np.asarray(logits, dtype=DTYPE)
    if logits.ndim != 1:
        raise DimensionError(f"expected logits of shape [k], got {logits.shape}")
    k = logits.shape[0]
    if not 0 <= label < k:
        raise LabelIndexError(f"label {label} out of range for {k} classes")
    probs = softmax(logits)
    top = int(np.argmax(logits))
    rest = np.exp(np.delete(logits, top) - logits[top]).sum()
    loss = float(logits[top] - logits[label] + math.log1p(rest))
    return loss, probs


def cross_entropy_grad(probs: np.ndarray, label: int) -> np.ndarray:
    """d loss / d logits = probs - onehot(label)."""
    grad = np.array(probs, dtype=DTYPE, copy=True)
    grad[label] -= 1.0
    return grad


def softmax_cross_entropy_batch(logits: np.ndarray, labels) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean loss over a batch, the probabilities and d(mean loss)/d logits."""
    logits = np.asarray(logits, dtype=DTYPE)
    labels = np.asarray(labels, dtype=np.int64)
    n, k = logits.shape
    if labels.shape != (n,):
        raise DimensionError(f"{n} logit rows but {labels.shape} labels")
    if np.any(labels < 0) or np.any(labels >= k):
        raise LabelIndexError(f"labels out of range for {k} classes")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    losses = log_norm - shifted[rows, labels]
    probs = softmax(logits)
    grad = probs.copy()
    grad[rows, labels] -= 1.0
    return float(losses.mean()), probs, grad / n


# ---------------------------------------------------------------------------
# Pooling
# ---------------------------------------------------------------------------
def mean_max_pool(H: np.ndarray) -> np.ndarray:
    """[T, k] -> [2k] (or [B, T, k] -> [B, 2k]): column means then column maxima."""
    H = np.asarray(H, dtype=DTYPE)
    if H.ndim not in (2, 3):
        raise DimensionError(f"expected [T, k] or [B, T, k], got {H.shape}")
    if H.shape[-2] == 0:
        raise EmptySequenceError("cannot pool an empty sequence")
    return np.concatenate([H.mean(axis=-2), H.max(axis=-2)], axis=-1)


def mean_max_pool_backward(dP: np.ndarray, H: np.ndarray) -> np.ndarray:
    squeeze = H.ndim == 2
    H3 = H[None] if squeeze else H
    dP2 = dP[None] if squeeze else dP
    T, k = H3.shape[1], H3.shape[2]
    dH = np.repeat((dP2[:, :k] / T)[:, None, :], T, axis=1)
    # max routes to the first arg-max per column
    winners = H3.argmax(axis=1)[:, None, :]
    routed = np.zeros_like(H3)
    np.put_along_axis(routed, winners, dP2[:, None, k:], axis=1)
    dH = dH + routed
    return dH[0] if squeeze else dH


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------
class LSTMDirection:
    """One direction of an LSTM; gate order i, f, g, o."""

    def __init__(self, name: str, input_dim: int, hidden: int,
                 rng: Rng | None = None, zero: bool = False):
        shapes = {"W": (4 * hidden, input_dim), "U": (4 * hidden, hidden)}
        values = {}
        for key, shape in shapes.items():
            if zero or rng is None:
                values[key] = np.zeros(shape)
            else:
                bound = 1.0 / math.sqrt(hidden)
                values[key] = rng.uniform(-bound, bound, size=shape)
        bias = np.zeros(4 * hidden)
        if not zero:
            bias[hidden:2 * hidden] = 1.0
        self.hidden = hidden
        self.W = Parameter(f"{name}.W", values["W"])
        self.U = Parameter(f"{name}.U", values["U"])
        self.b = Parameter(f"{name}.b", bias)

    def parameters(self) -> list[Parameter]:
        return [self.W, self.U, self.b]


def _direction_forward(X: np.ndarray, cell: LSTMDirection):
    batch, steps, _ = X.shape
    h = cell.hidden
    hs = np.zeros((batch, steps, h))
    cs = np.zeros((batch, steps, h))
    gates = np.zeros((batch, steps, 4 * h))
    projected = X @ cell.W.value.T + cell.b.value
    h_prev = np.zeros((batch, h))
    c_prev = np.zeros((batch, h))
    U_t = cell.U.value.T
    for t in range(steps):
        z = projected[:, t] + h_prev @ U_t
        i = sigmoid(z[:, :h])
        f = sigmoid(z[:, h:2 * h])
        g = np.tanh(z[:, 2 * h:3 * h])
        o = sigmoid(z[:, 3 * h:])
        c = f * c_prev + i * g
        h_cur = o * np.tanh(c)
        gates[:, t] = np.concatenate([i, f, g, o], axis=1)
        cs[:, t] = c
        hs[:, t] = h_cur
        h_prev, c_prev = h_cur, c
    return hs, (X, hs, cs, gates)


def _direction_backward(dHs: np.ndarray, cache, cell: LSTMDirection) -> np.ndarray:
    X, hs, cs, gates = cache
    batch, steps, h = hs.shape
    dZ = np.zeros_like(gates)
    dh_next = np.zeros((batch, h))
    dc_next = np.zeros((batch, h))
    U = cell.U.value
    for t in reversed(range(steps)):
        i = gates[:, t, :h]
        f = gates[:, t, h:2 * h]
        g = gates[:, t, 2 * h:3 * h]
        o = gates[:, t, 3 * h:]
        c_prev = cs[:, t - 1] if t > 0 else np.zeros((batch, h))
        tanh_c = np.tanh(cs[:, t])
        dh = dHs[:, t] + dh_next
        do = dh * tanh_c
        dc = dh * o * (1.0 - tanh_c ** 2) + dc_next
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dz = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), dg * (1.0 - g ** 2), do * o * (1.0 - o)],
            axis=1,
        )
        dZ[:, t] = dz
        dh_next = dz @ U
    h_prevs = np.concatenate([np.zeros((batch, 1, h)), hs[:, :-1]], axis=1)
    cell.W.grad += np.einsum("btg,btd->gd", dZ, X)
    cell.U.grad += np.einsum("btg,bth->gh", dZ, h_prevs)
    cell.b.grad += dZ.sum(axis=(0, 1))
    return dZ @ cell.W.value


class BiLSTM:
    """Bidirectional single-layer LSTM with zero initial states."""

    def __init__(self, name: str, input_dim: int, hidden: int,
                 rng: Rng | None = None, zero: bool = False):
        self.input_dim = input_dim
        self.hidden = hidden
        self.fwd = LSTMDirection(f"{name}.fwd", input_dim, hidden, rng, zero)
        self.bwd = LSTMDirection(f"{name}.bwd", input_dim, hidden, rng, zero)
        self._cache = None

    def parameters(self) -> list[Parameter]:
        return self.fwd.parameters() + self.bwd.parameters()

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=DTYPE)
        squeeze = X.ndim == 2
        X3 = X[None] if squeeze else X
        if X3.ndim != 3 or X3.shape[2] != self.input_dim:
            raise DimensionError(f"expected [T, {self.input_dim}] input, got {X.shape}")
        if X3.shape[1] == 0:
            raise EmptySequenceError("bilstm input has no time steps")
        hs_f, cache_f = _direction_forward(X3, self.fwd)
        hs_b, cache_b = _direction_forward(X3[:, ::-1], self.bwd)
        out = np.concatenate([hs_f, hs_b[:, ::-1]], axis=2)
        self._cache = (squeeze, cache_f, cache_b)
        return out[0] if squeeze else out

    def backward(self, dH: np.ndarray) -> np.ndarray:
        squeeze, cache_f, cache_b = self._cache
        dH3 = dH[None] if squeeze else dH
        h = self.hidden
        dX = _direction_backward(dH3[:, :, :h], cache_f, self.fwd)
        dX_rev = _direction_backward(dH3[:, ::-1, h:], cache_b, self.bwd)
        dX = dX + dX_rev[:, ::-1]
        return dX[0] if squeeze else dX


def bilstm_forward(X, params: BiLSTM, hidden: int | None = None) -> np.ndarray:
    """[T, d] -> [T, 2h]; row t is forward state at t then backward state at t."""
    if hidden is not None and hidden != params.hidden:
        raise DimensionError(f"hidden width {hidden} does not match weights ({params.hidden})")
    X = np.asarray(X, dtype=DTYPE)
    squeeze = X.ndim == 2
    X3 = X[None] if squeeze else X
    if X3.ndim != 3 or X3.shape[2] != params.input_dim:
        raise DimensionError(f"expected [T, {params.input_dim}] input, got {X.shape}")
    if X3.shape[1] == 0:
        raise EmptySequenceError("bilstm input has no time steps")
    hs_f, _ = _direction_forward(X3, params.fwd)
    hs_b, _ = _direction_forward(X3[:, ::-1], params.bwd)
    out = np.concatenate([hs_f, hs_b[:, ::-1]], axis=2)
    return out[0] if squeeze else out
