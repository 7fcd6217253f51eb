"""Adam optimizer with bias correction."""

import numpy as np

from src.errors import NumericError
from src.nn.tensor import Parameter

DEFAULT_LR = 5e-4
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8


def adam_step(param: Parameter, lr: float = DEFAULT_LR, beta1: float = DEFAULT_BETA1,
              beta2: float = DEFAULT_BETA2, eps: float = DEFAULT_EPS) -> Parameter:
    """Apply one Adam update in place, zero the gradient and return the parameter."""
    grad = param.grad
    if not np.all(np.isfinite(grad)):
        raise NumericError(f"non-finite gradient for {param.name}")
    param.step_count += 1
    t = param.step_count
    param.m *= beta1
    param.m += (1.0 - beta1) * grad
    param.v *= beta2
    param.v += (1.0 - beta2) * grad * grad
    m_hat = param.m / (1.0 - beta1 ** t)
    v_hat = param.v / (1.0 - beta2 ** t)
    param.value -= lr * m_hat / (np.sqrt(v_hat) + eps)
    param.zero_grad()
    return param


class Adam:
    """Applies adam_step to a fixed parameter list."""

    def __init__(self, params: list[Parameter], lr: float = DEFAULT_LR, beta1: float = DEFAULT_BETA1,
                 beta2: float = DEFAULT_BETA2, eps: float = DEFAULT_EPS):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    def step(self) -> None:
        # check everything first so a bad gradient leaves all values untouched
        for p in self.params:
            if not np.all(np.isfinite(p.grad)):
                raise NumericError(f"non-finite gradient for {p.name}")
        for p in self.params:
            adam_step(p, self.lr, self.beta1, self.beta2, self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
