"""Central finite-difference gradient checker."""

import logging
from typing import Callable

import numpy as np

from src.nn.tensor import Parameter, make_rng

logger = logging.getLogger(__name__)

MAX_COORDS_PER_PARAM = 200
REL_FLOOR = 1e-12


def relative_error(analytic: float, numeric: float) -> float:
    """|a - n| / max(|a|, |n|, REL_FLOOR); zero when both gradients vanish."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), REL_FLOOR)


def grad_check(loss_fn: Callable[[], float], params: list[Parameter], h: float = 1e-5,
               max_coords: int = MAX_COORDS_PER_PARAM, seed: int = 0) -> float:
    """
    Compare analytic gradients against central differences.

    Args:
        loss_fn: Deterministic callable that runs forward and backward
            (accumulating into each Parameter.grad) and returns the loss.
        params: Parameters to check.
        h: Finite-difference step.
        max_coords: Coordinates sampled per parameter.
        seed: Seed for coordinate sampling.

    Returns:
        Maximum relative error over all sampled coordinates.
    """
    for p in params:
        p.zero_grad()
    loss_fn()
    analytic = {id(p): p.grad.copy() for p in params}
    rng = make_rng(seed)

    worst = 0.0
    for p in params:
        flat = p.value.reshape(-1)
        size = flat.size
        if size <= max_coords:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=max_coords, replace=False)
        grad = analytic[id(p)].reshape(-1)
        for idx in coords:
            original = flat[idx]
            flat[idx] = original + h
            plus = loss_fn()
            flat[idx] = original - h
            minus = loss_fn()
            flat[idx] = original
            numeric = (plus - minus) / (2.0 * h)
            err = relative_error(float(grad[idx]), numeric)
            if err > worst:
                worst = err
        logger.debug("gradcheck %s: running max rel. err %.3e", p.name, worst)

    for p in params:
        p.zero_grad()
    return worst
