"""Host timing of the two classifiers, in milliseconds per sample."""

import logging
import time

from src.cascade import CostModel
from src.data.treebank import Example
from src.errors import InputError

logger = logging.getLogger(__name__)

TIMING_BATCH = 64


def time_per_sample(model, examples: list[Example], batch_size: int = TIMING_BATCH,
                    repeats: int = 3) -> float:
    """Best-of-`repeats` eval-mode inference time over `examples`, ms/sample."""
    if not examples:
        raise InputError("no examples to time")
    best = float("inf")
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        for i in range(0, len(examples), batch_size):
            model.predict_proba(examples[i:i + batch_size])
        best = min(best, time.perf_counter() - start)
    return 1000.0 * best / len(examples)


def measure_costs(bow, lstm, examples: list[Example], batch_size: int = TIMING_BATCH,
                  repeats: int = 3) -> CostModel:
    """
    Measure c_bow and c_lstm on this host.

    Raises:
        InputError: the BoW did not come out cheaper than the LSTM.
    """
    c_bow = time_per_sample(bow, examples, batch_size, repeats)
    c_lstm = time_per_sample(lstm, examples, batch_size, repeats)
    logger.info("measured c_bow=%.4f ms c_lstm=%.4f ms over %d samples", c_bow, c_lstm, len(examples))
    if not 0.0 < c_bow < c_lstm:
        raise InputError(f"expected c_bow < c_lstm, measured {c_bow:.4f} and {c_lstm:.4f} ms")
    return CostModel(c_bow, c_lstm)
