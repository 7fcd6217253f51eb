"""
BoW confidence diagnostics - how accurate the cheap model is per confidence
bucket, and how often the LSTM would be triggered at each threshold.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import AlignmentError, ParameterError

DEFAULT_BIN_WIDTH = 0.05


@dataclass
class BucketHistogram:
    """Bins over [0.5, 1.0]; bin i covers (edges[i], edges[i+1]], the first one closed on the left."""

    bin_width: float
    edges: np.ndarray
    counts: np.ndarray
    correct: np.ndarray
    cumulative_accuracy: np.ndarray  # over every example with max-prob >= the bin's lower edge
    cumulative_counts: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def accuracy(self) -> np.ndarray:
        """Per-bin accuracy; NaN for empty bins."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.correct / np.maximum(self.counts, 1), np.nan)

    def rows(self) -> list[dict]:
        accuracy = self.accuracy
        return [
            {
                "low": float(self.edges[i]),
                "high": float(self.edges[i + 1]),
                "count": int(self.counts[i]),
                "accuracy": None if np.isnan(accuracy[i]) else float(accuracy[i]),
                "cumulative_count": int(self.cumulative_counts[i]),
                "cumulative_accuracy": (None if self.cumulative_counts[i] == 0
                                        else float(self.cumulative_accuracy[i])),
            }
            for i in range(self.n_bins)
        ]


def bucket_edges(bin_width: float) -> np.ndarray:
    if not 0.0 < bin_width <= 0.5:
        raise ParameterError(f"bin_width must be in (0, 0.5], got {bin_width}")
    n_bins = int(np.ceil(0.5 / bin_width - 1e-9))
    edges = 0.5 + bin_width * np.arange(n_bins + 1)
    edges[-1] = 1.0
    return edges


def bucket_accuracy(bow_max_probs, correct_flags, bin_width: float = DEFAULT_BIN_WIDTH) -> BucketHistogram:
    """
    Group examples by BoW max probability and report accuracy per bucket.

    Args:
        bow_max_probs: Max class probability of the BoW per example.
        correct_flags: Whether the BoW prediction was right, per example.
        bin_width: Bucket width over [0.5, 1.0].

    Returns:
        BucketHistogram whose counts sum to the number of examples.
    """
    probs = np.asarray(bow_max_probs, dtype=np.float64)
    flags = np.asarray(correct_flags, dtype=bool)
    if probs.shape != flags.shape:
        raise AlignmentError(f"{len(probs)} probabilities but {len(flags)} correctness flags")
    edges = bucket_edges(bin_width)
    n_bins = len(edges) - 1
    bins = np.clip(np.searchsorted(edges, probs, side="left") - 1, 0, n_bins - 1)
    counts = np.bincount(bins, minlength=n_bins)
    correct = np.bincount(bins, weights=flags.astype(np.float64), minlength=n_bins)

    cumulative_counts = np.zeros(n_bins, dtype=np.int64)
    cumulative_accuracy = np.zeros(n_bins)
    for i, low in enumerate(edges[:-1]):
        above = probs >= low
        cumulative_counts[i] = int(above.sum())
        if cumulative_counts[i]:
            cumulative_accuracy[i] = int(flags[above].sum()) / cumulative_counts[i]
    return BucketHistogram(bin_width, edges, counts, correct, cumulative_accuracy, cumulative_counts)


def cumulative_lstm_usage(bow_max_probs, thresholds) -> np.ndarray:
    """Fraction of examples with max-prob strictly below each threshold."""
    probs = np.sort(np.asarray(bow_max_probs, dtype=np.float64))
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if probs.size == 0:
        return np.zeros_like(thresholds)
    return np.searchsorted(probs, thresholds, side="left") / probs.size


def usage_thresholds(bin_width: float = DEFAULT_BIN_WIDTH) -> np.ndarray:
    """Thresholds used for the usage table: the bucket edges."""
    return bucket_edges(bin_width)


def format_bucket_chart(histogram: BucketHistogram, width: int = 30) -> str:
    """
    ASCII bar chart of per-bucket accuracy.

    Returns:
        Multi-line string, one row per bucket.
    """
    lines = []
    for row in histogram.rows():
        label = f"{row['low']:.2f}-{row['high']:.2f}"
        if row["accuracy"] is None:
            lines.append(f"  {label} | {'':<{width}} (empty)")
            continue
        bar = "#" * round(row["accuracy"] * width)
        lines.append(f"  {label} | {bar:<{width}} {row['accuracy'] * 100:5.1f}% (n={row['count']})")
    return "\n".join(lines)


def format_usage_chart(thresholds, usage, width: int = 30) -> str:
    lines = []
    for tau, fraction in zip(thresholds, usage):
        bar = "=" * round(float(fraction) * width)
        lines.append(f"  tau={float(tau):.2f} | {bar:<{width}} {float(fraction) * 100:5.1f}%")
    return "\n".join(lines)
