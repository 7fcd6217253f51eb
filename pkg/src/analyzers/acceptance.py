"""
Behavioral checks over a multi-seed sweep.

Each check is evaluated per seed on one split's section of report.json and
passes when at least `min_fraction` of the seeds satisfy it.
"""

import math
from dataclasses import dataclass

from src.errors import InputError

MIN_LSTM_MARGIN = 0.03
CONFIDENT_THRESHOLD = 0.9


@dataclass(frozen=True)
class BehaviorCheck:
    name: str
    description: str
    passed_seeds: tuple[int, ...]
    n_seeds: int
    min_fraction: float

    @property
    def required(self) -> int:
        return math.ceil(self.min_fraction * self.n_seeds - 1e-9)

    @property
    def passed(self) -> bool:
        return len(self.passed_seeds) >= self.required

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "passed_seeds": list(self.passed_seeds),
            "required": self.required,
            "n_seeds": self.n_seeds,
            "passed": self.passed,
        }


def _auc(report: dict, split: str, strategy: str) -> float:
    for entry in report["results"]:
        if entry["split"] == split and entry["strategy"] == strategy:
            return entry["auc"]
    raise InputError(f"report has no {strategy} result for split {split}")


def lstm_beats_bow(report: dict, split: str) -> bool:
    info = report["splits"][split]
    return info["lstm_accuracy"] - info["bow_accuracy"] >= MIN_LSTM_MARGIN


def guided_beats_naive(report: dict, split: str) -> bool:
    return _auc(report, split, "prob_threshold") > _auc(report, split, "naive_ratio")


def confident_bow_is_better(report: dict, split: str) -> bool:
    """Accuracy over examples with BoW confidence >= 0.9 exceeds overall BoW accuracy."""
    info = report["splits"][split]
    for row in info["buckets"]:
        if abs(row["low"] - CONFIDENT_THRESHOLD) < 1e-9:
            accuracy = row["cumulative_accuracy"]
            return accuracy is not None and accuracy > info["bow_accuracy"]
    raise InputError(f"no bucket starts at {CONFIDENT_THRESHOLD}")


def usage_is_monotone(report: dict, split: str) -> bool:
    usage = sorted(report["splits"][split]["lstm_usage"], key=lambda row: row["threshold"])
    fractions = [row["fraction"] for row in usage]
    return all(a <= b for a, b in zip(fractions, fractions[1:]))


CHECKS = (
    ("lstm_beats_bow", f"LSTM accuracy exceeds BoW by >= {MIN_LSTM_MARGIN:.0%}", lstm_beats_bow, 0.8),
    ("guided_beats_naive", "probability-threshold AUC exceeds naive-ratio AUC", guided_beats_naive, 0.9),
    ("confident_bow_is_better", f"BoW accuracy at confidence >= {CONFIDENT_THRESHOLD} exceeds overall",
     confident_bow_is_better, 0.8),
    ("usage_is_monotone", "LSTM usage is non-decreasing in the threshold", usage_is_monotone, 1.0),
)


def behavior_checks(reports: dict[int, dict], split: str = "valid") -> list[BehaviorCheck]:
    """Evaluate every behavioral check over the per-seed reports of a sweep."""
    if not reports:
        raise InputError("behavior checks need at least one report")
    seeds = sorted(reports)
    return [
        BehaviorCheck(name, description, tuple(s for s in seeds if holds(reports[s], split)),
                      len(seeds), min_fraction)
        for name, description, holds, min_fraction in CHECKS
    ]
