"""Report artifacts: report.json, per-split CSV tables and a markdown summary with ASCII bars."""

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from src.analyzers.curves import INTERPOLATION, Curve, CurvePoint
from src.analyzers.diagnostics import BucketHistogram, format_bucket_chart, format_usage_chart
from src.cascade import STRATEGY_TAGS, ConfusionMatrix, CostModel, EvalPredictions

logger = logging.getLogger(__name__)

REPORT_FORMAT = 1
CURVE_HEADER = ["knob", "savings", "accuracy"]

STRATEGY_NAMES = {
    "naive_ratio": "Naive ratio",
    "prob_threshold": "Probability threshold",
    "decision_net": "Decision network",
}


@dataclass
class SplitEvaluation:
    """Everything computed for one evaluation split."""

    split: str
    preds: EvalPredictions
    confusion: ConfusionMatrix
    curves: dict[str, Curve]
    aucs: dict[str, float]
    buckets: BucketHistogram
    usage_thresholds: np.ndarray
    usage: np.ndarray


def fmt(value: float) -> str:
    """Six significant digits, '.' decimal separator."""
    return f"{float(value):.6g}"


def ascii_bar(value, max_value=1.0, width=30, label=""):
    """Render a single ASCII bar."""
    if max_value == 0:
        filled = 0
    else:
        filled = int(round((value / max_value) * width))
    filled = max(0, min(width, filled))
    bar = "[" + "#" * filled + "." * (width - filled) + "]"
    if label:
        return f"{label:<24} {bar} {value:.2f}"
    return bar


def build_report(results: list[SplitEvaluation], costs: CostModel, seeds: dict,
                 settings: Optional[dict] = None) -> dict:
    """
    Assemble the JSON report.

    `results` holds one entry per strategy and split with its AUC and curve
    points; `splits` holds accuracies and the confusion matrix per split.
    Nothing time-dependent goes in, so equal inputs give equal reports.
    """
    entries = []
    splits = {}
    for result in results:
        for strategy in STRATEGY_TAGS:
            entries.append({
                "strategy": strategy,
                "split": result.split,
                "auc": result.aucs[strategy],
                "points": result.curves[strategy].as_dict()["points"],
            })
        splits[result.split] = {
            "n": result.preds.n,
            "bow_accuracy": result.preds.bow_accuracy,
            "lstm_accuracy": result.preds.lstm_accuracy,
            "confusion": result.confusion.as_dict(),
            "buckets": result.buckets.rows(),
            "lstm_usage": [{"threshold": float(t), "fraction": float(u)}
                           for t, u in zip(result.usage_thresholds, result.usage)],
        }
    return {
        "format": REPORT_FORMAT,
        "interpolation": INTERPOLATION,
        "cost_model": costs.as_dict(),
        "seeds": seeds,
        "settings": settings or {},
        "results": entries,
        "splits": splits,
    }


def write_curve_csv(path, curve: Curve) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CURVE_HEADER)
        for point in curve.points:
            writer.writerow(["" if point.knob is None else fmt(point.knob), fmt(point.savings), fmt(point.accuracy)])
    return path


def read_curve_csv(path, strategy: Optional[str] = None) -> Curve:
    """Reload a curve_<strategy>.csv file; the strategy defaults to the file-name suffix."""
    path = Path(path)
    if strategy is None:
        strategy = path.stem.removeprefix("curve_")
    points = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CURVE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CURVE_HEADER)}, got {header}")
        for row in reader:
            knob, savings, accuracy = row
            points.append(CurvePoint(float(savings), float(accuracy), None if knob == "" else float(knob)))
    return Curve(strategy, points)


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def write_confusion_csv(path, matrix: ConfusionMatrix) -> None:
    _write_rows(Path(path), ["bow_correct", "lstm_correct", "fraction"], [
        [1, 1, fmt(matrix.tt)],
        [1, 0, fmt(matrix.tf)],
        [0, 1, fmt(matrix.ft)],
        [0, 0, fmt(matrix.ff)],
    ])


def write_activations_csv(path, preds: EvalPredictions) -> None:
    """One row per example with the BoW last hidden state, for external embedding plots."""
    hidden = preds.bow_hidden if preds.bow_hidden is not None else np.zeros((preds.n, 0))
    header = ["id", "label", "bow_correct", "lstm_correct", "decision_prob"]
    header += [f"h{k + 1}" for k in range(hidden.shape[1])]
    bow_correct = preds.bow_correct
    lstm_correct = preds.lstm_correct
    rows = []
    for i in range(preds.n):
        decision = "" if preds.decision_probs is None else fmt(preds.decision_probs[i])
        rows.append([i, int(preds.gold[i]), int(bow_correct[i]), int(lstm_correct[i]), decision]
                    + [fmt(v) for v in hidden[i]])
    _write_rows(Path(path), header, rows)


def write_buckets_csv(path, histogram: BucketHistogram) -> None:
    def opt(value):
        return "" if value is None else fmt(value)

    _write_rows(Path(path), ["low", "high", "count", "accuracy", "cumulative_count", "cumulative_accuracy"], [
        [fmt(r["low"]), fmt(r["high"]), r["count"], opt(r["accuracy"]), r["cumulative_count"],
         opt(r["cumulative_accuracy"])]
        for r in histogram.rows()
    ])


def write_usage_csv(path, thresholds, usage) -> None:
    _write_rows(Path(path), ["threshold", "lstm_fraction"],
                [[fmt(t), fmt(u)] for t, u in zip(thresholds, usage)])


def format_auc_table(report: dict) -> str:
    lines = ["| Strategy | Split | AUC |", "|---|---|---|"]
    for entry in report["results"]:
        lines.append(f"| {STRATEGY_NAMES[entry['strategy']]} | {entry['split']} | {entry['auc']:.2f} |")
    return "\n".join(lines)


def format_split(result: SplitEvaluation) -> str:
    m = result.confusion
    lines = [
        f"## Split: {result.split} ({result.preds.n} sentences)",
        "",
        "```",
        ascii_bar(result.preds.bow_accuracy, label="BoW accuracy"),
        ascii_bar(result.preds.lstm_accuracy, label="LSTM accuracy"),
        "```",
        "",
        "### Joint correctness",
        "",
        "| | LSTM right | LSTM wrong |",
        "|---|---|---|",
        f"| **BoW right** | {m.tt:.1%} | {m.tf:.1%} |",
        f"| **BoW wrong** | {m.ft:.1%} | {m.ff:.1%} |",
        "",
        "### AUC by strategy",
        "",
        "```",
    ]
    best = max(result.aucs.values())
    for strategy in STRATEGY_TAGS:
        lines.append(ascii_bar(result.aucs[strategy], 100.0, label=STRATEGY_NAMES[strategy]))
    lines += [
        "```",
        "",
        f"Best: {best:.2f}",
        "",
        "### BoW accuracy per confidence bucket",
        "",
        "```",
        format_bucket_chart(result.buckets),
        "```",
        "",
        "### LSTM usage by probability threshold",
        "",
        "```",
        format_usage_chart(result.usage_thresholds, result.usage),
        "```",
    ]
    return "\n".join(lines)


def generate_markdown(report: dict, results: list[SplitEvaluation]) -> str:
    costs = report["cost_model"]
    sections = [
        "# Skim-reading cascade report",
        "",
        f"*Costs: BoW {costs['c_bow']:.4g} ms/sample, LSTM {costs['c_lstm']:.4g} ms/sample; "
        f"max savings {1.0 - costs['c_bow'] / costs['c_lstm']:.1%}*",
        "",
        format_auc_table(report),
        "",
        "---",
        "",
    ]
    for result in results:
        sections.append(format_split(result))
        sections.append("")
    return "\n".join(sections)


def export_report(report: dict, results: list[SplitEvaluation], out_dir) -> dict[str, Path]:
    """
    Write report.json, report.md and the per-split CSV tables under `out_dir`.

    Returns:
        Mapping of artifact name to path.

    Raises:
        OSError: an artifact could not be written (the message names the path).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for result in results:
        split_dir = out / result.split
        split_dir.mkdir(parents=True, exist_ok=True)
        for strategy, curve in result.curves.items():
            paths[f"{result.split}/curve_{strategy}"] = write_curve_csv(split_dir / f"curve_{strategy}.csv", curve)
        write_confusion_csv(split_dir / "confusion.csv", result.confusion)
        write_activations_csv(split_dir / "activations.csv", result.preds)
        write_buckets_csv(split_dir / "buckets.csv", result.buckets)
        write_usage_csv(split_dir / "usage.csv", result.usage_thresholds, result.usage)
        for name in ("confusion", "activations", "buckets", "usage"):
            paths[f"{result.split}/{name}"] = split_dir / f"{name}.csv"

    paths["report.json"] = out / "report.json"
    paths["report.json"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["report.md"] = out / "report.md"
    paths["report.md"].write_text(generate_markdown(report, results), encoding="utf-8")
    logger.info("Report written to %s", paths["report.json"])
    return paths
