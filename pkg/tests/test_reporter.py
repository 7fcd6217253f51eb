"""Tests for report assembly and the CSV / JSON / markdown artifacts."""

import csv
import json

import numpy as np
import pytest

from src.analyzers.curves import Curve, CurvePoint, auc, speed_accuracy_curve
from src.analyzers.diagnostics import bucket_accuracy, cumulative_lstm_usage, usage_thresholds
from src.cascade import STRATEGY_TAGS, CostModel, EvalPredictions, confusion
from src.nn.tensor import make_rng
from src.reporter import (
    CURVE_HEADER,
    SplitEvaluation,
    ascii_bar,
    build_report,
    export_report,
    fmt,
    generate_markdown,
    read_curve_csv,
    write_curve_csv,
)

COSTS = CostModel()


def _make_result(split: str, n: int = 40, seed: int = 0, hidden: int = 3) -> SplitEvaluation:
    rng = make_rng(seed)
    p_bow = rng.uniform(size=n)
    p_lstm = rng.uniform(size=n)
    preds = EvalPredictions(
        gold=rng.integers(2, size=n),
        bow_probs=np.stack([1 - p_bow, p_bow], axis=1),
        lstm_probs=np.stack([1 - p_lstm, p_lstm], axis=1),
        decision_probs=rng.uniform(size=n),
        bow_hidden=rng.normal(size=(n, hidden)),
    )
    curves = {s: speed_accuracy_curve(s, preds, COSTS, 11) for s in STRATEGY_TAGS}
    thresholds = usage_thresholds()
    return SplitEvaluation(
        split=split,
        preds=preds,
        confusion=confusion(preds.bow_pred, preds.lstm_pred, preds.gold),
        curves=curves,
        aucs={s: auc(c) for s, c in curves.items()},
        buckets=bucket_accuracy(preds.bow_max_prob, preds.bow_correct),
        usage_thresholds=thresholds,
        usage=cumulative_lstm_usage(preds.bow_max_prob, thresholds),
    )


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


class TestBuildReport:
    def test_three_entries_per_split(self):
        results = [_make_result("valid"), _make_result("test", seed=1)]
        report = build_report(results, COSTS, {"master": 0})
        for split in ("valid", "test"):
            entries = [e for e in report["results"] if e["split"] == split]
            assert sorted(e["strategy"] for e in entries) == sorted(STRATEGY_TAGS)
        assert report["interpolation"] == "trapezoid"
        assert report["cost_model"] == {"c_bow": 0.16, "c_lstm": 1.36, "c_decision": 0.0}
        assert report["seeds"] == {"master": 0}

    def test_split_summary(self):
        result = _make_result("valid")
        summary = build_report([result], COSTS, {})["splits"]["valid"]
        assert summary["n"] == 40
        assert summary["bow_accuracy"] == result.preds.bow_accuracy
        assert summary["confusion"] == result.confusion.as_dict()
        assert summary["buckets"] == result.buckets.rows()
        assert [row["fraction"] for row in summary["lstm_usage"]] == [float(u) for u in result.usage]

    def test_same_inputs_same_json(self):
        a = build_report([_make_result("valid")], COSTS, {"master": 3}, {"grid_size": 11})
        b = build_report([_make_result("valid")], COSTS, {"master": 3}, {"grid_size": 11})
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


class TestCurveCsv:
    def test_header_and_anchor(self, tmp_path):
        curve = Curve("prob_threshold", [CurvePoint(0.0, 0.88), CurvePoint(0.5, 0.85, 0.75)])
        rows = _read_rows(write_curve_csv(tmp_path / "curve_prob_threshold.csv", curve))
        assert rows[0] == CURVE_HEADER
        assert rows[1] == ["", "0", "0.88"]
        assert rows[2] == ["0.75", "0.5", "0.85"]

    def test_reload_identical(self, tmp_path):
        curve = Curve("decision_net", [CurvePoint(0.0, 0.875), CurvePoint(0.25, 0.8125, 0.5),
                                       CurvePoint(0.5, 0.75, 1.0)])
        path = write_curve_csv(tmp_path / "curve_decision_net.csv", curve)
        assert read_curve_csv(path) == curve

    def test_reload_six_digits(self, tmp_path):
        curve = _make_result("valid").curves["prob_threshold"]
        reloaded = read_curve_csv(write_curve_csv(tmp_path / "curve_prob_threshold.csv", curve))
        assert reloaded.strategy == "prob_threshold"
        assert [p.savings for p in reloaded.points] == [float(fmt(p.savings)) for p in curve.points]

    def test_bad_header(self, tmp_path):
        path = tmp_path / "curve_x.csv"
        path.write_text("a,b,c\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_curve_csv(path)


class TestExportReport:
    def test_writes_every_artifact(self, tmp_path):
        results = [_make_result("valid"), _make_result("test", n=25, seed=2)]
        report = build_report(results, COSTS, {"master": 1})
        paths = export_report(report, results, tmp_path)

        assert json.loads((tmp_path / "report.json").read_text(encoding="utf-8")) == report
        assert (tmp_path / "report.md").exists()
        for split, n in (("valid", 40), ("test", 25)):
            for strategy in STRATEGY_TAGS:
                assert (tmp_path / split / f"curve_{strategy}.csv").exists()
            activations = _read_rows(tmp_path / split / "activations.csv")
            assert len(activations) == n + 1
            assert activations[0] == ["id", "label", "bow_correct", "lstm_correct", "decision_prob",
                                      "h1", "h2", "h3"]
            confusion_rows = _read_rows(tmp_path / split / "confusion.csv")
            assert sum(float(row[2]) for row in confusion_rows[1:]) == pytest.approx(1.0, abs=1e-5)
            assert len(_read_rows(tmp_path / split / "buckets.csv")) == 11
            assert len(_read_rows(tmp_path / split / "usage.csv")) == 12
        assert paths["report.json"] == tmp_path / "report.json"

    def test_markdown(self):
        results = [_make_result("valid")]
        text = generate_markdown(build_report(results, COSTS, {}), results)
        assert "| Probability threshold | valid |" in text
        assert "Joint correctness" in text
        assert "max savings 88.2%" in text


class TestAsciiBar:
    def test_full_and_empty(self):
        assert ascii_bar(1.0, width=4) == "[####]"
        assert ascii_bar(0.0, width=4) == "[....]"
        assert ascii_bar(5.0, 0.0, width=4) == "[....]"

    def test_label(self):
        assert ascii_bar(50.0, 100.0, width=4, label="Naive ratio").endswith("[##..] 50.00")
