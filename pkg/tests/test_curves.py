"""Tests for speed-accuracy curves and their AUC."""

import numpy as np
import pytest

from src.analyzers.curves import (
    Curve,
    CurvePoint,
    auc,
    knob_grid,
    naive_ratio_curve,
    normalize_points,
    speed_accuracy_curve,
)
from src.analyzers.diagnostics import cumulative_lstm_usage
from src.cascade import CostModel, EvalPredictions
from src.errors import DegenerateCurveError, InputError, ParameterError
from src.nn.tensor import make_rng

COSTS = CostModel(0.16, 1.36)
MAX_SAVINGS = 1.0 - 0.16 / 1.36


def _make_preds(n=120, seed=0, with_decision=True):
    rng = make_rng(seed)
    gold = rng.integers(2, size=n)
    confidence = rng.uniform(0.5, 1.0, size=n)
    # BoW is right more often when confident
    bow_right = rng.uniform(size=n) < confidence
    bow_pred = np.where(bow_right, gold, 1 - gold)
    bow_probs = np.where(bow_pred[:, None] == 1,
                         np.stack([1 - confidence, confidence], axis=1),
                         np.stack([confidence, 1 - confidence], axis=1))
    lstm_pred = np.where(rng.uniform(size=n) < 0.9, gold, 1 - gold)
    lstm_probs = np.stack([1.0 - lstm_pred * 0.8 - 0.1, lstm_pred * 0.8 + 0.1], axis=1)
    return EvalPredictions(gold, bow_probs, lstm_probs,
                           decision_probs=rng.uniform(size=n) if with_decision else None)


def _brute_force_point(preds, strategy, knob):
    use_lstm = np.zeros(preds.n, dtype=bool)
    correct = 0
    for i in range(preds.n):
        if strategy == "prob_threshold":
            use_lstm[i] = preds.bow_max_prob[i] < knob
        else:
            use_lstm[i] = preds.decision_probs[i] > knob
        pred = preds.lstm_pred[i] if use_lstm[i] else preds.bow_pred[i]
        correct += int(pred == preds.gold[i])
    alpha = (preds.n - int(use_lstm.sum())) / preds.n
    cost = COSTS.c_bow + (1.0 - alpha) * COSTS.c_lstm
    return 1.0 - cost / COSTS.c_lstm, correct / preds.n


class TestNaiveRatioCurve:
    def test_endpoints(self):
        curve = naive_ratio_curve(0.82, 0.88, COSTS)
        assert curve.points[0].savings == 0.0
        assert curve.points[0].accuracy == 0.88
        assert curve.points[-1].savings == pytest.approx(MAX_SAVINGS, abs=1e-12)
        assert curve.points[-1].accuracy == pytest.approx(0.82, abs=1e-12)

    def test_midpoint(self):
        curve = naive_ratio_curve(0.82, 0.88, COSTS)
        mid = next(p for p in curve.points if p.knob is not None and abs(p.knob - 0.5) < 1e-9)
        assert mid.savings == pytest.approx(0.4412, abs=1e-4)
        assert mid.accuracy == pytest.approx(0.85, abs=1e-12)

    def test_auc_is_mean_of_accuracies(self):
        assert auc(naive_ratio_curve(0.82, 0.88, COSTS)) == pytest.approx(85.0, abs=1e-6)

    def test_sampled_needs_rng(self):
        with pytest.raises(InputError):
            speed_accuracy_curve("naive_ratio", _make_preds(), COSTS, naive_mode="sampled")

    def test_sampled_is_seeded(self):
        preds = _make_preds()
        a = speed_accuracy_curve("naive_ratio", preds, COSTS, 21, naive_mode="sampled", rng=make_rng(1))
        b = speed_accuracy_curve("naive_ratio", preds, COSTS, 21, naive_mode="sampled", rng=make_rng(1))
        assert a.as_dict() == b.as_dict()

    def test_unknown_mode(self):
        with pytest.raises(ParameterError):
            speed_accuracy_curve("naive_ratio", _make_preds(), COSTS, naive_mode="other")


class TestRoutedCurves:
    @pytest.mark.parametrize("strategy", ["prob_threshold", "decision_net"])
    def test_points_match_brute_force(self, strategy):
        preds = _make_preds(seed=2)
        curve = speed_accuracy_curve(strategy, preds, COSTS, 51)
        assert curve.points[0] == CurvePoint(0.0, preds.lstm_accuracy)
        for point in curve.points[1:]:
            assert (point.savings, point.accuracy) == _brute_force_point(preds, strategy, point.knob)

    @pytest.mark.parametrize("strategy", ["prob_threshold", "decision_net"])
    def test_savings_increase_from_zero(self, strategy):
        curve = speed_accuracy_curve(strategy, _make_preds(seed=3), COSTS)
        savings = curve.savings
        assert savings[0] == 0.0
        assert np.all(np.diff(savings) > 0.0)
        assert np.all((curve.accuracy >= 0.0) & (curve.accuracy <= 1.0))

    def test_max_savings_is_all_bow(self):
        preds = _make_preds(seed=4)
        curve = speed_accuracy_curve("prob_threshold", preds, COSTS)
        assert curve.max_savings == pytest.approx(MAX_SAVINGS, abs=1e-12)
        assert curve.points[-1].accuracy == preds.bow_accuracy
        assert curve.points[-1].knob == 0.5

    def test_decision_probs_required(self):
        with pytest.raises(InputError):
            speed_accuracy_curve("decision_net", _make_preds(with_decision=False), COSTS)

    def test_decision_cost_shrinks_savings(self):
        preds = _make_preds(seed=5)
        costs = CostModel(0.16, 1.36, c_decision=0.05)
        free = speed_accuracy_curve("decision_net", preds, costs)
        charged = speed_accuracy_curve("decision_net", preds, costs, include_decision=True)
        assert charged.max_savings == pytest.approx(free.max_savings - 0.05 / 1.36, abs=1e-12)

    def test_bow_fraction_matches_usage(self):
        preds = _make_preds(seed=6)
        curve = speed_accuracy_curve("prob_threshold", preds, COSTS, 41)
        for point in curve.points[1:]:
            alpha = 1.0 - (1.0 - point.savings - COSTS.c_bow / COSTS.c_lstm)
            usage = cumulative_lstm_usage(preds.bow_max_prob, [point.knob])[0]
            assert alpha == pytest.approx(1.0 - usage, abs=1e-9)

    def test_empty_split(self):
        empty = EvalPredictions(np.zeros(0), np.zeros((0, 2)), np.zeros((0, 2)))
        with pytest.raises(InputError):
            speed_accuracy_curve("prob_threshold", empty, COSTS)


class TestAuc:
    def test_constant(self):
        curve = Curve("x", [CurvePoint(0.0, 0.88), CurvePoint(0.5, 0.88), CurvePoint(0.8824, 0.88)])
        assert auc(curve) == pytest.approx(88.0, abs=1e-12)

    def test_linear(self):
        curve = Curve("x", [CurvePoint(0.0, 0.88), CurvePoint(0.8824, 0.82)])
        assert auc(curve) == pytest.approx(85.0, abs=1e-12)

    def test_riemann_oracle(self):
        curve = speed_accuracy_curve("prob_threshold", _make_preds(seed=7), COSTS, 31)
        span = curve.savings[-1]
        n = 1_000_000
        grid = (np.arange(n) + 0.5) / n * span
        riemann = 100.0 * np.interp(grid, curve.savings, curve.accuracy).mean()
        assert auc(curve) == pytest.approx(riemann, abs=1e-9)

    def test_collinear_insertion(self):
        base = Curve("x", [CurvePoint(0.0, 0.9), CurvePoint(0.4, 0.86), CurvePoint(0.8, 0.8)])
        extended = Curve("x", [CurvePoint(0.0, 0.9), CurvePoint(0.2, 0.88), CurvePoint(0.4, 0.86),
                               CurvePoint(0.6, 0.83), CurvePoint(0.8, 0.8)])
        assert auc(extended) == pytest.approx(auc(base), abs=1e-12)

    def test_single_point(self):
        with pytest.raises(DegenerateCurveError):
            auc(Curve("x", [CurvePoint(0.0, 0.9)]))

    def test_zero_span(self):
        with pytest.raises(DegenerateCurveError):
            auc(Curve("x", [CurvePoint(0.0, 0.9), CurvePoint(0.0, 0.8)]))

    def test_bounded(self):
        for seed in range(5):
            preds = _make_preds(seed=seed)
            for strategy in ("naive_ratio", "prob_threshold", "decision_net"):
                value = auc(speed_accuracy_curve(strategy, preds, COSTS, 21))
                assert 0.0 <= value <= 100.0


class TestNormalizePoints:
    def test_drops_negative_and_duplicate_savings(self):
        points = [CurvePoint(0.3, 0.8, 0.7), CurvePoint(-0.1, 0.9, 0.1), CurvePoint(0.0, 0.88),
                  CurvePoint(0.3, 0.85, 0.6)]
        assert normalize_points(points) == [CurvePoint(0.0, 0.88), CurvePoint(0.3, 0.85, 0.6)]

    def test_grid(self):
        assert knob_grid("prob_threshold", 3).tolist() == [0.5, 0.75, 1.0]
        assert knob_grid("decision_net", 2).tolist() == [0.0, 1.0]
        with pytest.raises(ParameterError):
            knob_grid("prob_threshold", 1)
        with pytest.raises(ParameterError):
            knob_grid("other", 5)
