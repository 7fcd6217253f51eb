"""Tests for routing strategies, decision labels and the cost/accuracy algebra."""

import numpy as np
import pytest

from src.cascade import (
    Choice,
    ConfusionMatrix,
    CostModel,
    DecisionNetThreshold,
    EvalPredictions,
    NaiveRatio,
    ProbThreshold,
    cascade_accuracy,
    compute_cost,
    confusion,
    expected_accuracy,
    generate_decision_labels,
    route,
    route_all,
    route_mask,
)
from src.errors import AlignmentError, InputError, ParameterError
from src.nn.tensor import make_rng

COSTS = CostModel(0.16, 1.36)


def _make_preds(n=50, seed=0, with_decision=True):
    rng = make_rng(seed)
    p_pos = rng.uniform(size=n)
    lstm_pos = rng.uniform(size=n)
    return EvalPredictions(
        gold=rng.integers(2, size=n),
        bow_probs=np.stack([1.0 - p_pos, p_pos], axis=1),
        lstm_probs=np.stack([1.0 - lstm_pos, lstm_pos], axis=1),
        decision_probs=rng.uniform(size=n) if with_decision else None,
    )


class TestDecisionLabels:
    def test_only_lstm_right_is_lstm(self):
        labels = generate_decision_labels([0, 1, 0, 1], [1, 1, 0, 0], [1, 1, 1, 1])
        # bow wrong/lstm right, both right, both wrong, bow right/lstm wrong
        assert labels.tolist() == [1, 0, 0, 0]

    def test_length_mismatch(self):
        with pytest.raises(AlignmentError):
            generate_decision_labels([0, 1], [0], [0, 1])

    def test_lstm_fraction_equals_confusion_cell(self):
        preds = _make_preds(200, seed=3)
        labels = generate_decision_labels(preds.bow_pred, preds.lstm_pred, preds.gold)
        matrix = confusion(preds.bow_pred, preds.lstm_pred, preds.gold)
        assert labels.mean() == matrix.ft


class TestRoute:
    def test_prob_threshold(self):
        assert route(ProbThreshold(0.7), 0.9) == Choice.BOW
        assert route(ProbThreshold(0.7), 0.55) == Choice.LSTM

    def test_tie_goes_to_bow(self):
        assert route(ProbThreshold(0.7), 0.7) == Choice.BOW

    def test_half_threshold_always_bow(self):
        preds = _make_preds(100)
        assert not route_mask(ProbThreshold(0.5), preds).any()

    def test_decision_threshold(self):
        assert route(DecisionNetThreshold(0.4), 0.99, decision_prob=0.41) == Choice.LSTM
        assert route(DecisionNetThreshold(0.4), 0.51, decision_prob=0.4) == Choice.BOW

    def test_decision_prob_required(self):
        with pytest.raises(InputError):
            route(DecisionNetThreshold(0.4), 0.9)
        with pytest.raises(InputError):
            route_mask(DecisionNetThreshold(0.4), _make_preds(with_decision=False))

    def test_naive_ratio_is_seeded(self):
        first, second = make_rng(5), make_rng(5)
        a = [route(NaiveRatio(0.3), 0.9, rng=first) for _ in range(20)]
        b = [route(NaiveRatio(0.3), 0.9, rng=second) for _ in range(20)]
        assert a == b
        with pytest.raises(InputError):
            route(NaiveRatio(0.3), 0.9)

    def test_naive_ratio_rate(self):
        mask = route_mask(NaiveRatio(0.25), _make_preds(4000, with_decision=False), make_rng(2))
        assert abs((1.0 - mask.mean()) - 0.25) < 0.03

    @pytest.mark.parametrize("strategy", [lambda: ProbThreshold(0.49), lambda: ProbThreshold(1.01),
                                          lambda: NaiveRatio(-0.1), lambda: DecisionNetThreshold(1.5)])
    def test_knob_range(self, strategy):
        with pytest.raises(ParameterError):
            strategy()

    def test_threshold_monotone(self):
        preds = _make_preds(300, seed=8)
        taus = np.linspace(0.5, 1.0, 41)
        masks = [route_mask(ProbThreshold(float(t)), preds) for t in taus]
        for low, high in zip(masks, masks[1:]):
            assert np.all(high[low])

    def test_mask_matches_scalar_route(self):
        preds = _make_preds(60, seed=4)
        for strategy in (ProbThreshold(0.8), DecisionNetThreshold(0.5)):
            routed = route_all(strategy, preds)
            mask = route_mask(strategy, preds)
            assert [r.choice == Choice.LSTM for r in routed] == mask.tolist()


class TestCascadeAccuracy:
    def test_matches_brute_force(self):
        preds = _make_preds(80, seed=6)
        routed = route_all(ProbThreshold(0.75), preds)
        expected = 0
        for i in range(preds.n):
            use_lstm = preds.bow_max_prob[i] < 0.75
            prediction = preds.lstm_pred[i] if use_lstm else preds.bow_pred[i]
            expected += int(prediction == preds.gold[i])
        assert cascade_accuracy(routed) == expected / preds.n

    def test_empty(self):
        with pytest.raises(AlignmentError):
            cascade_accuracy([])


class TestExpectedAccuracy:
    def test_table_values(self):
        assert expected_accuracy(1.0, 0.82, 0.88) == 0.82
        assert expected_accuracy(0.0, 0.82, 0.88) == 0.88
        assert expected_accuracy(0.5, 0.82, 0.88) == pytest.approx(0.85, abs=1e-15)

    def test_affine(self):
        mid = expected_accuracy(0.5, 0.7, 0.95)
        ends = (expected_accuracy(0.0, 0.7, 0.95) + expected_accuracy(1.0, 0.7, 0.95)) / 2
        assert abs(mid - ends) < 1e-12

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            expected_accuracy(1.2, 0.82, 0.88)
        with pytest.raises(ParameterError):
            expected_accuracy(0.5, 1.5, 0.88)


class TestComputeCost:
    def test_table_values(self):
        assert compute_cost("strategy", 1.0, COSTS) == pytest.approx(0.16)
        assert compute_cost("ratio", 0.5, COSTS) == pytest.approx(0.76)
        assert compute_cost("strategy", 0.5, COSTS) == pytest.approx(0.84)
        assert compute_cost("strategy", 0.0, COSTS) == pytest.approx(1.52)
        assert compute_cost("ratio", 0.0, COSTS) == pytest.approx(1.36)

    @pytest.mark.parametrize("alpha", np.linspace(0.0, 1.0, 11))
    def test_strategy_pays_bow_on_every_sample(self, alpha):
        alpha = float(alpha)
        gap = compute_cost("strategy", alpha, COSTS) - compute_cost("ratio", alpha, COSTS)
        assert gap == pytest.approx((1.0 - alpha) * COSTS.c_bow, abs=1e-12)
        assert gap >= 0.0

    def test_decision_cost_is_optional(self):
        costs = CostModel(0.16, 1.36, c_decision=0.05)
        plain = compute_cost("strategy", 0.5, costs)
        assert compute_cost("strategy", 0.5, costs, include_decision=True) == pytest.approx(plain + 0.05)
        assert compute_cost("ratio", 0.5, costs, include_decision=True) == compute_cost("ratio", 0.5, costs)

    def test_bad_kind(self):
        with pytest.raises(ParameterError):
            compute_cost("other", 0.5, COSTS)

    def test_cost_model_ordering(self):
        with pytest.raises(ParameterError):
            CostModel(1.36, 0.16)


class TestConfusion:
    def test_identical_predictions(self):
        matrix = confusion([0, 1, 1, 0], [0, 1, 1, 0], [0, 1, 0, 0])
        assert matrix.tf == 0.0 and matrix.ft == 0.0

    def test_marginals(self):
        matrix = ConfusionMatrix(0.76, 0.06, 0.12, 0.06)
        assert matrix.bow_accuracy == pytest.approx(0.82)
        assert matrix.lstm_accuracy == pytest.approx(0.88)

    def test_brute_force_recount(self):
        rng = make_rng(11)
        bow, lstm, gold = rng.integers(2, size=(3, 50))
        matrix = confusion(bow, lstm, gold)
        cells = {"tt": 0, "tf": 0, "ft": 0, "ff": 0}
        for b, l, g in zip(bow, lstm, gold):
            key = ("t" if b == g else "f") + ("t" if l == g else "f")
            cells[key] += 1
        assert matrix.as_dict() == {k: v / 50 for k, v in cells.items()}
        assert sum(matrix.as_dict().values()) == pytest.approx(1.0)

    def test_empty(self):
        with pytest.raises(AlignmentError):
            confusion([], [], [])
