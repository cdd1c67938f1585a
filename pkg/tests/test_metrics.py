import numpy as np
import pytest

from cgft.fusion import ScoreMatrix, argmax_predict, evaluate, harmonic_f_score

# published (precision, recall) -> F pairs the harmonic-mean definition must hit
F_SCORE_CASES = [
    (70.89, 79.71, 75.04),
    (69.83, 77.30, 73.37),
    (66.08, 73.10, 69.41),
    (70.74, 76.74, 73.61),
]


def one_hot_scores(preds, k):
    vals = np.full((len(preds), k), 0.01 / (k - 1))
    for i, p in enumerate(preds):
        vals[i, p] = 0.99
    return ScoreMatrix("t", vals)


@pytest.mark.parametrize("p,r,expected", F_SCORE_CASES)
def test_harmonic_f_reproduces_reference_rows(p, r, expected):
    assert harmonic_f_score(p, r) == pytest.approx(expected, abs=0.01)


def test_harmonic_f_zero_when_both_zero():
    assert harmonic_f_score(0.0, 0.0) == 0.0


def test_all_correct_scores_100_everywhere():
    labels = [0, 1, 2, 0, 1, 2]
    m = evaluate(one_hot_scores(labels, 3), labels)
    assert m.avg_precision == 100.0
    assert m.avg_recall == 100.0
    assert m.f_score == 100.0
    assert m.accuracy == 100.0


def test_hand_counted_confusion_fixture():
    # preds (0,0,1), labels (0,1,1):
    #   class0: tp=1 fp=1 fn=0 -> P=1/2, R=1
    #   class1: tp=1 fp=0 fn=1 -> P=1,   R=1/2
    m = evaluate(one_hot_scores([0, 0, 1], 2), [0, 1, 1])
    assert m.accuracy == pytest.approx(66.67, abs=0.01)
    assert m.avg_precision == pytest.approx(75.0, abs=1e-9)
    assert m.avg_recall == pytest.approx(75.0, abs=1e-9)
    assert m.f_score == pytest.approx(75.0, abs=1e-9)


def test_unpredicted_class_contributes_zero_precision():
    # class 2 never predicted and never true: P and R terms are 0
    m = evaluate(one_hot_scores([0, 1], 3), [0, 1])
    assert m.avg_precision == pytest.approx(100.0 * 2 / 3, abs=1e-9)
    assert m.avg_recall == pytest.approx(100.0 * 2 / 3, abs=1e-9)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        ScoreMatrix("t", np.empty((0, 2)))


def test_label_length_mismatch_rejected():
    with pytest.raises(ValueError):
        evaluate(one_hot_scores([0, 1], 2), [0, 1, 0])


class TestArgmax:
    def test_plain_argmax(self):
        s = ScoreMatrix("t", np.array([[0.2, 0.8]]))
        assert list(argmax_predict(s)) == [1]

    def test_tie_breaks_low(self):
        s = ScoreMatrix("t", np.array([[0.5, 0.5]]))
        assert list(argmax_predict(s)) == [0]

    def test_uniform_three_way_tie(self):
        s = ScoreMatrix("t", np.full((1, 3), 1.0 / 3.0))
        assert list(argmax_predict(s)) == [0]
