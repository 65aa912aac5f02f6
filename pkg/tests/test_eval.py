import csv
import math
import xml.etree.ElementTree as ET
from fractions import Fraction

import numpy as np
import pytest

from anomtax.evaluation import test_error as error_rate
from anomtax.evaluation import (
    ConfusionMatrix,
    confusion,
    fmt_pct,
    format_confusion,
    precision_recall,
    roc_curve,
    tpr_fpr,
    write_confusion_csv,
    write_metrics_csv,
    write_roc_csv,
)
from anomtax.svgchart import unit_line_chart


def matrix_from_counts(counts):
    """Expand a counts grid into (targets, predictions) sample lists and
    rebuild the matrix through the public counter."""
    counts = np.asarray(counts)
    targets, preds = [], []
    for p in range(counts.shape[0]):
        for t in range(counts.shape[1]):
            targets.extend([t] * int(counts[p, t]))
            preds.extend([p] * int(counts[p, t]))
    return confusion(targets, preds, counts.shape[0])


def brute_tpr_fpr(counts, c):
    """Per-sample one-vs-rest counting oracle."""
    counts = np.asarray(counts)
    tp = fp = tn = fn = 0
    for p in range(counts.shape[0]):
        for t in range(counts.shape[1]):
            for _ in range(int(counts[p, t])):
                pred_pos = p == c
                is_pos = t == c
                if pred_pos and is_pos:
                    tp += 1
                elif pred_pos and not is_pos:
                    fp += 1
                elif not pred_pos and is_pos:
                    fn += 1
                else:
                    tn += 1
    tpr = tp / (tp + fn) if tp + fn else math.nan
    fpr = 1 - tn / (tn + fp) if tn + fp else math.nan
    return tpr, fpr


def brute_auc(scores, positives):
    """Tie-adjusted concordant-pair fraction, via a full pair comparison."""
    scores = np.asarray(scores, dtype=float)
    positives = np.asarray(positives, dtype=bool)
    pos = scores[positives][:, None]
    neg = scores[~positives][None, :]
    wins = (pos > neg).sum() + 0.5 * (pos == neg).sum()
    return float(wins / (pos.shape[0] * neg.shape[1]))


# reference 4-class confusion matrices used as golden metric inputs
# (rows = predicted, columns = target)
FIG_NN = [[12, 2, 0, 0],
          [0, 0, 0, 0],
          [0, 2, 6, 2],
          [0, 1, 1, 4]]
FIG_GA = [[12, 1, 0, 0],
          [0, 3, 0, 0],
          [0, 0, 6, 0],
          [0, 1, 1, 6]]


class TestConfusion:
    def test_diagonal_for_perfect_predictions(self):
        m = confusion([0, 1, 2, 1], [0, 1, 2, 1], 3)
        np.testing.assert_array_equal(m.counts,
                                      [[1, 0, 0], [0, 2, 0], [0, 0, 1]])

    def test_direct_count_orientation(self):
        # two samples of target 0 both predicted as 1
        m = confusion([0, 0], [1, 1], 2)
        assert m.counts[1, 0] == 2
        assert m.counts.sum() == 2

    def test_reference_nn_matrix_row(self):
        m = matrix_from_counts(FIG_NN)
        assert list(m.counts[0]) == [12, 2, 0, 0]
        assert m.total == 30

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([0, 1], [0], 2)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            confusion([0, 5], [0, 1], 2)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(0)
        t = rng.integers(0, 4, 60)
        p = rng.integers(0, 4, 60)
        m1 = confusion(t, p, 4)
        perm = rng.permutation(60)
        m2 = confusion(t[perm], p[perm], 4)
        np.testing.assert_array_equal(m1.counts, m2.counts)


class TestPrecisionRecall:
    def test_reference_class1_values(self):
        precision, recall = precision_recall(matrix_from_counts(FIG_NN))
        assert abs(100 * precision[0] - 85.7) <= 0.05
        assert abs(100 * recall[0] - 100.0) <= 0.05

    def test_diagonal_matrix_perfect(self):
        precision, recall = precision_recall(
            matrix_from_counts(np.diag([3, 4, 5])))
        np.testing.assert_array_equal(precision, [1, 1, 1])
        np.testing.assert_array_equal(recall, [1, 1, 1])

    def test_absent_class_undefined(self):
        m = matrix_from_counts([[2, 0, 0], [0, 3, 0], [0, 0, 0]])
        precision, recall = precision_recall(m)
        assert math.isnan(precision[2]) and math.isnan(recall[2])

    def test_never_predicted_but_targeted(self):
        precision, recall = precision_recall(matrix_from_counts(FIG_NN))
        assert math.isnan(precision[1])  # class 2 row is empty
        assert recall[1] == 0.0          # but its column is not


class TestTestError:
    def test_reference_nn_error(self):
        err = error_rate(matrix_from_counts(FIG_NN))
        assert abs(100 * err - 26.7) <= 0.05

    def test_reference_ga_error(self):
        err = error_rate(matrix_from_counts(FIG_GA))
        assert abs(100 * err - 10.0) <= 0.05

    def test_perfect_classifier(self):
        assert error_rate(matrix_from_counts(np.diag([5, 5]))) == 0.0

    def test_rational_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            counts = rng.integers(0, 9, (3, 3))
            if counts.sum() == 0:
                continue
            m = matrix_from_counts(counts)
            total = m.total
            trace = int(np.trace(m.counts))
            assert Fraction(total - trace, total) + \
                Fraction(trace, total) == 1

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            error_rate(ConfusionMatrix(np.zeros((2, 2), dtype=int),
                                       ("a", "b")))


class TestTprFpr:
    def test_reference_ga_class1_tpr(self):
        tpr, _ = tpr_fpr(matrix_from_counts(FIG_GA), 0)
        assert tpr == 1.0

    def test_zero_fn_gives_tpr_one(self):
        m = matrix_from_counts([[12, 3], [0, 7]])
        tpr, _ = tpr_fpr(m, 0)
        assert tpr == 1.0

    def test_two_class_matches_brute_force(self):
        # golden values pinned by the per-sample oracle: TP=8 FN=1 -> 8/9,
        # FP=2 against 11 negatives -> 2/11
        counts = [[8, 2], [1, 9]]
        tpr, fpr = tpr_fpr(matrix_from_counts(counts), 0)
        otpr, ofpr = brute_tpr_fpr(counts, 0)
        assert tpr == otpr == pytest.approx(8 / 9, abs=1e-15)
        assert fpr == ofpr == pytest.approx(2 / 11, abs=1e-15)

    def test_random_matrices_match_brute_force(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            counts = rng.integers(0, 6, (4, 4))
            m = matrix_from_counts(counts)
            if m.total == 0:
                continue
            for c in range(4):
                got = tpr_fpr(m, c)
                want = brute_tpr_fpr(counts, c)
                for g, w in zip(got, want):
                    assert (math.isnan(g) and math.isnan(w)) or g == w

    def test_sum_identities(self):
        counts = np.array(FIG_NN)
        m = matrix_from_counts(counts)
        per_class_pos = [int(counts[:, c].sum()) for c in range(4)]
        assert sum(per_class_pos) == m.total
        tps = [int(counts[c, c]) for c in range(4)]
        assert sum(tps) == int(np.trace(counts))


class TestRocCurve:
    def test_perfect_separation(self):
        curve = roc_curve([0.9, 0.8, 0.2, 0.1], [True, True, False, False])
        assert curve.auc == 1.0
        assert any((p == [0.0, 1.0]).all() for p in curve.points)

    def test_uninformative_scores(self):
        curve = roc_curve([0.5, 0.5, 0.5, 0.5], [True, False, True, False])
        np.testing.assert_array_equal(curve.points, [[0, 0], [1, 1]])
        assert curve.auc == 0.5

    def test_golden_auc(self):
        curve = roc_curve([0.9, 0.4, 0.6, 0.1],
                          [True, True, False, False])
        assert curve.auc == pytest.approx(0.75, abs=1e-12)

    def test_endpoints_and_monotone(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(4, 60))
            scores = rng.choice([0.1, 0.3, 0.5, 0.7, 0.9], n)
            labels = rng.random(n) < 0.4
            if labels.all() or not labels.any():
                continue
            curve = roc_curve(scores, labels)
            np.testing.assert_array_equal(curve.points[0], [0, 0])
            np.testing.assert_array_equal(curve.points[-1], [1, 1])
            assert np.all(np.diff(curve.points[:, 0]) >= 0)
            assert np.all(np.diff(curve.points[:, 1]) >= 0)
            assert 0.0 <= curve.auc <= 1.0

    def test_auc_equals_concordant_fraction(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(4, 100))
            scores = np.round(rng.random(n), 2)  # force ties
            labels = rng.random(n) < 0.5
            if labels.all() or not labels.any():
                continue
            curve = roc_curve(scores, labels)
            assert curve.auc == pytest.approx(brute_auc(scores, labels),
                                              abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            roc_curve([0.1, 0.9], [True, True])


class TestFormatting:
    def test_pct(self):
        assert fmt_pct(0.857142857) == "85.7%"
        assert fmt_pct(math.nan) == "NaN%"

    def test_format_confusion_layout(self):
        text = format_confusion(matrix_from_counts(FIG_NN))
        assert "12 (40.0%)" in text
        assert "NaN%" in text
        assert "test error 26.7%" in text

    def test_confusion_csv(self, tmp_path):
        m = matrix_from_counts(FIG_GA)
        path = tmp_path / "m.csv"
        write_confusion_csv(m, path)
        rows = list(csv.reader(path.open()))
        assert rows[1][1:] == ["12", "1", "0", "0"]

    def test_metrics_csv_parseable(self, tmp_path):
        m = matrix_from_counts(FIG_NN)
        path = tmp_path / "metrics.csv"
        write_metrics_csv(m, path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["class", "precision", "recall", "tpr", "fpr"]
        assert float(rows[1][1]) == pytest.approx(12 / 14)
        assert rows[2][1] == "nan"

    def test_roc_csv(self, tmp_path):
        curve = roc_curve([0.9, 0.4, 0.6, 0.1], [True, True, False, False])
        path = tmp_path / "roc.csv"
        write_roc_csv(curve, path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["threshold", "fpr", "tpr"]
        assert rows[1] == ["inf", "0.0", "0.0"]
        assert len(rows) == len(curve.points) + 1


class TestSvgChart:
    def test_valid_static_svg(self):
        curve = roc_curve([0.9, 0.4, 0.6, 0.1], [True, True, False, False])
        svg = unit_line_chart([("demo", [(p[0], p[1])
                                         for p in curve.points])],
                              "ROC", "FPR", "TPR")
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        tags = {el.tag.split('}')[-1] for el in root.iter()}
        assert "polyline" in tags
        assert "script" not in tags
