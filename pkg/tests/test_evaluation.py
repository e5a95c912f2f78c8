import csv

import numpy as np
import pytest

from evaluation import (
    ClassMetrics,
    EvaluationSummary,
    PredictionSet,
    ReportWriter,
    ap_difference,
    average_precision,
    class_metrics,
    mean_ap,
    normalized_accuracy_at_k,
    read_metrics,
    summarize,
)
from exceptions import ConfigurationError, DimensionMismatchError, EmptyInputError, KeyOutOfRangeError


def reference_ap(scores, positives, ids) -> float:
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    found, precisions = 0, []
    for rank, i in enumerate(order, start=1):
        if positives[i]:
            found += 1
            precisions.append(found / rank)
    return sum(precisions) / len(precisions)


def reference_mean_ap(preds: PredictionSet) -> float:
    aps = [
        reference_ap(list(preds.scores[:, c]), list(preds.labels == c), preds.ids)
        for c in range(preds.class_count)
        if (preds.labels == c).any()
    ]
    return sum(aps) / len(aps)


def random_predictions(rng, n: int, classes: int) -> PredictionSet:
    ids = [f"r{i:04d}" for i in rng.permutation(n)]
    return PredictionSet(ids, rng.random((n, classes)), rng.integers(0, classes, n))


@pytest.fixture
def three_records():
    # class 0 AP = 1/3, class 1 AP = (1/2 + 2/3) / 2
    return PredictionSet(["a", "b", "c"], np.array([[0.1, 0.9], [0.9, 0.1], [0.5, 0.5]]), np.array([0, 1, 1]))


class TestPredictionSet:
    def test_misaligned(self):
        with pytest.raises(DimensionMismatchError):
            PredictionSet(["a"], np.zeros((2, 3)), np.array([0, 1]))

    def test_non_finite(self):
        with pytest.raises(ConfigurationError):
            PredictionSet(["a"], np.array([[np.nan, 0.5]]), np.array([0]))

    def test_label_range(self):
        with pytest.raises(KeyOutOfRangeError):
            PredictionSet(["a"], np.array([[0.5, 0.5]]), np.array([2]))

    def test_id_rank(self):
        preds = PredictionSet(["c", "a", "b"], np.zeros((3, 2)), np.zeros(3))
        np.testing.assert_array_equal(preds.id_rank, [2, 0, 1])


class TestAveragePrecision:
    def test_positives_first(self):
        assert average_precision(np.array([0.9, 0.8, 0.2, 0.1]), np.array([True, True, False, False])) == 1.0

    def test_positive_second(self):
        assert average_precision(np.array([0.9, 0.1]), np.array([False, True])) == 0.5

    def test_equal_scores_use_id_order(self):
        preds = PredictionSet(["c", "a", "b"], np.full((3, 2), 0.5), np.array([0, 1, 1]))
        ap = average_precision(preds.scores[:, 0], preds.labels == 0, preds.id_rank)
        assert ap == pytest.approx(1 / 3)
        assert ap == pytest.approx(reference_ap([0.5] * 3, [True, False, False], preds.ids))

    def test_matches_reference(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 30))
            ids = [f"r{i:03d}" for i in rng.permutation(n)]
            # coarse scores so ties are common
            scores = rng.integers(0, 4, n).astype(np.float64)
            positives = rng.random(n) < 0.4
            positives[int(rng.integers(0, n))] = True
            preds = PredictionSet(ids, np.column_stack([scores, -scores]), np.where(positives, 0, 1))
            assert average_precision(scores, positives, preds.id_rank) == pytest.approx(
                reference_ap(list(scores), list(positives), ids), rel=1e-12
            )

    def test_no_positives(self):
        with pytest.raises(EmptyInputError):
            average_precision(np.array([0.3, 0.2]), np.array([False, False]))


class TestMeanAp:
    def test_perfect_classifier(self, rng):
        labels = rng.integers(0, 4, 40)
        preds = PredictionSet([str(i) for i in range(40)], np.eye(4)[labels], labels)
        assert mean_ap(preds) == 1.0

    def test_hand_example(self, three_records):
        rows = class_metrics(three_records)
        assert rows[0].ap == pytest.approx(1 / 3)
        assert rows[1].ap == pytest.approx(7 / 12)
        assert mean_ap(three_records) == pytest.approx((1 / 3 + 7 / 12) / 2)

    def test_unweighted_over_classes(self, three_records):
        aps = [row.ap for row in class_metrics(three_records)]
        assert mean_ap(three_records) == pytest.approx(sum(aps) / len(aps))

    def test_matches_reference(self, rng):
        for _ in range(200):
            preds = random_predictions(rng, 50, 5)
            assert mean_ap(preds) == pytest.approx(reference_mean_ap(preds), rel=1e-12)

    def test_monotone_transform_invariant(self, rng):
        preds = random_predictions(rng, 50, 5)
        transformed = PredictionSet(preds.ids, np.exp(3.0 * preds.scores), preds.labels)
        assert mean_ap(transformed) == mean_ap(preds)

    def test_class_without_positives_skipped(self):
        preds = PredictionSet(["a", "b"], np.array([[0.9, 0.1, 0.0], [0.2, 0.8, 0.0]]), np.array([0, 1]))
        rows = class_metrics(preds)
        assert rows[2] == ClassMetrics(2, None, None, None, 0)
        assert mean_ap(preds) == 1.0


class TestNormalizedAccuracy:
    def test_k_equals_class_count(self, rng):
        preds = random_predictions(rng, 60, 6)
        assert normalized_accuracy_at_k(preds, 6) == 1.0

    def test_imbalance(self):
        labels = np.array([0] * 10 + [1])
        scores = np.tile([0.9, 0.1], (11, 1))
        preds = PredictionSet([str(i) for i in range(11)], scores, labels)
        assert normalized_accuracy_at_k(preds, 1) == 0.5

    def test_perfect_argmax(self, rng):
        labels = rng.integers(0, 5, 30)
        scores = rng.random((30, 5))
        scores[np.arange(30), labels] = 2.0
        preds = PredictionSet([str(i) for i in range(30)], scores, labels)
        assert normalized_accuracy_at_k(preds, 1) == 1.0

    def test_ties_go_to_lower_class(self):
        preds = PredictionSet(["a", "b"], np.full((2, 3), 1 / 3), np.array([0, 2]))
        assert normalized_accuracy_at_k(preds, 1) == 0.5
        assert normalized_accuracy_at_k(preds, 2) == 0.5
        assert normalized_accuracy_at_k(preds, 3) == 1.0

    def test_non_decreasing_in_k(self, rng):
        preds = random_predictions(rng, 80, 7)
        accuracies = [normalized_accuracy_at_k(preds, k) for k in range(1, 8)]
        assert accuracies == sorted(accuracies)

    def test_duplicating_a_class(self, rng):
        preds = random_predictions(rng, 60, 4)
        mask = preds.labels == 2
        duplicated = PredictionSet(
            preds.ids + [f"dup-{i}" for i in range(int(mask.sum()))],
            np.vstack([preds.scores, preds.scores[mask]]),
            np.concatenate([preds.labels, preds.labels[mask]]),
        )
        for k in (1, 2, 3):
            assert normalized_accuracy_at_k(duplicated, k) == pytest.approx(normalized_accuracy_at_k(preds, k), rel=1e-12)

    def test_invalid_k(self, rng):
        with pytest.raises(ConfigurationError):
            normalized_accuracy_at_k(random_predictions(rng, 5, 2), 0)


class TestReport:
    def test_metrics_csv(self, tmp_path, three_records):
        summary, rows = summarize("image", three_records)
        path = ReportWriter(tmp_path).metrics(rows, summary)
        with open(path, newline="") as f:
            table = list(csv.reader(f))
        assert table[0] == ["class", "ap", "acc1", "acc5", "n_test"]
        assert [row[0] for row in table[1:]] == ["0", "1", "mean"]
        assert float(table[1][1]) == pytest.approx(1 / 3)
        assert table[2][4] == "2"
        assert float(table[3][1]) == summary.mean_ap
        assert read_metrics(path) == {0: rows[0].ap, 1: rows[1].ap}

    def test_missing_metrics_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            read_metrics(tmp_path / "metrics.csv")

    def test_empty_ap_cells_skipped(self, tmp_path):
        preds = PredictionSet(["a", "b"], np.array([[0.9, 0.1, 0.0], [0.2, 0.8, 0.0]]), np.array([0, 1]))
        summary, rows = summarize("image", preds)
        path = ReportWriter(tmp_path).metrics(rows, summary)
        assert sorted(read_metrics(path)) == [0, 1]

    def test_predictions_csv(self, tmp_path):
        path = ReportWriter(tmp_path).predictions(["x", "y"], np.array([[0.25, 0.75], [0.5, 0.5]]), np.array([1, -1]))
        with open(path, newline="") as f:
            table = list(csv.reader(f))
        assert table == [["id", "label", "top1", "p_0", "p_1"], ["x", "1", "1", "0.25", "0.75"], ["y", "", "0", "0.5", "0.5"]]

    def test_ap_difference(self):
        base = {0: 0.5, 1: 0.4, 2: 0.9, 3: 0.25}
        other = {0: 0.75, 1: 0.4, 2: 0.6, 3: 0.5, 5: 1.0}
        rows = ap_difference(base, other)
        assert [row[0] for row in rows] == [0, 3, 1, 2]
        assert rows[0][3] == 0.25
        assert [row[0] for row in ap_difference(base, other, top_n=1)] == [0, 2]

    def test_table_row(self):
        summary = EvaluationSummary("256/- RL10", 0.4378, 0.5, 0.75, 1000)
        assert summary.table_row() == "256/- RL10 | 43.78% | 50.00% | 75.00%"
