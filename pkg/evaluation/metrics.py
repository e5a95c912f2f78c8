import numpy as np

from evaluation.models import ClassMetrics, EvaluationSummary, PredictionSet
from exceptions import ConfigurationError, DimensionMismatchError, EmptyInputError
from utils.log import get_logger

_logger = get_logger("Metrics")


def average_precision(scores: np.ndarray, positives: np.ndarray, tie_rank: np.ndarray | None = None) -> float:
    """
    Non-interpolated average precision of one class.

    Args:
        scores (np.ndarray): Score of the class for every record.
        positives (np.ndarray): Whether each record belongs to the class.
        tie_rank (np.ndarray | None, optional): Tie-break key, ascending (record id
            order). Defaults to the record position.

    Raises:
        EmptyInputError: If there is no positive record.

    Returns:
        float: Mean over positive ranks i of (positives in the top i) / i.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    if scores.shape != positives.shape:
        raise DimensionMismatchError(f"{scores.size} scores for {positives.size} labels")
    if not positives.any():
        raise EmptyInputError("average precision is undefined without positives")
    if tie_rank is None:
        tie_rank = np.arange(scores.size)
    order = np.lexsort((tie_rank, -scores))
    hits = positives[order]
    ranks = np.flatnonzero(hits) + 1
    return float(np.mean(np.arange(1, ranks.size + 1) / ranks))


def top_k_hits(preds: PredictionSet, k: int) -> np.ndarray:
    """Whether each record's label is among its k best classes, ties by class id ascending."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    top = np.argsort(-preds.scores, axis=1, kind="stable")[:, :k]
    return (top == preds.labels[:, None]).any(axis=1)


def normalized_accuracy_at_k(preds: PredictionSet, k: int) -> float:
    """
    Top-k accuracy averaged per class: the mean, over classes present in the test
    set, of the fraction of their records whose top k classes contain the label.
    """
    if not len(preds):
        raise EmptyInputError("no predictions to evaluate")
    hits = top_k_hits(preds, k).astype(np.float64)
    counts = np.bincount(preds.labels, minlength=preds.class_count)
    correct = np.bincount(preds.labels, weights=hits, minlength=preds.class_count)
    present = counts > 0
    return float(np.mean(correct[present] / counts[present]))


def class_metrics(preds: PredictionSet) -> list[ClassMetrics]:
    """Per-class AP, acc@1, acc@5 and test count; classes without positives get None and a warning."""
    tie_rank = preds.id_rank
    counts = np.bincount(preds.labels, minlength=preds.class_count)
    acc1 = np.bincount(preds.labels, weights=top_k_hits(preds, 1), minlength=preds.class_count)
    acc5 = np.bincount(preds.labels, weights=top_k_hits(preds, 5), minlength=preds.class_count)
    rows = []
    for c in range(preds.class_count):
        n = int(counts[c])
        if n == 0:
            _logger.warning("Class %d has no test positives, skipped in mean AP", c)
            rows.append(ClassMetrics(c, None, None, None, 0))
            continue
        ap = average_precision(preds.scores[:, c], preds.labels == c, tie_rank)
        rows.append(ClassMetrics(c, ap, float(acc1[c] / n), float(acc5[c] / n), n))
    return rows


def mean_ap(preds: PredictionSet) -> float:
    """Unweighted mean of per-class AP over classes with at least one positive."""
    aps = [row.ap for row in class_metrics(preds) if row.ap is not None]
    if not aps:
        raise EmptyInputError("no class has test positives")
    return float(np.mean(aps))


def summarize(name: str, preds: PredictionSet) -> tuple[EvaluationSummary, list[ClassMetrics]]:
    """Mean AP, normalized acc@1 and acc@5 of one experiment, with the per-class rows."""
    rows = class_metrics(preds)
    aps = [row.ap for row in rows if row.ap is not None]
    if not aps:
        raise EmptyInputError("no class has test positives")
    summary = EvaluationSummary(
        name=name,
        mean_ap=float(np.mean(aps)),
        acc1=normalized_accuracy_at_k(preds, 1),
        acc5=normalized_accuracy_at_k(preds, 5),
        n_test=len(preds),
    )
    return summary, rows
