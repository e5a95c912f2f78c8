from evaluation.metrics import (
    average_precision,
    class_metrics,
    mean_ap,
    normalized_accuracy_at_k,
    summarize,
    top_k_hits,
)
from evaluation.models import ClassMetrics, EvaluationSummary, PredictionSet
from evaluation.report import ReportWriter, ap_difference, read_metrics

__all__ = [
    "ClassMetrics",
    "EvaluationSummary",
    "PredictionSet",
    "ReportWriter",
    "ap_difference",
    "average_precision",
    "class_metrics",
    "mean_ap",
    "normalized_accuracy_at_k",
    "read_metrics",
    "summarize",
    "top_k_hits",
]
