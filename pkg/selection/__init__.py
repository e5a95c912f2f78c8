from selection.kl import class_distributions, estimate_distribution, kl_divergence, select_classes
from selection.models import ClassDivergence, GeoDistribution

__all__ = [
    "ClassDivergence",
    "GeoDistribution",
    "class_distributions",
    "estimate_distribution",
    "kl_divergence",
    "select_classes",
]
