from baselines.models import ClassDistribution, LabeledPoints
from baselines.priors import (
    bayes_combine,
    combine_scores,
    knn_prior,
    knn_priors,
    radius_prior,
    radius_priors,
)

__all__ = [
    "ClassDistribution",
    "LabeledPoints",
    "bayes_combine",
    "combine_scores",
    "knn_prior",
    "knn_priors",
    "radius_prior",
    "radius_priors",
]
