from dataclasses import dataclass

from evaluation.metrics import summarize
from evaluation.models import EvaluationSummary, PredictionSet
from features.cache import FeatureDataset
from net.models import NetworkConfig, TrainConfig
from net.trainer import predict_dataset, train
from utils.classes import Observable
from utils.enums import FeatureName
from utils.log import get_logger


@dataclass(frozen=True)
class AblationCell:
    features: tuple[FeatureName, ...]
    precat: int
    postcat: int
    rl_replicas: int

    @property
    def name(self) -> str:
        label = NetworkConfig(class_count=2, precat=self.precat, postcat=self.postcat, rl_replicas=self.rl_replicas).label
        return f"{'+'.join(name.value for name in self.features)} {label}"


def default_feature_sets(available: list[FeatureName]) -> list[tuple[FeatureName, ...]]:
    """Image alone, image plus each location feature, then image plus all of them."""
    others = [name for name in available if name != FeatureName.IMAGE]
    sets = [(FeatureName.IMAGE,)] + [(FeatureName.IMAGE, name) for name in others]
    if len(others) > 1:
        sets.append((FeatureName.IMAGE, *others))
    return sets


class AblationRunner(Observable):
    """Trains and evaluates one model per grid cell; publishes each (cell, summary) pair."""

    _logger = get_logger("AblationRunner")

    def __init__(self, train_config: TrainConfig, dropout: float):
        super().__init__()
        self.train_config = train_config
        self.dropout = dropout

    def cells(self, feature_sets, precats, postcats, replicas) -> list[AblationCell]:
        """
        The grid feature sets x pre-cat widths x post-cat widths x RL replicas.
        RL cells of feature sets without context features are skipped.
        """
        cells = []
        for features in feature_sets:
            features = tuple(FeatureName.ordered([FeatureName.IMAGE.value, *features]))
            has_context = any(name.is_context for name in features)
            for precat in precats:
                for postcat in postcats:
                    for rl in replicas:
                        if rl and not has_context:
                            self._logger.warning("Skipping RL%d for %s: no context feature", rl, [n.value for n in features])
                            continue
                        cells.append(AblationCell(features, precat, postcat, rl))
        return cells

    def run(self, cells: list[AblationCell], train_set: FeatureDataset, test_set: FeatureDataset) -> list[tuple[AblationCell, EvaluationSummary]]:
        results = []
        for cell in cells:
            net_config = NetworkConfig(
                class_count=train_set.class_count,
                precat=cell.precat,
                postcat=cell.postcat,
                rl_replicas=cell.rl_replicas,
                dropout=self.dropout,
            )
            model = train(train_set, [name.value for name in cell.features], net_config, self.train_config)
            preds = PredictionSet(test_set.ids, predict_dataset(model, test_set), test_set.labels)
            summary, _ = summarize(cell.name, preds)
            self._logger.info("%s", summary.table_row())
            results.append((cell, summary))
            self._notify_observers((cell, summary))
        return results


def ablation_rows(results: list[tuple[AblationCell, EvaluationSummary]]) -> list[dict]:
    return [
        {
            "features": "+".join(name.value for name in cell.features),
            "precat": cell.precat,
            "postcat": cell.postcat,
            "rl_replicas": cell.rl_replicas,
            "mean_ap": summary.mean_ap,
            "acc1": summary.acc1,
            "acc5": summary.acc5,
        }
        for cell, summary in results
    ]
