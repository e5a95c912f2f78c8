import json
from pathlib import Path

import numpy as np

from baselines.models import LabeledPoints
from baselines.priors import combine_scores, knn_priors, radius_priors
from cli.ablation import AblationRunner, ablation_rows, default_feature_sets
from cli.config import ExperimentConfig
from cli.synth import SynthSpec, SyntheticWorld, write_synth
from evaluation.metrics import summarize
from evaluation.models import EvaluationSummary, PredictionSet
from evaluation.report import ReportWriter, ap_difference, read_metrics
from exceptions import ConfigurationError
from features.cache import FeatureDataset
from features.pipeline import FeatureExtractor, load_resources
from geodata.io import read_corpus, read_records
from geodata.spatial_index import build_index
from net.checkpoint import load_checkpoint, save_checkpoint
from net.trainer import LossCurve, ProgressLogger, learned_radii, predict_dataset, train
from selection.kl import class_distributions, select_classes
from utils.enums import FeatureName, PriorKind
from utils.log import get_logger
from utils.meta import ExceptionHandlingMeta

CHECKPOINT_NAME = "model.ckpt"


def write_manifest(out_dir: Path, command: str, payload: dict) -> Path:
    """Writes manifest.json echoing the command, its resolved settings and outputs."""
    path = Path(out_dir) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"command": command, **payload}, f, sort_keys=True, indent=2)
        f.write("\n")
    return path


def _require(value, what: str):
    if value is None:
        raise ConfigurationError(f"{what} is not configured")
    return value


class Commands(metaclass=ExceptionHandlingMeta):
    """Implementation of the command-line subcommands. Results go to stdout, diagnostics to the logs."""

    _logger = get_logger("Commands")

    def synth(self, spec: SynthSpec, out_dir: Path) -> list[Path]:
        paths = write_synth(SyntheticWorld(spec).generate(), out_dir)
        write_manifest(out_dir, "synth", {"spec": spec.to_dict(), "seed": spec.seed, "outputs": [p.name for p in paths]})
        for path in paths:
            print(path)
        return paths

    def extract(self, config: ExperimentConfig, out_dir: Path) -> list[Path]:
        """Extracts features of the train (and test) records into features_<split>.bin caches."""
        splits = {"train": _require(config.records_train, "records_train")}
        if config.records_test is not None:
            splits["test"] = config.records_test
        records = {split: read_records(Path(path)) for split, path in splits.items()}
        class_count = config.class_count
        if class_count is None:
            labels = [r.label for split in records.values() for r in split if r.label is not None]
            if not labels:
                raise ConfigurationError("records have no labels, set class_count")
            class_count = max(labels) + 1

        extraction = config.extraction_config()
        resources = load_resources(
            extraction,
            config.pool_grid(),
            maps=[Path(path) for path in config.maps],
            acs=config.acs and Path(config.acs),
            corpus=config.corpus and Path(config.corpus),
            hashtag_count=config.hashtag_count,
            concepts=config.concepts and Path(config.concepts),
        )
        extractor = FeatureExtractor(extraction, resources)
        paths, manifests = [], {}
        for split, split_records in records.items():
            dataset = extractor.extract(split_records, class_count)
            path = Path(out_dir) / f"features_{split}.bin"
            dataset.save(path)
            paths.append(path)
            manifests[split] = dataset.manifest()
            print(path)
        write_manifest(out_dir, "extract", {"config": config.to_dict(), "seed": config.seed, "features": manifests})
        return paths

    def train(self, config: ExperimentConfig, cache: Path, out_dir: Path) -> Path:
        """Trains on a feature cache; writes the checkpoint, loss.csv and radii.csv with radius learning."""
        train_config = config.train_config()
        dataset = FeatureDataset.load(cache)
        curve = LossCurve()
        model = train(
            dataset,
            [name.value for name in config.feature_names],
            config.network_config(dataset.class_count),
            train_config,
            observers=[curve, ProgressLogger(train_config.epochs)],
        )
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        checkpoint = out_dir / CHECKPOINT_NAME
        save_checkpoint(model, checkpoint)
        curve.write(out_dir / "loss.csv")
        outputs = [CHECKPOINT_NAME, "loss.csv"]
        if model.network.radius_layers():
            ReportWriter(out_dir).radii(learned_radii(model))
            outputs.append("radii.csv")
        write_manifest(out_dir, "train", {"config": config.to_dict(), "seed": config.seed, "outputs": outputs})
        print(checkpoint)
        return checkpoint

    def eval(self, checkpoint: Path, cache: Path, out_dir: Path, name: str = "model") -> EvaluationSummary:
        model = load_checkpoint(checkpoint)
        dataset = FeatureDataset.load(cache)
        dataset.check_labels()
        preds = PredictionSet(dataset.ids, predict_dataset(model, dataset), dataset.labels)
        summary, rows = summarize(name, preds)
        ReportWriter(out_dir).metrics(rows, summary)
        write_manifest(out_dir, "eval", {
            "checkpoint": str(checkpoint),
            "cache": str(cache),
            "network": model.config.to_dict(),
            "seed": model.train_config.seed,
            "outputs": ["metrics.csv"],
        })
        print(summary.table_row())
        return summary

    def predict(self, checkpoint: Path, cache: Path, out_dir: Path) -> Path:
        model = load_checkpoint(checkpoint)
        dataset = FeatureDataset.load(cache)
        path = ReportWriter(out_dir).predictions(dataset.ids, predict_dataset(model, dataset), dataset.labels)
        write_manifest(out_dir, "predict", {"checkpoint": str(checkpoint), "cache": str(cache), "outputs": [path.name]})
        print(path)
        return path

    def baseline(
        self,
        config: ExperimentConfig,
        checkpoint: Path,
        train_cache: Path,
        test_cache: Path,
        out_dir: Path,
        priors: list[PriorKind] | None = None,
    ) -> list[EvaluationSummary]:
        """
        Image-only classifier and its combinations with location priors under a
        uniform class prior. Writes metrics_<name>.csv per row and baseline.csv.
        """
        model = load_checkpoint(checkpoint)
        train_set = FeatureDataset.load(train_cache)
        test_set = FeatureDataset.load(test_cache)
        train_set.check_labels()
        test_set.check_labels()
        class_count = test_set.class_count
        if priors is None:
            priors = [PriorKind.KNN] + ([PriorKind.RADIUS] if config.corpus else [])

        p_image = predict_dataset(model, test_set)
        p_class = np.full(class_count, 1.0 / class_count)
        rows = {"image": p_image}
        for kind in priors:
            match kind:
                case PriorKind.KNN:
                    points = LabeledPoints(train_set.lon, train_set.lat, train_set.labels)
                    prior = knn_priors(points, test_set.lon, test_set.lat, config.prior_k, config.prior_epsilon, class_count)
                    rows[f"knn_k{config.prior_k}"] = combine_scores(p_image, prior, p_class)
                case PriorKind.RADIUS:
                    index = build_index(read_corpus(Path(_require(config.corpus, "corpus"))), config.pool_grid(), class_count)
                    prior = radius_priors(index, test_set.lon, test_set.lat, config.prior_radius_m, config.prior_epsilon)
                    rows[f"radius_{config.prior_radius_m:g}m"] = combine_scores(p_image, prior, p_class)

        writer = ReportWriter(out_dir)
        summaries = []
        for name, scores in rows.items():
            summary, per_class = summarize(name, PredictionSet(test_set.ids, scores, test_set.labels))
            writer.metrics(per_class, summary, f"metrics_{name}.csv")
            summaries.append(summary)
            print(summary.table_row())
        writer.summaries(summaries, "baseline.csv")
        write_manifest(out_dir, "baseline", {
            "config": config.to_dict(),
            "seed": config.seed,
            "priors": [kind.value for kind in priors],
            "outputs": ["baseline.csv"] + [f"metrics_{name}.csv" for name in rows],
        })
        return summaries

    def select(self, config: ExperimentConfig, out_dir: Path, top_n: int | None = None, threshold: float | None = None) -> Path:
        """Ranks the corpus keys by KL divergence from the overall distribution; writes selection.csv."""
        corpus = Path(_require(config.corpus, "corpus"))
        p, q_by_class = class_distributions(read_corpus(corpus), config.select_grid(), config.select_alpha)
        if threshold is None:
            threshold = config.select_threshold
        if top_n is None and threshold is None:
            top_n = config.select_top_n
        ranking = select_classes(p, q_by_class, top_n=top_n, threshold=threshold)
        path = ReportWriter(out_dir).selection(ranking)
        write_manifest(out_dir, "select", {
            "config": config.to_dict(),
            "top_n": top_n,
            "threshold": threshold,
            "outputs": [path.name],
        })
        for row in ranking:
            print(f"{row.rank} | class {row.class_id} | {row.kl_nats:.6f}")
        return path

    def ablate(self, config: ExperimentConfig, train_cache: Path, test_cache: Path, out_dir: Path) -> Path:
        """Runs the feature set x pre-cat x post-cat x RL grid; writes ablation.csv."""
        train_set = FeatureDataset.load(train_cache)
        test_set = FeatureDataset.load(test_cache)
        test_set.check_labels()
        if config.ablate_feature_sets:
            feature_sets = [tuple(FeatureName.ordered(names.split("+"))) for names in config.ablate_feature_sets]
        else:
            feature_sets = default_feature_sets(list(train_set.dims))
        runner = AblationRunner(config.train_config(), config.net_dropout)
        cells = runner.cells(feature_sets, config.ablate_precat, config.ablate_postcat, config.ablate_rl)
        results = runner.run(cells, train_set, test_set)
        for _, summary in results:
            print(summary.table_row())
        path = ReportWriter(out_dir).ablation(ablation_rows(results))
        write_manifest(out_dir, "ablate", {"config": config.to_dict(), "seed": config.seed, "outputs": [path.name]})
        return path

    def compare(self, base: Path, other: Path, out_dir: Path, top_n: int | None = None) -> Path:
        """Per-class AP difference of two metrics.csv files; writes ap_diff.csv."""
        rows = ap_difference(read_metrics(base), read_metrics(other), top_n)
        path = ReportWriter(out_dir).ap_diff(rows)
        write_manifest(out_dir, "compare", {"base": str(base), "other": str(other), "top_n": top_n, "outputs": [path.name]})
        for class_id, _, _, delta in rows:
            print(f"class {class_id} | {delta:+.4f}")
        return path
