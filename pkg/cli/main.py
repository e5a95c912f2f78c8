import argparse
import sys
from pathlib import Path

from cli.commands import Commands
from cli.config import load_config, load_synth_spec, parse_overrides
from exceptions import ConfigurationError, GeoContextException
from utils.enums import PriorKind
from utils.log import enable_console, get_logger

_logger = get_logger("cli")


def _add_common(parser: argparse.ArgumentParser, seed_required: bool = False) -> None:
    parser.add_argument("--config", type=Path, help="dotenv-format experiment config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set net.precat=256 (repeatable)")
    parser.add_argument("--seed", type=int, required=seed_required, help="run seed")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current directory)")
    parser.add_argument("--verbose", action="store_true", help="mirror log messages to stderr")


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoctx",
        description="Location-context image classification: feature extraction, training, priors, selection and evaluation.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="generate a synthetic benchmark")
    _add_common(synth, seed_required=True)
    synth.add_argument("--classes", type=int, help="class count")
    synth.add_argument("--sensitive", type=int, help="number of location-sensitive classes")
    synth.add_argument("--train-records", type=int)
    synth.add_argument("--test-records", type=int)
    synth.add_argument("--embedding-dim", type=int)
    synth.add_argument("--snr", type=float, help="class signal to noise ratio of the embeddings")
    synth.add_argument("--sigma-km", type=float, help="spatial spread of location-sensitive classes")
    synth.add_argument("--corpus-events", type=int)
    synth.add_argument("--concept-count", type=int)
    synth.add_argument("--concept-images", type=int)

    extract = commands.add_parser("extract", help="extract features into feature caches")
    _add_common(extract)
    extract.add_argument("--train", dest="records_train", type=str, help="training records.jsonl")
    extract.add_argument("--test", dest="records_test", type=str, help="test records.jsonl")
    extract.add_argument("--features", type=str, help="comma-separated feature names")

    train = commands.add_parser("train", help="train a network on a feature cache")
    _add_common(train, seed_required=True)
    train.add_argument("--cache", type=Path, required=True)
    train.add_argument("--features", type=str, help="comma-separated feature names")
    train.add_argument("--precat", type=int, help="pre-cat layer width, 0 for none")
    train.add_argument("--postcat", type=int, help="post-cat layer width, 0 for none")
    train.add_argument("--rl", type=int, help="radius learning replicas, 0 for fixed histograms")
    train.add_argument("--epochs", type=int)

    evaluate = commands.add_parser("eval", help="evaluate a checkpoint on a feature cache")
    _add_common(evaluate)
    evaluate.add_argument("--checkpoint", type=Path, required=True)
    evaluate.add_argument("--cache", type=Path, required=True)
    evaluate.add_argument("--name", default="model", help="row name in the printed table")

    predict = commands.add_parser("predict", help="class probabilities of every record of a feature cache")
    _add_common(predict)
    predict.add_argument("--checkpoint", type=Path, required=True)
    predict.add_argument("--cache", type=Path, required=True)

    baseline = commands.add_parser("baseline", help="image-only classifier combined with location priors")
    _add_common(baseline)
    baseline.add_argument("--checkpoint", type=Path, required=True, help="image-only model")
    baseline.add_argument("--train-cache", type=Path, required=True)
    baseline.add_argument("--test-cache", type=Path, required=True)
    baseline.add_argument("--prior", action="append", choices=[kind.value for kind in PriorKind])
    baseline.add_argument("--k", type=int, help="kNN prior neighbor count")
    baseline.add_argument("--radius-m", type=float, help="radius prior radius in meters")
    baseline.add_argument("--epsilon", type=float, help="prior smoothing")
    baseline.add_argument("--corpus", type=str, help="hashtag corpus for the radius prior")

    select = commands.add_parser("select", help="rank classes by KL divergence of their geographic distribution")
    _add_common(select)
    select.add_argument("--corpus", type=str, help="per-class tagged corpus.jsonl")
    select.add_argument("--top-n", type=int)
    select.add_argument("--threshold", type=float, help="keep classes with KL above this instead of top-n")
    select.add_argument("--alpha", type=float, help="additive smoothing of the class distributions")

    ablate = commands.add_parser("ablate", help="run the feature x pre-cat x RL experiment grid")
    _add_common(ablate)
    ablate.add_argument("--train-cache", type=Path, required=True)
    ablate.add_argument("--test-cache", type=Path, required=True)

    compare = commands.add_parser("compare", help="per-class AP difference of two metrics.csv files")
    _add_common(compare)
    compare.add_argument("base", type=Path)
    compare.add_argument("other", type=Path)
    compare.add_argument("--top-n", type=int)
    return parser


def _config(args: argparse.Namespace, **flags):
    return load_config(args.config, parse_overrides(args.overrides), seed=args.seed, **flags)


def _features(value: str | None) -> list[str] | None:
    return None if value is None else [name.strip() for name in value.split(",") if name.strip()]


def run(args: argparse.Namespace) -> None:
    commands = Commands()
    match args.command:
        case "synth":
            spec = load_synth_spec(
                args.config,
                parse_overrides(args.overrides),
                seed=args.seed,
                class_count=args.classes,
                sensitive_count=args.sensitive,
                train_records=args.train_records,
                test_records=args.test_records,
                embedding_dim=args.embedding_dim,
                snr=args.snr,
                sigma_km=args.sigma_km,
                corpus_events=args.corpus_events,
                concept_count=args.concept_count,
                concept_images=args.concept_images,
            )
            commands.synth(spec, args.out)
        case "extract":
            config = _config(args, records_train=args.records_train, records_test=args.records_test,
                             features=_features(args.features))
            commands.extract(config, args.out)
        case "train":
            config = _config(args, features=_features(args.features), net_precat=args.precat,
                             net_postcat=args.postcat, net_rl_replicas=args.rl, train_epochs=args.epochs)
            commands.train(config, args.cache, args.out)
        case "eval":
            commands.eval(args.checkpoint, args.cache, args.out, args.name)
        case "predict":
            commands.predict(args.checkpoint, args.cache, args.out)
        case "baseline":
            config = _config(args, prior_k=args.k, prior_radius_m=args.radius_m, prior_epsilon=args.epsilon,
                             corpus=args.corpus)
            priors = None if args.prior is None else [PriorKind(kind) for kind in dict.fromkeys(args.prior)]
            commands.baseline(config, args.checkpoint, args.train_cache, args.test_cache, args.out, priors)
        case "select":
            config = _config(args, corpus=args.corpus, select_alpha=args.alpha)
            commands.select(config, args.out, args.top_n, args.threshold)
        case "ablate":
            commands.ablate(_config(args), args.train_cache, args.test_cache, args.out)
        case "compare":
            commands.compare(args.base, args.other, args.out, args.top_n)


def main(argv: list[str] | None = None) -> int:
    """
    Command-line entry point.

    Returns:
        int: 0 on success, 2 on configuration errors, 1 on any other error.
    """
    args = create_parser().parse_args(argv)
    if args.verbose:
        enable_console()
    try:
        run(args)
    except GeoContextException as exc:
        _logger.error("%s failed: %s", args.command, exc)
        message = str(exc).replace('"', "'").replace("\n", " ")
        print(f'error code={exc.code} message="{message}"', file=sys.stderr)
        return 2 if isinstance(exc, ConfigurationError) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
