import csv
import json

import numpy as np
import pytest

from cli.config import ExperimentConfig, load_config, load_synth_spec, parse_overrides
from cli.main import main
from exceptions import ConfigurationError
from net import Network, load_checkpoint
from utils.enums import FeatureName

SMALL_SYNTH = [
    "--classes", "4",
    "--sensitive", "3",
    "--train-records", "60",
    "--test-records", "30",
    "--embedding-dim", "8",
    "--corpus-events", "300",
    "--concept-images", "40",
    "--concept-count", "4",
]


def run(*argv) -> int:
    return main([str(arg) for arg in argv])


def read_csv(path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


@pytest.fixture
def world(tmp_path):
    out = tmp_path / "synth"
    assert run("synth", "--seed", 11, "--out", out, *SMALL_SYNTH) == 0
    return out


@pytest.fixture
def gps_caches(tmp_path, world):
    out = tmp_path / "features"
    code = run(
        "extract",
        "--train", world / "records_train.jsonl",
        "--test", world / "records_test.jsonl",
        "--features", "gps_encoding",
        "--set", "gps.rows=10",
        "--set", "gps.cols=20",
        "--set", "class_count=4",
        "--out", out,
    )
    assert code == 0
    return out


@pytest.fixture
def trained(tmp_path, gps_caches):
    out = tmp_path / "model"
    assert run("train", "--seed", 5, "--cache", gps_caches / "features_train.bin", "--features", "gps_encoding",
               "--epochs", 3, "--out", out) == 0
    return out


class TestConfig:
    def test_parse_overrides(self):
        assert parse_overrides(["net.precat=256", "maps=a.bin,b.bin", "x=y=z"]) == {
            "net.precat": "256",
            "maps": "a.bin,b.bin",
            "x": "y=z",
        }

    def test_override_without_value(self):
        with pytest.raises(ConfigurationError):
            parse_overrides(["net.precat"])

    def test_file_then_overrides_then_flags(self, tmp_path):
        path = tmp_path / "experiment.env"
        path.write_text(
            "features = gps_encoding,hashtag_context\n"
            "grid.bbox = [-100, 40, -99, 41]\n"
            "net.precat = 256\n"
            "train.epochs = 4\n"
            "synth.class_count = 3\n"
            "synth.sensitive_count = 2\n"
        )
        config = load_config(path, {"net.precat": "512"}, train_epochs=None, net_rl_replicas=10)
        assert config.features == ["gps_encoding", "hashtag_context"]
        assert config.feature_names == [FeatureName.IMAGE, FeatureName.GPS_ENCODING, FeatureName.HASHTAG_CONTEXT]
        assert config.grid_bbox == [-100, 40, -99, 41]
        assert config.net_precat == 512
        assert config.train_epochs == 4
        assert config.net_rl_replicas == 10
        assert load_synth_spec(path, seed=1).class_count == 3

    def test_single_value_becomes_list(self):
        assert load_config(None, {"radii": "5000"}).radii == [5000]

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="unknown config key"):
            load_config(None, {"net.width": "3"})

    def test_unknown_feature(self):
        with pytest.raises(ConfigurationError):
            load_config(None, {"features": "street_view"})

    def test_train_needs_seed(self):
        with pytest.raises(ConfigurationError, match="seed"):
            ExperimentConfig().train_config()

    def test_manifest_round_trip(self):
        config = load_config(None, {"net.precat": "256", "prior.kind": "radius"}, seed=3)
        assert ExperimentConfig.from_dict(config.to_dict()) == config


class TestSynth:
    def test_deterministic(self, tmp_path, world):
        again = tmp_path / "again"
        assert run("synth", "--seed", 11, "--out", again, *SMALL_SYNTH) == 0
        for name in ("records_train.jsonl", "records_test.jsonl", "corpus.jsonl", "concepts.jsonl", "manifest.json"):
            assert (again / name).read_bytes() == (world / name).read_bytes()

    def test_other_seed_differs(self, tmp_path, world):
        other = tmp_path / "other"
        assert run("synth", "--seed", 12, "--out", other, *SMALL_SYNTH) == 0
        assert (other / "records_train.jsonl").read_bytes() != (world / "records_train.jsonl").read_bytes()

    def test_single_class(self, tmp_path):
        out = tmp_path / "one"
        code = run("synth", "--seed", 1, "--out", out, "--classes", 1, "--sensitive", 1, "--train-records", 10,
                   "--test-records", 0, "--corpus-events", 0, "--concept-images", 0)
        assert code == 0
        records = read_jsonl(out / "records_train.jsonl")
        assert len(records) == 10
        assert {record["label"] for record in records} == {0}

    def test_sensitive_class_is_more_concentrated(self, tmp_path):
        out = tmp_path / "kl"
        assert run("synth", "--seed", 4, "--out", out, "--classes", 6, "--sensitive", 1, "--train-records", 10,
                   "--test-records", 0, "--corpus-events", 6000, "--concept-images", 0) == 0
        assert run("select", "--corpus", out / "corpus.jsonl", "--set", "select.rows=5", "--set", "select.cols=10",
                   "--out", out) == 0
        ranking = read_csv(out / "selection.csv")
        assert ranking[0] == ["class", "kl_nats", "rank"]
        assert ranking[1][0] == "0"
        assert float(ranking[1][1]) > float(ranking[2][1])

    def test_seed_is_required(self, tmp_path):
        with pytest.raises(SystemExit):
            run("synth", "--out", tmp_path)


class TestExtract:
    def test_gps_dims(self, gps_caches):
        manifest = json.loads((gps_caches / "manifest.json").read_text())
        assert manifest["command"] == "extract"
        assert manifest["features"]["train"]["dims"] == {"image": 8, "gps_encoding": 200}
        assert manifest["features"]["train"]["records"] == 60
        assert manifest["features"]["test"]["records"] == 30
        assert manifest["config"]["gps_rows"] == 10

    def test_re_extraction_is_identical(self, tmp_path, world, gps_caches):
        out = tmp_path / "again"
        assert run("extract", "--train", world / "records_train.jsonl", "--test", world / "records_test.jsonl",
                   "--features", "gps_encoding", "--set", "gps.rows=10", "--set", "gps.cols=20",
                   "--set", "class_count=4", "--out", out) == 0
        for name in ("features_train.bin", "features_test.bin"):
            assert (out / name).read_bytes() == (gps_caches / name).read_bytes()

    def test_missing_resource(self, tmp_path, world, capsys):
        code = run("extract", "--train", world / "records_train.jsonl", "--features", "hashtag_context",
                   "--out", tmp_path / "none")
        assert code == 2
        assert capsys.readouterr().err.startswith("error code=configuration ")


class TestTrainEval:
    def test_outputs(self, trained):
        assert (trained / "model.ckpt").exists()
        assert len(read_csv(trained / "loss.csv")) > 1
        assert not (trained / "radii.csv").exists()
        manifest = json.loads((trained / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["config"]["train_epochs"] == 3

    def test_deterministic(self, tmp_path, gps_caches, trained):
        again = tmp_path / "again"
        assert run("train", "--seed", 5, "--cache", gps_caches / "features_train.bin", "--features", "gps_encoding",
                   "--epochs", 3, "--out", again) == 0
        assert (again / "model.ckpt").read_bytes() == (trained / "model.ckpt").read_bytes()
        assert (again / "loss.csv").read_bytes() == (trained / "loss.csv").read_bytes()

        test_cache = gps_caches / "features_test.bin"
        assert run("eval", "--checkpoint", trained / "model.ckpt", "--cache", test_cache, "--out", trained) == 0
        assert run("eval", "--checkpoint", again / "model.ckpt", "--cache", test_cache, "--out", again) == 0
        assert (again / "metrics.csv").read_bytes() == (trained / "metrics.csv").read_bytes()

    def test_eval_metrics(self, gps_caches, trained, capsys):
        capsys.readouterr()
        assert run("eval", "--checkpoint", trained / "model.ckpt", "--cache", gps_caches / "features_test.bin",
                   "--name", "gps", "--out", trained) == 0
        table = read_csv(trained / "metrics.csv")
        assert table[0] == ["class", "ap", "acc1", "acc5", "n_test"]
        assert table[-1][0] == "mean"
        assert sum(int(row[4]) for row in table[1:-1]) == 30
        assert 0.0 <= float(table[-1][1]) <= 1.0
        assert capsys.readouterr().out.startswith("gps | ")

    def test_predict(self, gps_caches, trained):
        assert run("predict", "--checkpoint", trained / "model.ckpt", "--cache", gps_caches / "features_test.bin",
                   "--out", trained) == 0
        table = read_csv(trained / "predictions.csv")
        assert table[0][:3] == ["id", "label", "top1"]
        assert len(table[0]) == 3 + 4
        assert len(table) == 31
        for row in table[1:]:
            assert sum(float(p) for p in row[3:]) == pytest.approx(1.0)

    def test_corrupt_cache(self, tmp_path, capsys):
        cache = tmp_path / "broken.bin"
        cache.write_bytes(b"x" * 64)
        assert run("train", "--seed", 1, "--cache", cache, "--out", tmp_path) == 1
        assert capsys.readouterr().err.startswith("error code=cache_format ")

    def test_missing_cache(self, tmp_path, capsys):
        assert run("eval", "--checkpoint", tmp_path / "model.ckpt", "--cache", tmp_path / "none.bin",
                   "--out", tmp_path) == 2
        err = capsys.readouterr().err
        assert err.count("\n") == 1


class TestBaselineSelectCompare:
    def test_knn_baseline(self, tmp_path, gps_caches, trained):
        out = tmp_path / "baseline"
        code = run("baseline", "--checkpoint", trained / "model.ckpt", "--train-cache", gps_caches / "features_train.bin",
                   "--test-cache", gps_caches / "features_test.bin", "--prior", "knn", "--k", 5, "--out", out)
        assert code == 0
        rows = read_csv(out / "baseline.csv")
        assert [row[0] for row in rows[1:]] == ["image", "knn_k5"]
        assert (out / "metrics_image.csv").exists()
        assert (out / "metrics_knn_k5.csv").exists()

    def test_select_top_n(self, tmp_path, world):
        out = tmp_path / "select"
        assert run("select", "--corpus", world / "corpus.jsonl", "--top-n", 2, "--set", "select.rows=20",
                   "--set", "select.cols=40", "--out", out) == 0
        rows = read_csv(out / "selection.csv")
        assert len(rows) == 3
        assert [row[2] for row in rows[1:]] == ["1", "2"]
        assert json.loads((out / "manifest.json").read_text())["top_n"] == 2

    def test_compare_with_itself(self, tmp_path, gps_caches, trained):
        assert run("eval", "--checkpoint", trained / "model.ckpt", "--cache", gps_caches / "features_test.bin",
                   "--out", trained) == 0
        out = tmp_path / "compare"
        assert run("compare", trained / "metrics.csv", trained / "metrics.csv", "--out", out) == 0
        rows = read_csv(out / "ap_diff.csv")
        assert rows[0] == ["class", "ap_a", "ap_b", "delta"]
        assert all(float(row[3]) == 0.0 for row in rows[1:])


@pytest.mark.slow
def test_default_benchmark(tmp_path):
    data = tmp_path / "synth"
    assert run("synth", "--seed", 2024, "--out", data) == 0
    assert len(read_jsonl(data / "records_train.jsonl")) == 5000
    assert len(read_jsonl(data / "records_test.jsonl")) == 1000
    features = tmp_path / "features"
    assert run("extract", "--train", data / "records_train.jsonl", "--test", data / "records_test.jsonl",
               "--features", "hashtag_context", "--set", f"corpus={data / 'corpus.jsonl'}", "--out", features) == 0
    train_cache, test_cache = features / "features_train.bin", features / "features_test.bin"

    runs = {
        "image": [],
        "context": ["--features", "hashtag_context"],
        "rl10": ["--features", "hashtag_context", "--rl", 10],
    }
    mean_ap = {}
    for name, extra in runs.items():
        out = tmp_path / name
        assert run("train", "--seed", 7, "--cache", train_cache, "--epochs", 15, "--out", out, *extra) == 0
        assert run("eval", "--checkpoint", out / "model.ckpt", "--cache", test_cache, "--out", out) == 0
        mean_ap[name] = float(read_csv(out / "metrics.csv")[-1][1])
    assert 0.4 <= mean_ap["image"] <= 0.7
    assert mean_ap["context"] >= mean_ap["image"] + 0.05
    assert mean_ap["rl10"] >= mean_ap["context"] - 0.02

    radii = read_csv(tmp_path / "rl10" / "radii.csv")
    assert radii[0] == ["feature", "key", "normalization", "replica", "radius_m"]
    assert {row[3] for row in radii[1:]} == {str(k) for k in range(10)}
    assert all(1000.0 <= float(row[4]) <= 10000.0 for row in radii[1:])

    model = load_checkpoint(tmp_path / "rl10" / "model.ckpt")
    trained = model.network
    initial = Network(trained.inputs, trained.config, trained.knots, seed=model.train_config.seed)
    key = "hashtag_context.radius.rho"
    rho = trained.parameters()[key]
    assert np.all((rho >= 1000.0) & (rho <= 10000.0))
    assert np.any(np.abs(rho - initial.parameters()[key]) > 1.0)
