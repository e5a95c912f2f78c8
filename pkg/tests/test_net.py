import math

import numpy as np
import pytest

from exceptions import ConfigurationError, DimensionMismatchError, KeyOutOfRangeError
from features.cache import FeatureDataset
from features.models import FeatureBundle
from histfn import PiecewiseLinearFn
from histfn.functions import functions_to_context
from net import (
    Dropout,
    InputSpec,
    LossCurve,
    Network,
    NetworkConfig,
    ParamKind,
    RadiusLearning,
    RadiusParams,
    TrainConfig,
    TrainState,
    Trainer,
    concat_backward,
    concat_forward,
    dropout_mask,
    fc_backward,
    fc_forward,
    learned_radii,
    load_checkpoint,
    predict_bundle,
    predict_dataset,
    radius_backward,
    radius_forward,
    relu_backward,
    relu_forward,
    save_checkpoint,
    sgd_step,
    softmax,
    softmax_ce,
    train,
)
from net.trainer import build_inputs, gather_inputs
from utils.enums import FeatureName

KNOTS = np.arange(1000.0, 10001.0, 1000.0)


def rel_error(analytic, numeric) -> float:
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    return 0.0 if scale == 0 else float(np.linalg.norm(analytic - numeric) / scale)


def numeric_grad(f, x: np.ndarray, h: float) -> np.ndarray:
    """Central differences of the scalar f() w.r.t. every entry of x, perturbed in place."""
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        original = x[idx]
        x[idx] = original + h
        plus = f()
        x[idx] = original - h
        minus = f()
        x[idx] = original
        grad[idx] = (plus - minus) / (2 * h)
    return grad


def non_knot_radii(rng, shape, margin: float) -> np.ndarray:
    """Uniform draws in the knot range, redrawn while closer than margin to a knot."""
    rho = rng.uniform(KNOTS[0], KNOTS[-1], shape)
    near = np.min(np.abs(rho[..., None] - KNOTS), axis=-1) < margin
    while near.any():
        rho[near] = rng.uniform(KNOTS[0], KNOTS[-1], int(near.sum()))
        near = np.min(np.abs(rho[..., None] - KNOTS), axis=-1) < margin
    return rho


def separable_dataset(rng, n=64) -> FeatureDataset:
    labels = np.arange(n) % 2
    centers = np.where(labels[:, None] == 0, -2.0, 2.0)
    x = centers + rng.uniform(-0.5, 0.5, (n, 2))
    return FeatureDataset(
        ids=[f"toy-{i}" for i in range(n)],
        labels=labels.astype(np.int64),
        lon=np.zeros(n),
        lat=np.zeros(n),
        class_count=2,
        dims={FeatureName.IMAGE: 2},
        features={FeatureName.IMAGE: x},
    )


def context_dataset(rng, n=40, keys=2, classes=3) -> FeatureDataset:
    """Image embeddings plus a hashtag context bank whose shape depends on the label."""
    labels = rng.integers(0, classes, n)
    fn_count = 2 * keys
    growth = (labels[:, None, None] + 1) / classes * np.linspace(0.1, 1.0, KNOTS.size)
    values = np.clip(growth + 0.05 * rng.random((n, fn_count, KNOTS.size)), 0.0, 1.0)
    return FeatureDataset(
        ids=[f"ctx-{i}" for i in range(n)],
        labels=labels.astype(np.int64),
        lon=np.zeros(n),
        lat=np.zeros(n),
        class_count=classes,
        dims={FeatureName.IMAGE: 3, FeatureName.HASHTAG_CONTEXT: fn_count * KNOTS.size},
        features={FeatureName.IMAGE: rng.standard_normal((n, 3))},
        knots=KNOTS.copy(),
        bank_values=values,
        segments={FeatureName.HASHTAG_CONTEXT: (0, fn_count)},
        key_counts={FeatureName.HASHTAG_CONTEXT: keys},
    )


def quick_config(**overrides) -> TrainConfig:
    values = {"seed": 7, "lr": 0.1, "weight_decay": 0.0, "epochs": 5, "lr_step": 10, "batch_size": 8}
    values.update(overrides)
    return TrainConfig(**values)


class TestFullyConnected:
    def test_identity(self, rng):
        x = rng.standard_normal((4, 5))
        np.testing.assert_array_equal(fc_forward(np.eye(5), np.zeros(5), x), x)

    def test_identity_passes_gradient(self, rng):
        x, grad_y = rng.standard_normal((4, 5)), rng.standard_normal((4, 5))
        _, _, grad_x = fc_backward(np.eye(5), x, grad_y)
        np.testing.assert_array_equal(grad_x, grad_y)

    def test_gradient_check(self, rng):
        W, b = rng.standard_normal((8, 5)), rng.standard_normal(8)
        x, projection = rng.standard_normal((3, 5)), rng.standard_normal((3, 8))

        def loss():
            return float((fc_forward(W, b, x) * projection).sum())

        grad_W, grad_b, grad_x = fc_backward(W, x, projection)
        assert rel_error(grad_W, numeric_grad(loss, W, 1e-6)) < 1e-6
        assert rel_error(grad_b, numeric_grad(loss, b, 1e-6)) < 1e-6
        assert rel_error(grad_x, numeric_grad(loss, x, 1e-6)) < 1e-6

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            fc_forward(np.zeros((3, 4)), np.zeros(3), rng.standard_normal((2, 5)))


class TestActivations:
    def test_relu(self):
        np.testing.assert_array_equal(relu_forward(np.array([-1.0, 2.0])), [0.0, 2.0])
        np.testing.assert_array_equal(relu_backward(np.array([-1.0, 2.0]), np.array([5.0, 5.0])), [0.0, 5.0])

    def test_dropout_zero_is_identity(self, rng):
        x = rng.standard_normal((4, 6))
        layer = Dropout("d", 6, 0.0, rng)
        np.testing.assert_array_equal(layer.forward(x, train=True), x)
        np.testing.assert_array_equal(layer.backward(x), x)

    def test_dropout_eval_is_identity(self, rng):
        x = rng.standard_normal((4, 6))
        np.testing.assert_array_equal(Dropout("d", 6, 0.5, rng).forward(x, train=False), x)

    def test_dropout_expectation(self):
        x = np.array([0.5, -1.0, 2.0, 3.0])
        masks = dropout_mask((100_000, x.size), 0.2, np.random.default_rng(11))
        np.testing.assert_allclose((masks * x).mean(axis=0), x, rtol=0.01)

    def test_dropout_backward_uses_forward_mask(self, rng):
        layer = Dropout("d", 50, 0.5, rng)
        out = layer.forward(np.ones((2, 50)), train=True)
        np.testing.assert_array_equal(layer.backward(np.ones((2, 50))), out)


class TestConcat:
    def test_single_part(self, rng):
        x = rng.standard_normal((3, 4))
        np.testing.assert_array_equal(concat_forward([x], [4]), x)

    def test_split_offsets(self, rng):
        a, b = rng.standard_normal((2, 2)), rng.standard_normal((2, 3))
        joined = concat_forward([a, b], [2, 3])
        assert joined.shape == (2, 5)
        grad_a, grad_b = concat_backward(joined, [2, 3])
        np.testing.assert_array_equal(grad_a, a)
        np.testing.assert_array_equal(grad_b, b)

    def test_dim_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            concat_forward([rng.standard_normal((2, 3))], [4])


class TestSoftmaxCE:
    def test_symmetric(self):
        loss, grad = softmax_ce(np.array([0.0, 0.0]), 0)
        assert loss == pytest.approx(math.log(2), abs=1e-12)
        np.testing.assert_allclose(grad, [-0.5, 0.5])

    def test_large_logits(self):
        loss, grad = softmax_ce(np.array([1000.0, 0.0]), 0)
        assert math.isfinite(loss)
        assert loss == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.isfinite(grad))

    def test_gradient_check(self, rng):
        logits = rng.standard_normal(10)
        _, grad = softmax_ce(logits, 4)
        numeric = numeric_grad(lambda: softmax_ce(logits, 4)[0], logits, 1e-5)
        assert rel_error(grad, numeric) < 1e-6

    def test_label_out_of_range(self):
        with pytest.raises(KeyOutOfRangeError):
            softmax_ce(np.zeros((1, 3)), [3])

    def test_shift_invariance(self, rng):
        logits = rng.standard_normal((5, 7))
        np.testing.assert_allclose(softmax(logits + 123.0), softmax(logits), rtol=1e-12)


class TestRadiusLayer:
    def test_constant_functions(self, rng):
        values = np.full((3, 2, KNOTS.size), 0.4)
        params = RadiusParams(rng.uniform(1000, 10000, (2, 3)), 1000.0, 10000.0)
        np.testing.assert_allclose(radius_forward(KNOTS, values, params), 0.4)
        grad = radius_backward(KNOTS, values, params, np.ones((3, 6)))
        np.testing.assert_array_equal(grad, np.zeros((2, 3)))

    def test_at_knot(self, rng):
        values = rng.random((2, 3, KNOTS.size))
        params = RadiusParams(np.full((3, 1), KNOTS[4]), 1000.0, 10000.0)
        np.testing.assert_array_equal(radius_forward(KNOTS, values, params), values[:, :, 4])

    def test_matches_eval_oracle(self, rng):
        values = rng.random((4, 3, KNOTS.size))
        params = RadiusParams(rng.uniform(500, 11000, (3, 2)), 1000.0, 10000.0)
        out = radius_forward(KNOTS, values, params)
        for b in range(4):
            for f in range(3):
                fn = PiecewiseLinearFn(KNOTS, values[b, f])
                for k in range(2):
                    assert out[b, f * 2 + k] == pytest.approx(fn.eval(params.rho[f, k]), rel=1e-12)

    def test_single_function_chain_rule(self):
        values = (KNOTS * 2e-4)[None, None, :]
        params = RadiusParams(np.array([[4500.0]]), 1000.0, 10000.0)
        grad = radius_backward(KNOTS, values, params, np.array([[3.0]]))
        assert grad[0, 0] == pytest.approx(3.0 * 2e-4)

    def test_batch_gradients_are_summed(self, rng):
        values = rng.random((5, 2, KNOTS.size))
        params = RadiusParams(np.array([[2500.0], [7300.0]]), 1000.0, 10000.0)
        grad_out = rng.standard_normal((5, 2))
        total = radius_backward(KNOTS, values, params, grad_out)
        per_sample = sum(radius_backward(KNOTS, values[i:i + 1], params, grad_out[i:i + 1]) for i in range(5))
        np.testing.assert_allclose(total, per_sample, rtol=1e-12)

    def test_backward_matches_central_differences(self, rng):
        values = rng.random((4, 10, KNOTS.size))
        params = RadiusParams(non_knot_radii(rng, (10, 10), 1e-3), 1000.0, 10000.0)
        grad_out = rng.standard_normal((4, 100))

        def objective():
            return float(np.sum(grad_out * radius_forward(KNOTS, values, params)))

        analytic = radius_backward(KNOTS, values, params, grad_out)
        numeric = numeric_grad(objective, params.rho, 1e-4)
        assert rel_error(analytic, numeric) < 1e-6

    def test_initialization_spreads_replicas(self, rng):
        layer = RadiusLearning("ctx.radius", 4, 5, KNOTS, rng, 0.05)
        rho = layer.radius.rho
        assert rho.shape == (4, 5)
        assert np.all((rho >= KNOTS[0]) & (rho <= KNOTS[-1]))
        assert np.all(np.diff(rho, axis=1) > 0)
        assert len({tuple(row) for row in rho}) == 4

    def test_identical_replicas_get_identical_gradients(self, rng):
        layer = RadiusLearning("ctx.radius", 3, 2, KNOTS, rng, 0.0)
        layer.radius.rho[:] = 4321.0
        layer.forward(rng.random((6, 3, KNOTS.size)), train=True)
        upstream = np.repeat(rng.standard_normal((6, 3)), 2, axis=1)
        layer.backward(upstream)
        grads = layer.grads["rho"]
        np.testing.assert_array_equal(grads[:, 0], grads[:, 1])


class TestNetworkGradients:
    def test_full_network(self, rng):
        inputs = [InputSpec("image", 3), InputSpec("gps_coordinates", 2)]
        network = Network(inputs, NetworkConfig(class_count=3, precat=5, postcat=6, dropout=0.0), seed=3)
        batch = {"image": rng.standard_normal((4, 3)), "gps_coordinates": rng.standard_normal((4, 2))}
        labels = np.array([0, 2, 1, 2])

        def loss():
            return softmax_ce(network.forward(batch, train=True), labels)[0]

        _, grad = softmax_ce(network.forward(batch, train=True), labels)
        network.backward(grad)
        analytic = network.gradients()
        for name, param in network.parameters().items():
            assert rel_error(analytic[name], numeric_grad(loss, param, 1e-6)) < 1e-6, name

    def test_radius_through_network(self, rng):
        # 10 functions x 10 replicas: 100 radii checked in one pass
        inputs = [InputSpec("image", 3), InputSpec("hashtag_context", 10, "radius", 5)]
        network = Network(inputs, NetworkConfig(class_count=3, postcat=5, rl_replicas=10, dropout=0.0), KNOTS, seed=5)
        batch = {"image": rng.standard_normal((6, 3)), "hashtag_context": rng.random((6, 10, KNOTS.size))}
        labels = np.array([0, 1, 2, 0, 1, 2])
        rho = network.parameters()["hashtag_context.radius.rho"]
        assert rho.size == 100
        rho[:] = non_knot_radii(rng, rho.shape, 1e-3)

        def loss():
            return softmax_ce(network.forward(batch, train=True), labels)[0]

        _, grad = softmax_ce(network.forward(batch, train=True), labels)
        network.backward(grad)
        analytic = network.gradients()["hashtag_context.radius.rho"]
        assert rel_error(analytic, numeric_grad(loss, rho, 1e-4)) < 1e-4

    def test_missing_input(self, rng):
        network = Network([InputSpec("image", 3)], NetworkConfig(class_count=2))
        with pytest.raises(DimensionMismatchError):
            network.forward({"gps_coordinates": rng.standard_normal((1, 2))})


class TestOptimizer:
    def test_zero_gradient_no_decay(self):
        state = TrainState(params={"fc.W": np.array([[1.0, -2.0]])}, kinds={"fc.W": ParamKind.WEIGHT}, lr=0.1)
        sgd_step(state, {"fc.W": np.zeros((1, 2))}, quick_config())
        np.testing.assert_array_equal(state.params["fc.W"], [[1.0, -2.0]])

    def test_hand_update(self):
        state = TrainState(params={"fc.W": np.array([1.0])}, kinds={"fc.W": ParamKind.WEIGHT}, lr=0.1)
        sgd_step(state, {"fc.W": np.array([1.0])}, quick_config(momentum=0.9))
        assert state.params["fc.W"][0] == pytest.approx(0.9)
        assert state.velocity["fc.W"][0] == pytest.approx(-0.1)

    def test_momentum_accumulates(self):
        state = TrainState(params={"fc.W": np.array([1.0])}, kinds={"fc.W": ParamKind.WEIGHT}, lr=0.1)
        config = quick_config(momentum=0.9)
        sgd_step(state, {"fc.W": np.array([1.0])}, config)
        sgd_step(state, {"fc.W": np.array([1.0])}, config)
        assert state.params["fc.W"][0] == pytest.approx(0.9 - 0.19)

    def test_no_decay_on_biases(self):
        state = TrainState(params={"fc.b": np.array([2.0])}, kinds={"fc.b": ParamKind.BIAS}, lr=0.1)
        sgd_step(state, {"fc.b": np.array([0.0])}, quick_config(weight_decay=0.5))
        assert state.params["fc.b"][0] == 2.0

    def test_decay_on_weights(self):
        state = TrainState(params={"fc.W": np.array([2.0])}, kinds={"fc.W": ParamKind.WEIGHT}, lr=0.1)
        sgd_step(state, {"fc.W": np.array([0.0])}, quick_config(weight_decay=0.5))
        assert state.params["fc.W"][0] == pytest.approx(1.9)

    def test_radius_clamped(self):
        state = TrainState(
            params={"ctx.rho": np.array([[1500.0, 9500.0]])},
            kinds={"ctx.rho": ParamKind.RADIUS},
            rho_bounds=(1000.0, 10000.0),
            lr=0.1,
        )
        sgd_step(state, {"ctx.rho": np.array([[1.0, -1.0]])}, quick_config())
        np.testing.assert_array_equal(state.params["ctx.rho"], [[1000.0, 10000.0]])

    def test_radius_follows_weight_rule_then_clamp(self):
        start = np.array([[1500.0, 6000.0, 9990.0]])
        state = TrainState(
            params={"fc.W": start.copy(), "ctx.rho": start.copy()},
            kinds={"fc.W": ParamKind.WEIGHT, "ctx.rho": ParamKind.RADIUS},
            rho_bounds=(1000.0, 10000.0),
            lr=0.1,
        )
        config = quick_config(momentum=0.9, radius_lr_mult=1.0)
        grad = np.array([[30.0, -7.5, -50.0]])
        for _ in range(2):
            sgd_step(state, {"fc.W": grad.copy(), "ctx.rho": grad.copy()}, config)
        weights, rho = state.params["fc.W"], state.params["ctx.rho"]
        np.testing.assert_allclose(weights, [[1491.3, 6002.175, 10004.5]], rtol=1e-12)
        np.testing.assert_array_equal(rho, np.clip(weights, 1000.0, 10000.0))
        assert rho[0, 2] == 10000.0

    def test_learning_rate_schedule(self):
        config = TrainConfig(seed=0)
        assert [config.learning_rate(e) for e in (0, 9, 10, 19, 20, 29)] == pytest.approx(
            [0.1, 0.1, 0.01, 0.01, 0.001, 0.001]
        )


class TestTraining:
    def test_separable_toy_set(self, rng):
        dataset = separable_dataset(rng)
        net_config = NetworkConfig(class_count=2, dropout=0.0)
        config = quick_config(epochs=30, lr_step=30)
        specs = build_inputs(dataset, ["image"], False)
        untrained = Network(specs, net_config, seed=config.seed)
        initial, _ = softmax_ce(untrained.forward(gather_inputs(dataset, specs, np.arange(len(dataset)))), dataset.labels)

        model = train(dataset, ["image"], net_config, config)
        probs = predict_dataset(model, dataset)
        assert np.mean(probs.argmax(axis=1) == dataset.labels) == 1.0
        final, _ = softmax_ce(np.log(probs), dataset.labels)
        assert final < 0.1 * initial
        assert len(model.loss_curve) == 30

    def test_convex_loss_is_non_increasing(self, rng):
        dataset = separable_dataset(rng, n=32)
        config = quick_config(lr=0.01, momentum=0.0, epochs=20, lr_step=20, batch_size=32)
        model = train(dataset, ["image"], NetworkConfig(class_count=2, dropout=0.0), config)
        losses = [report.loss for report in model.loss_curve]
        assert all(b <= a for a, b in zip(losses, losses[1:]))

    def test_same_seed_bit_identical_checkpoints(self, rng, tmp_path):
        dataset = context_dataset(rng)
        net_config = NetworkConfig(class_count=3, precat=4, rl_replicas=2)
        paths = []
        for run in range(2):
            model = train(dataset, ["image", "hashtag_context"], net_config, quick_config(epochs=3))
            paths.append(tmp_path / f"run{run}.ckpt")
            save_checkpoint(model, paths[-1])
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_radii_stay_in_range(self, rng):
        dataset = context_dataset(rng)
        model = train(dataset, ["image", "hashtag_context"], NetworkConfig(class_count=3, rl_replicas=3),
                      quick_config(epochs=4))
        rows = learned_radii(model)
        assert len(rows) == 4 * 3
        assert all(KNOTS[0] <= row["radius_m"] <= KNOTS[-1] for row in rows)
        assert {row["normalization"] for row in rows} == {"across", "within"}

    def test_class_count_mismatch_fails_before_training(self, rng):
        dataset = separable_dataset(rng)
        with pytest.raises(DimensionMismatchError):
            train(dataset, ["image"], NetworkConfig(class_count=3), quick_config())

    def test_unknown_feature(self, rng):
        with pytest.raises(ConfigurationError):
            train(separable_dataset(rng), ["image", "acs"], NetworkConfig(class_count=2), quick_config())

    def test_loss_curve_csv(self, rng, tmp_path):
        curve = LossCurve()
        train(separable_dataset(rng), ["image"], NetworkConfig(class_count=2), quick_config(epochs=2), observers=[curve])
        curve.write(tmp_path / "loss.csv")
        lines = (tmp_path / "loss.csv").read_text().splitlines()
        assert lines[0] == "epoch,loss,lr"
        assert len(lines) == 3
        assert lines[1].startswith("1,")

    def test_observers_receive_every_epoch_in_order(self, rng):
        first, second, dropped = LossCurve(), LossCurve(), LossCurve()
        dataset = separable_dataset(rng)
        trainer = Trainer(NetworkConfig(class_count=2), quick_config(epochs=3))
        for curve in (first, second, dropped):
            trainer.subscribe(curve)
        trainer.unsubscribe(dropped)
        trainer.unsubscribe(dropped)
        trainer.train(dataset, ["image"])
        assert [report.epoch for report in first.reports] == [1, 2, 3]
        assert first.reports == second.reports
        assert dropped.reports == []


class TestPrediction:
    def test_precat_only_layout(self):
        inputs = [InputSpec("image", 32), InputSpec("gps_encoding", 200)]
        network = Network(inputs, NetworkConfig(class_count=10, precat=256))
        assert network.config.label == "256/-"
        layers = {spec.name: spec for spec in network.describe()}
        assert layers["gps_encoding.precat.fc"].out_dim == 256
        assert "image.precat.fc" not in layers
        assert not any(name.startswith("postcat") for name in layers)
        assert layers["output.fc"].in_dim == 32 + 256

    def test_probabilities_sum_to_one(self, rng):
        network = Network([InputSpec("image", 5)], NetworkConfig(class_count=4, postcat=3))
        probs = network.predict_proba({"image": rng.standard_normal((10, 5))})
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_zero_weights_uniform(self, rng):
        network = Network([InputSpec("image", 5), InputSpec("acs", 2)], NetworkConfig(class_count=4, precat=3))
        for value in network.parameters().values():
            value[...] = 0.0
        probs = network.predict_proba({"image": rng.standard_normal((2, 5)), "acs": rng.standard_normal((2, 2))})
        np.testing.assert_allclose(probs, 0.25, rtol=1e-12)

    def test_output_bias_shift(self, rng):
        network = Network([InputSpec("image", 5)], NetworkConfig(class_count=4))
        batch = {"image": rng.standard_normal((3, 5))}
        before = network.predict_proba(batch)
        network.parameters()["output.fc.b"] += 5.0
        np.testing.assert_allclose(network.predict_proba(batch), before, rtol=1e-12)

    def test_manual_forward(self, rng):
        network = Network(
            [InputSpec("image", 3), InputSpec("gps_coordinates", 2)],
            NetworkConfig(class_count=3, precat=4, dropout=0.5),
            seed=9,
        )
        params = network.parameters()
        image, coords = rng.standard_normal((2, 3)), rng.random((2, 2))
        hidden = np.maximum(coords @ params["gps_coordinates.precat.fc.W"].T + params["gps_coordinates.precat.fc.b"], 0.0)
        logits = np.hstack([image, hidden]) @ params["output.fc.W"].T + params["output.fc.b"]
        expected = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
        np.testing.assert_allclose(network.predict_proba({"image": image, "gps_coordinates": coords}), expected, rtol=1e-12)

    def test_checkpoint_restores_predictions(self, rng, tmp_path):
        dataset = context_dataset(rng)
        model = train(dataset, ["image", "hashtag_context"], NetworkConfig(class_count=3, precat=4, rl_replicas=2),
                      quick_config(epochs=2))
        save_checkpoint(model, tmp_path / "model.ckpt")
        loaded = load_checkpoint(tmp_path / "model.ckpt")
        assert loaded.config == model.config
        assert loaded.train_config == model.train_config
        assert loaded.loss_curve == model.loss_curve
        np.testing.assert_array_equal(predict_dataset(loaded, dataset), predict_dataset(model, dataset))

    def test_bundle_matches_dataset(self, rng):
        dataset = context_dataset(rng)
        model = train(dataset, ["image", "hashtag_context"], NetworkConfig(class_count=3, rl_replicas=2),
                      quick_config(epochs=2))
        expected = predict_dataset(model, dataset)
        for i in (0, 7):
            bundle = FeatureBundle(dataset.ids[i])
            bundle.add(FeatureName.IMAGE, dataset.features[FeatureName.IMAGE][i], 3)
            bundle.add(FeatureName.HASHTAG_CONTEXT, functions_to_context(dataset.bank_values[i]), 40)
            np.testing.assert_allclose(predict_bundle(model, bundle), expected[i], rtol=1e-12)

    def test_bundle_missing_feature(self, rng):
        model = train(separable_dataset(rng), ["image"], NetworkConfig(class_count=2), quick_config(epochs=1))
        with pytest.raises(DimensionMismatchError):
            predict_bundle(model, FeatureBundle("empty"))
