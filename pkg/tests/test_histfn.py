import numpy as np
import pytest

from exceptions import DimensionMismatchError
from histfn import HistFnBank, PiecewiseLinearFn, bank_deriv, bank_eval, context_to_functions, fit, functions_to_context
from histfn.functions import interpolate, slope

KNOTS = np.arange(1000.0, 10001.0, 1000.0)


class TestPiecewiseLinearFn:
    def test_hand_interpolation(self):
        fn = PiecewiseLinearFn([1000.0, 2000.0], [0.0, 1.0])
        assert fn.eval(1500.0) == pytest.approx(0.5)
        assert fn.deriv(1500.0) == pytest.approx(1e-3)

    def test_clamped_outside_knots(self):
        fn = PiecewiseLinearFn([1000.0, 2000.0], [0.3, 0.9])
        assert fn.eval(50.0) == 0.3
        assert fn.eval(1e9) == 0.9
        assert fn.deriv(50.0) == 0.0
        assert fn.deriv(2500.0) == 0.0

    def test_constant_function(self):
        fn = PiecewiseLinearFn(KNOTS, np.full(KNOTS.size, 0.25))
        for rho in (0.0, 1234.5, 5000.0, 20000.0):
            assert fn.eval(rho) == pytest.approx(0.25)
            assert fn.deriv(rho) == 0.0

    def test_knot_derivative_uses_right_segment(self):
        fn = PiecewiseLinearFn([0.0, 1.0, 2.0], [0.0, 1.0, 3.0])
        assert fn.deriv(1.0) == pytest.approx(2.0)
        assert fn.deriv(2.0) == pytest.approx(2.0)

    def test_knots_must_increase(self):
        with pytest.raises(DimensionMismatchError):
            PiecewiseLinearFn([1000.0, 1000.0], [0.0, 1.0])

    def test_deriv_matches_central_differences(self, rng):
        fn = PiecewiseLinearFn(KNOTS, rng.random(KNOTS.size))
        h = 1e-3
        for rho in rng.uniform(KNOTS[0], KNOTS[-1], 100):
            if np.min(np.abs(KNOTS - rho)) < 10 * h:
                continue
            numeric = (fn.eval(rho + h) - fn.eval(rho - h)) / (2 * h)
            assert fn.deriv(rho) == pytest.approx(numeric, rel=1e-6, abs=1e-12)


class TestFit:
    def test_zero_values(self):
        fn = fit([0.0] * KNOTS.size, KNOTS)
        assert fn.eval(4321.0) == 0.0

    def test_interpolates_through_values(self, rng):
        values = rng.random(KNOTS.size)
        fn = fit(values, KNOTS)
        for knot, value in zip(KNOTS, values):
            assert fn.eval(knot) == pytest.approx(value)

    def test_scaled_knots_midway(self):
        fn = fit(KNOTS * 1e-4, KNOTS)
        assert fn.eval(5500.0) == pytest.approx((0.5 + 0.6) / 2)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fit([0.0, 1.0], KNOTS)


class TestBank:
    def test_eval_matches_single_function_oracle(self, rng):
        values = rng.random((4, 6, KNOTS.size))
        rho = rng.uniform(0.0, 12000.0, (6, 3))
        out = bank_eval(KNOTS, values, rho)
        assert out.shape == (4, 6, 3)
        for b in range(4):
            for f in range(6):
                np.testing.assert_allclose(out[b, f], interpolate(KNOTS, values[b, f], rho[f]), rtol=1e-12)

    def test_deriv_matches_single_function_oracle(self, rng):
        values = rng.random((3, 5, KNOTS.size))
        rho = rng.uniform(0.0, 12000.0, (5, 2))
        rho[0, 0] = KNOTS[-1]
        out = bank_deriv(KNOTS, values, rho)
        for b in range(3):
            for f in range(5):
                np.testing.assert_allclose(out[b, f], slope(KNOTS, values[b, f], rho[f]), rtol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            bank_eval(KNOTS, np.zeros((1, 3, KNOTS.size)), np.zeros((2, 1)))

    def test_context_layout(self):
        # radius-major: [r0: f0 f1 f2, r1: f0 f1 f2]
        context = np.array([1.0, 2.0, 3.0, 10.0, 20.0, 30.0])
        functions = context_to_functions(context, 2)
        np.testing.assert_array_equal(functions, [[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]])
        np.testing.assert_array_equal(functions_to_context(functions), context)

    def test_context_width_must_divide(self):
        with pytest.raises(DimensionMismatchError):
            context_to_functions(np.zeros(7), 2)

    def test_hist_fn_bank_segments(self, rng):
        values = rng.random((6, KNOTS.size))
        bank = HistFnBank(KNOTS, values, {"hashtag_context": (0, 4), "visual_context": (4, 6)})
        assert bank.fn_count == 6
        np.testing.assert_array_equal(bank.segment("visual_context"), values[4:])
        assert bank.functions()[2].eval(KNOTS[3]) == pytest.approx(values[2, 3])
