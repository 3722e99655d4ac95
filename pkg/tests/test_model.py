import numpy as np
import pytest

import xnn
from xnn.errors import ValidationError
from xnn.model import _forward_batch, param_items

from helpers import (
    finite_diff_gradients,
    grad_close,
    grads_by_name,
    loop_forward,
    loop_subnet,
)


def small_model(p=5, k=5, hidden=(12, 6), seed=7):
    return xnn.init_model(xnn.XnnConfig(input_dim=p, num_subnets=k, subnet_hidden=hidden, seed=seed))


def identity_subnet_model(beta, gamma=1.0, mu=0.0):
    """K=1 model whose single subnetwork is the identity map (one linear layer)."""
    beta = np.asarray(beta, dtype=float)
    cfg = xnn.XnnConfig(input_dim=beta.size, num_subnets=1, subnet_hidden=(), seed=0)
    model = xnn.init_model(cfg)
    model.mu = mu
    model.betas[0] = beta
    model.weights[0][0, 0, 0] = 1.0
    model.biases[0][0, 0] = 0.0
    model.gammas[0] = gamma
    return model


class TestConfig:
    def test_rejects_bad_dims(self):
        with pytest.raises(ValidationError):
            xnn.XnnConfig(input_dim=0, num_subnets=3)
        with pytest.raises(ValidationError):
            xnn.XnnConfig(input_dim=3, num_subnets=0)
        with pytest.raises(ValidationError):
            xnn.XnnConfig(input_dim=3, num_subnets=3, subnet_hidden=(4, 0))

    def test_rejects_unknown_activation(self):
        with pytest.raises(ValidationError):
            xnn.XnnConfig(input_dim=3, num_subnets=3, activation="relu")


class TestInit:
    def test_shapes(self):
        model = small_model(p=5, k=5, hidden=(12, 6), seed=7)
        assert model.betas.shape == (5, 5)
        assert model.gammas.shape == (5,)
        assert [w.shape for w in model.weights] == [(5, 12, 1), (5, 6, 12), (5, 1, 6)]
        assert [b.shape for b in model.biases] == [(5, 12), (5, 6), (5, 1)]
        subnets = model.subnets
        assert len(subnets) == 5
        assert [l.weights.shape for l in subnets[0].layers] == [(12, 1), (6, 12), (1, 6)]
        assert [l.activation for l in subnets[0].layers] == ["tanh", "tanh", "linear"]

    def test_deterministic(self):
        a = small_model(seed=123)
        b = small_model(seed=123)
        np.testing.assert_array_equal(a.betas, b.betas)
        np.testing.assert_array_equal(a.gammas, b.gammas)
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_projection_bound(self):
        model = small_model(p=6, k=20, hidden=(25, 10), seed=1)
        assert np.all(np.abs(model.betas) <= 1.0 / np.sqrt(6))

    def test_fan_scaled_weight_bounds_and_zero_biases(self):
        model = small_model(p=4, k=3, hidden=(8, 5), seed=9)
        for (in_dim, out_dim), w, b in zip(model.config.layer_sizes, model.weights, model.biases):
            limit = np.sqrt(6.0 / (in_dim + out_dim))
            assert np.all(np.abs(w) <= limit)
            assert np.all(b == 0.0)
        assert model.mu == 0.0
        assert np.all(np.abs(model.gammas) <= 0.5)


class TestForward:
    def test_zero_gammas_returns_mu(self):
        model = small_model()
        model.gammas[:] = 0.0
        model.mu = 3.25
        y, _ = xnn.forward(model, np.array([0.4, -1.0, 2.0, 0.0, 5.0]))
        assert y == 3.25

    def test_identity_subnet_composition(self):
        model = identity_subnet_model(beta=[1.0, 0.0], gamma=2.0, mu=0.0)
        y, _ = xnn.forward(model, np.array([0.3, 9.0]))
        assert abs(y - 0.6) < 1e-15

    def test_matches_loop_oracle(self):
        model = small_model(seed=7)
        x = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
        y, _ = xnn.forward(model, x)
        assert abs(y - loop_forward(model, x)) < 1e-12

    def test_dimension_mismatch(self):
        model = small_model()
        with pytest.raises(ValidationError):
            xnn.forward(model, np.zeros(4))

    def test_structural_faithfulness_random_points(self):
        model = small_model(p=3, k=4, hidden=(5,), seed=21)
        rng = xnn.SeededRng(5)
        for x in rng.uniform(-2, 2, (20, 3)):
            y, _ = xnn.forward(model, x)
            assert abs(y - loop_forward(model, x)) < 1e-12

    def test_subnetwork_isolation(self):
        model = small_model(seed=31)
        rng = xnn.SeededRng(6)
        X = rng.uniform(-1.5, 1.5, (10, 5))
        for k in range(model.num_subnets):
            ablated = model.copy()
            ablated.gammas[k] = 0.0
            for x in X:
                full, _ = xnn.forward(model, x)
                rest, _ = xnn.forward(ablated, x)
                contribution = model.gammas[k] * loop_subnet(model, k, float(model.betas[k] @ x))
                assert abs(full - rest - contribution) < 1e-12


class TestPredictBatch:
    def test_empty_input(self):
        model = small_model()
        out = xnn.predict_batch(model, np.zeros((0, 5)))
        assert out.shape == (0,)

    def test_duplicate_rows_equal_outputs(self):
        model = small_model()
        row = np.array([0.3, -0.2, 0.9, 0.0, -1.1])
        out = xnn.predict_batch(model, np.stack([row, row, row]))
        assert out[0] == out[1] == out[2]

    def test_matches_per_row_forward(self):
        model = small_model(seed=17)
        X = xnn.SeededRng(8).uniform(-1, 1, (12, 5))
        batch = xnn.predict_batch(model, X)
        single = np.array([xnn.forward(model, x)[0] for x in X])
        np.testing.assert_allclose(batch, single, rtol=0, atol=1e-12)

    def test_raw_units_requires_standardization(self):
        model = small_model()
        with pytest.raises(ValidationError):
            xnn.predict_batch(model, np.zeros((2, 5)), raw_units=True)

    def test_raw_units_round_trip(self):
        model = small_model()
        model.standardization = xnn.StandardizationParams(
            means=np.arange(5.0), stds=np.full(5, 2.0), response_mean=1.5, response_std=3.0
        )
        X_raw = xnn.SeededRng(4).uniform(-1, 1, (6, 5))
        expected = model.standardization.invert_response(
            xnn.predict_batch(model, model.standardization.transform_features(X_raw))
        )
        np.testing.assert_allclose(
            xnn.predict_batch(model, X_raw, raw_units=True), expected, atol=1e-12
        )


class TestGradient:
    def test_zero_residual_zero_gamma_gradients(self):
        model = small_model()
        model.gammas[:] = 0.0
        model.mu = 0.0
        X = xnn.SeededRng(3).uniform(-1, 1, (6, 5))
        y = np.zeros(6)
        loss, grads = xnn.gradient(model, X, y)
        assert loss == 0.0
        np.testing.assert_array_equal(grads.d_gammas, np.zeros(5))
        assert grads.d_mu == 0.0

    def test_hand_computed_single_sample(self):
        model = identity_subnet_model(beta=[1.0, 0.0], gamma=1.0, mu=0.0)
        loss, grads = xnn.gradient(model, np.array([[1.0, 0.0]]), np.array([0.0]))
        assert abs(loss - 1.0) < 1e-15
        assert abs(grads.d_mu - 2.0) < 1e-15
        assert abs(grads.d_gammas[0] - 2.0) < 1e-15

    @pytest.mark.parametrize("p,k,hidden", [(5, 5, (12, 6)), (2, 1, (4,)), (3, 2, ())])
    def test_matches_finite_differences(self, p, k, hidden):
        model = small_model(p=p, k=k, hidden=hidden, seed=p * 10 + k)
        rng = xnn.SeededRng(p + k)
        X = rng.uniform(-1, 1, (8, p))
        y = rng.uniform(-1, 1, 8)
        loss, grads = xnn.gradient(model, X, y)
        fd_mu, fd = finite_diff_gradients(model, X, y)
        assert grad_close(np.array(grads.d_mu), np.array(fd_mu))
        analytic = grads_by_name(grads)
        for name in fd:
            assert grad_close(analytic[name], fd[name]), name

    def test_batch_shape_mismatch(self):
        model = small_model()
        with pytest.raises(ValidationError):
            xnn.gradient(model, np.zeros((3, 5)), np.zeros(4))


class TestInputPartials:
    def test_zero_gammas(self):
        model = small_model()
        model.gammas[:] = 0.0
        np.testing.assert_array_equal(
            xnn.input_partials(model, np.zeros(5)), np.zeros(5)
        )

    def test_identity_subnet_linear_case(self):
        beta = np.array([0.7, -0.4, 0.1])
        model = identity_subnet_model(beta=beta, gamma=2.5)
        np.testing.assert_allclose(
            xnn.input_partials(model, np.array([0.2, 0.8, -0.5])), 2.5 * beta, atol=1e-14
        )

    def test_matches_finite_differences(self):
        model = small_model(seed=77)
        x = xnn.SeededRng(12).uniform(-1, 1, 5)
        analytic = xnn.input_partials(model, x)
        step = 1e-5
        numeric = np.zeros(5)
        for j in range(5):
            xp, xm = x.copy(), x.copy()
            xp[j] += step
            xm[j] -= step
            numeric[j] = (loop_forward(model, xp) - loop_forward(model, xm)) / (2 * step)
        assert grad_close(analytic, numeric)


class TestEvalSubnet:
    def test_matches_loop(self):
        model = small_model(seed=5)
        grid = np.linspace(-2, 2, 9)
        for k in range(model.num_subnets):
            fast = xnn.eval_subnet(model, k, grid)
            slow = np.array([loop_subnet(model, k, t) for t in grid])
            np.testing.assert_allclose(fast, slow, atol=1e-12)

    def test_index_out_of_range(self):
        with pytest.raises(ValidationError):
            xnn.eval_subnet(small_model(), 5, np.zeros(3))


class TestValidation:
    def test_catches_shape_mismatch(self):
        model = small_model()
        model.gammas = np.zeros(4)
        with pytest.raises(ValidationError, match="gammas"):
            xnn.validate_model(model)

    def test_catches_non_finite(self):
        model = small_model()
        model.betas[0, 0] = np.nan
        with pytest.raises(ValidationError, match="betas"):
            xnn.validate_model(model)

    def test_forward_batch_guards_columns(self):
        model = small_model()
        with pytest.raises(ValidationError):
            _forward_batch(model, np.zeros((3, 4)))

    def test_param_items_covers_everything(self):
        model = small_model(hidden=(3, 2))
        names = [name for name, _ in param_items(model)]
        assert names == [
            "betas", "gammas",
            "weights[0]", "biases[0]",
            "weights[1]", "biases[1]",
            "weights[2]", "biases[2]",
        ]
