import numpy as np
import pytest

import xnn
from xnn.errors import ModelParseError, ValidationError


def trained_like_model(seed=7):
    model = xnn.init_model(
        xnn.XnnConfig(input_dim=3, num_subnets=4, subnet_hidden=(5, 2), seed=seed)
    )
    model.mu = -0.731234567890123456
    model.standardization = xnn.StandardizationParams(
        means=np.array([0.1, -2.0, 3.5]),
        stds=np.array([1.1, 0.9, 2.2]),
        response_mean=0.25,
        response_std=1.75,
    )
    return model


class TestRoundTrip:
    def test_predictions_preserved(self, tmp_path):
        model = trained_like_model()
        path = tmp_path / "model.xnn"
        xnn.save_model(model, path)
        loaded = xnn.load_model(path)
        X = xnn.SeededRng(3).uniform(-2, 2, (20, 3))
        np.testing.assert_allclose(
            xnn.predict_batch(loaded, X), xnn.predict_batch(model, X), rtol=0, atol=1e-12
        )

    def test_parameters_exact(self, tmp_path):
        model = trained_like_model()
        path = tmp_path / "model.xnn"
        xnn.save_model(model, path)
        loaded = xnn.load_model(path)
        assert loaded.mu == model.mu
        np.testing.assert_array_equal(loaded.betas, model.betas)
        np.testing.assert_array_equal(loaded.gammas, model.gammas)
        for a, b in zip(loaded.weights, model.weights):
            np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(loaded.standardization.means, model.standardization.means)
        assert loaded.standardization.response_std == model.standardization.response_std
        assert loaded.config == model.config

    def test_save_is_deterministic(self, tmp_path):
        model = trained_like_model()
        a, b = tmp_path / "a.xnn", tmp_path / "b.xnn"
        xnn.save_model(model, a)
        xnn.save_model(model, b)
        assert a.read_bytes() == b.read_bytes()

    def test_without_standardization(self, tmp_path):
        model = xnn.init_model(xnn.XnnConfig(input_dim=2, num_subnets=1, subnet_hidden=(), seed=0))
        path = tmp_path / "m.xnn"
        xnn.save_model(model, path)
        assert xnn.load_model(path).standardization is None

    def test_empty_hidden_round_trip(self, tmp_path):
        model = xnn.init_model(xnn.XnnConfig(input_dim=2, num_subnets=3, subnet_hidden=(), seed=4))
        path = tmp_path / "m.xnn"
        xnn.save_model(model, path)
        loaded = xnn.load_model(path)
        assert loaded.config.subnet_hidden == ()


class TestParseErrors:
    def test_truncated_file(self, tmp_path):
        model = trained_like_model()
        path = tmp_path / "model.xnn"
        xnn.save_model(model, path)
        text = path.read_text().splitlines()
        truncated = tmp_path / "broken.xnn"
        truncated.write_text("\n".join(text[: len(text) // 2]) + "\n")
        with pytest.raises(ModelParseError):
            xnn.load_model(truncated)

    def test_wrong_schema(self, tmp_path):
        path = tmp_path / "bad.xnn"
        path.write_text("xnn/2\n")
        with pytest.raises(ModelParseError, match="schema"):
            xnn.load_model(path)

    def test_gamma_count_mismatch_names_gammas(self, tmp_path):
        model = xnn.init_model(xnn.XnnConfig(input_dim=2, num_subnets=3, subnet_hidden=(2,), seed=1))
        path = tmp_path / "model.xnn"
        xnn.save_model(model, path)
        lines = path.read_text().splitlines()
        idx = next(i for i, line in enumerate(lines) if line.startswith("gammas "))
        lines[idx] = "gammas 4"
        lines[idx + 1] = lines[idx + 1] + " 1.0e+00"
        bad = tmp_path / "bad.xnn"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises((ModelParseError, ValidationError), match="gammas"):
            xnn.load_model(bad)

    def test_non_numeric_value(self, tmp_path):
        model = trained_like_model()
        path = tmp_path / "model.xnn"
        xnn.save_model(model, path)
        text = path.read_text().replace("mu ", "mu x", 1)
        bad = tmp_path / "bad.xnn"
        bad.write_text(text)
        with pytest.raises(ModelParseError, match="mu"):
            xnn.load_model(bad)

    def test_no_partial_model_on_error(self, tmp_path):
        bad = tmp_path / "bad.xnn"
        bad.write_text("xnn/1\ninput_dim 2\n")
        with pytest.raises(ModelParseError):
            xnn.load_model(bad)
