import numpy as np
import pytest

from diverse_ensembles.datasets import synthetic_binary
from diverse_ensembles.decorate import (
    DecorateConfig,
    decorate_train,
    evaluate_decorate_cv,
    generate_artificial,
    inverse_label,
    inverse_weights,
    mlp_factory,
)
from diverse_ensembles.errors import ConfigError, EmptyTraining, FactoryFailure


class TestArtificial:
    def test_zero_ratio(self, rng):
        assert generate_artificial(rng.standard_normal((10, 3)), 0.0, rng).shape == (0, 3)

    def test_size(self, rng):
        assert generate_artificial(rng.standard_normal((10, 3)), 0.55, rng).shape == (5, 3)

    def test_constant_column(self, rng):
        X = np.column_stack([np.full(20, 4.2), rng.standard_normal(20)])
        art = generate_artificial(X, 1.0, rng)
        np.testing.assert_allclose(art[:, 0], 4.2, rtol=1e-12)

    def test_moments(self, rng):
        X = rng.standard_normal((400, 2)) * [2.0, 0.5] + [1.0, -3.0]
        art = np.vstack([generate_artificial(X, 1.0, rng) for _ in range(25)])
        n = art.shape[0]
        mu, sd = X.mean(axis=0), X.std(axis=0)
        assert np.all(np.abs(art.mean(axis=0) - mu) <= 3 * sd / np.sqrt(n))
        # std of the sample std is about sd / sqrt(2n)
        assert np.all(np.abs(art.std(axis=0) - sd) <= 3 * sd / np.sqrt(2 * n))

    def test_nominal_laplace(self, rng):
        X = np.array([[0.0], [0.0], [0.0], [1.0]])
        art = generate_artificial(np.repeat(X, 250, axis=0), 1.0, rng, ["nominal"])
        assert set(np.unique(art).tolist()) <= {0.0, 1.0}
        expected = (750 + 1) / (1000 + 2)
        assert np.mean(art == 0.0) == pytest.approx(expected, abs=0.05)

    def test_too_small(self, rng):
        with pytest.raises(EmptyTraining):
            generate_artificial(np.zeros((1, 2)), 1.0, rng)


class TestInverseLabel:
    def test_weights(self):
        np.testing.assert_allclose(inverse_weights([0.9, 0.1], 1e-3), [0.1, 0.9], atol=1e-12)
        np.testing.assert_allclose(inverse_weights([1.0, 0.0], 1e-3), [1e-3 / 1.001, 1 / 1.001])

    def test_uniform(self, rng):
        labels = inverse_label(np.full((30000, 3), 1 / 3), 1e-3, rng)
        np.testing.assert_allclose(np.bincount(labels) / 30000, 1 / 3, atol=0.01)

    def test_frequencies(self, rng):
        labels = inverse_label(np.tile([0.9, 0.1], (20000, 1)), 1e-3, rng)
        assert np.mean(labels == 1) == pytest.approx(0.9, abs=0.01)

    def test_near_certain(self, rng):
        labels = inverse_label(np.tile([1 - 1e-3, 1e-3], (2000, 1)), 1e-3, rng)
        assert np.mean(labels == 1) > 0.99

    def test_single_row(self, rng):
        assert inverse_label([0.5, 0.5], 1e-3, rng) in (0, 1)


def small_factory():
    return mlp_factory([4], epochs=30, learning_rate=0.2, seed=0)


class TestTrain:
    def test_no_iterations(self):
        ds = synthetic_binary(40, 0.5, 3.0, 0)
        model = decorate_train(DecorateConfig(max_iterations=0), small_factory(), ds.X, ds.labels)
        assert len(model.members) == 1

    def test_size_and_monotone_accuracy(self):
        ds = synthetic_binary(60, 0.5, 2.0, 1)
        cfg = DecorateConfig(target_size=5, max_iterations=15, seed=2)
        model = decorate_train(cfg, small_factory(), ds.X, ds.labels)
        assert 1 <= len(model.members) <= 5
        acc = model.accuracy_trace
        assert len(acc) == len(model.members)
        assert all(b >= a for a, b in zip(acc, acc[1:]))

    def test_factory_failure(self):
        ds = synthetic_binary(20, 0.5, 2.0, 1)

        def broken(X, y, n_classes, index):
            raise RuntimeError("boom")

        with pytest.raises(FactoryFailure):
            decorate_train(DecorateConfig(), broken, ds.X, ds.labels)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            DecorateConfig(r_ratio=1.5).validate()
        with pytest.raises(ConfigError):
            DecorateConfig(target_size=0).validate()

    def test_cv(self):
        ds = synthetic_binary(40, 0.5, 6.0, 3)
        cfg = DecorateConfig(target_size=3, max_iterations=4, epochs=40, learning_rate=0.2, hidden=[4])
        res = evaluate_decorate_cv(cfg, ds, k=2)
        assert res.method == "decorate" and len(res.fold_errors) == 2
        assert res.mean_error <= 0.1
        assert res.to_json() == evaluate_decorate_cv(cfg, ds, k=2).to_json()
