import numpy as np
import pytest

from hybridgs.core.errors import DataError, DivergenceError, InsufficientDataError, ShapeError
from hybridgs.models import LatentModel
from hybridgs.schemas.encode_config import LatentConfig
from hybridgs.services.latent_service import (
    decode_latent,
    energy_spectrum,
    fit_latent_decoder,
    latent_loss_and_gradients,
    pca_fit,
    reconstruction_error,
)


def _correlated(n, d, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, d)) @ rng.standard_normal((d, d)) + rng.normal(size=d)


def _squared_error(X, Z, model):
    return float(np.sum((decode_latent(Z, model) - X) ** 2))


# PCA

@pytest.mark.parametrize("q", [1, 3, 16, 47])
def test_pca_error_is_discarded_energy(q):
    X = _correlated(1000, 48)
    pca = pca_fit(X, q)
    assert reconstruction_error(X, pca) == pytest.approx(pca.discarded_energy(), rel=1e-9)


def test_pca_rank_one_is_exact():
    rng = np.random.default_rng(1)
    X = np.outer(rng.normal(size=200), rng.normal(size=6)) + 3.0
    pca = pca_fit(X, 1)
    assert reconstruction_error(X, pca) < 1e-18 * np.sum(X ** 2) + 1e-20


def test_pca_full_rank_is_exact():
    X = _correlated(50, 5)
    assert reconstruction_error(X, pca_fit(X, 5)) < 1e-18 * np.sum(X ** 2)


def test_pca_components_are_orthonormal():
    pca = pca_fit(_correlated(300, 8), 4)
    np.testing.assert_allclose(pca.components.T @ pca.components, np.eye(4), atol=1e-12)


def test_pca_needs_two_rows():
    with pytest.raises(InsufficientDataError):
        pca_fit(np.ones((1, 4)), 1)


def test_pca_rejects_bad_q():
    with pytest.raises(DataError):
        pca_fit(_correlated(10, 4), 5)


# Energy spectrum

def test_spectrum_of_rank_one_data():
    rng = np.random.default_rng(2)
    X = np.outer(rng.normal(size=100), rng.normal(size=5))
    np.testing.assert_allclose(energy_spectrum(X), [1, 0, 0, 0, 0], atol=1e-12)


def test_spectrum_of_white_data_is_flat():
    X = np.random.default_rng(3).standard_normal((10_000, 4))
    spectrum = energy_spectrum(X)
    assert np.all(np.abs(spectrum - 0.25) <= 0.05)


def test_spectrum_sums_to_one():
    spectrum = energy_spectrum(_correlated(40, 48))
    assert spectrum.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(spectrum) <= 0)


def test_spectrum_of_constant_data():
    assert energy_spectrum(np.ones((5, 3))).tolist() == [1.0, 0.0, 0.0]


# Decoder

def _random_model(k, hidden, d, seed=0, activation="relu"):
    rng = np.random.default_rng(seed)
    return LatentModel(
        W1=rng.normal(size=(k, hidden)),
        b1=rng.normal(size=hidden),
        W2=rng.normal(size=(hidden, d)),
        b2=rng.normal(size=d),
        activation=activation,
    )


def test_decode_matches_row_by_row_oracle():
    model = _random_model(3, 7, 5)
    Z = np.random.default_rng(9).normal(size=(20, 3))
    expected = np.empty((20, 5))
    for i, z in enumerate(Z):
        hidden = [max(0.0, sum(z[a] * model.W1[a, h] for a in range(3)) + model.b1[h]) for h in range(7)]
        expected[i] = [sum(hidden[h] * model.W2[h, j] for h in range(7)) + model.b2[j] for j in range(5)]
    np.testing.assert_allclose(decode_latent(Z, model), expected, atol=1e-9)


def test_zero_weights_give_bias_rows():
    model = LatentModel(W1=np.zeros((2, 4)), b1=np.zeros(4), W2=np.zeros((4, 3)), b2=[1.0, -2.0, 0.5])
    out = decode_latent(np.ones((6, 2)), model)
    assert np.array_equal(out, np.tile([1.0, -2.0, 0.5], (6, 1)))


def test_identity_decoder():
    model = LatentModel(W1=np.eye(3), b1=np.zeros(3), W2=np.eye(3), b2=np.zeros(3), activation="identity")
    Z = np.random.default_rng(4).normal(size=(10, 3))
    assert np.array_equal(decode_latent(Z, model), Z)


def test_decode_rejects_wrong_width():
    with pytest.raises(ShapeError):
        decode_latent(np.zeros((4, 2)), _random_model(3, 5, 2))


# Fit

def test_gradients_match_finite_differences():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(10, 4))
    Z = rng.normal(size=(10, 2))
    model = _random_model(2, 6, 4, seed=6)
    _, grads = latent_loss_and_gradients(X, Z, model)

    h = 1e-5
    params = {"W1": model.W1, "b1": model.b1, "W2": model.W2, "b2": model.b2, "Z": Z}
    for name, value in params.items():
        numeric = np.zeros_like(value)
        for idx in np.ndindex(value.shape):
            original = value[idx]
            value[idx] = original + h
            up, _ = latent_loss_and_gradients(X, Z, model)
            value[idx] = original - h
            down, _ = latent_loss_and_gradients(X, Z, model)
            value[idx] = original
            numeric[idx] = (up - down) / (2 * h)
        np.testing.assert_allclose(grads[name], numeric, rtol=1e-4, atol=1e-8, err_msg=name)


@pytest.mark.parametrize("activation", ["relu", "identity"])
def test_zero_epochs_reproduces_pca(activation):
    X = _correlated(200, 12, seed=7)
    Z, model = fit_latent_decoder(X, 3, LatentConfig(epochs=0, activation=activation, seed=0))
    pca = pca_fit(X, 3)
    np.testing.assert_allclose(decode_latent(Z, model), pca.decode(pca.encode(X)), atol=1e-8)


def test_linear_decoder_cannot_beat_pca():
    X = _correlated(300, 10, seed=8)
    Z, model = fit_latent_decoder(X, 2, LatentConfig(epochs=100, activation="identity", hidden=6))
    assert _squared_error(X, Z, model) >= pca_fit(X, 2).discarded_energy() - 1e-6


def test_backtracking_fit_never_ends_above_pca():
    X = _correlated(300, 10, seed=10)
    Z, model = fit_latent_decoder(X, 2, LatentConfig(epochs=100, hidden=8, step_size=0.5, backtracking=True))
    assert _squared_error(X, Z, model) <= pca_fit(X, 2).discarded_energy() * (1 + 1e-9) + 1e-9


def test_fixed_step_divergence_is_reported():
    X = _correlated(100, 6, seed=14) * 100
    config = LatentConfig(epochs=500, activation="identity", hidden=6, step_size=10.0)
    with pytest.raises(DivergenceError, match="smaller step_size"):
        fit_latent_decoder(X, 2, config)


def test_backtracking_recovers_from_oversized_step():
    X = _correlated(100, 6, seed=14) * 100
    config = LatentConfig(epochs=500, activation="identity", hidden=6, step_size=10.0, backtracking=True)
    Z, model = fit_latent_decoder(X, 2, config)
    assert np.isfinite(_squared_error(X, Z, model))
    assert _squared_error(X, Z, model) <= pca_fit(X, 2).discarded_energy() * (1 + 1e-9) + 1e-9


def test_fit_recovers_exact_low_rank_data():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(200, 3)) @ rng.normal(size=(3, 9)) + 2.0
    Z, model = fit_latent_decoder(X, 3, LatentConfig(epochs=50, activation="identity", hidden=5))
    assert _squared_error(X, Z, model) <= 1e-3 * np.sum((X - X.mean(axis=0)) ** 2)


def test_full_width_fit_is_lossless():
    X = _correlated(100, 4, seed=12)
    Z, model = fit_latent_decoder(X, 4, LatentConfig(epochs=20, activation="identity", hidden=4))
    assert _squared_error(X, Z, model) <= 1e-6


def test_fit_is_deterministic():
    X = _correlated(150, 6, seed=13)
    config = LatentConfig(epochs=30, hidden=10, seed=42)
    Z1, m1 = fit_latent_decoder(X, 2, config)
    Z2, m2 = fit_latent_decoder(X, 2, config)
    assert np.array_equal(Z1, Z2)
    assert m1.equals(m2)


def test_fit_rejects_wide_latent():
    with pytest.raises(DataError):
        fit_latent_decoder(np.ones((2, 5)), 3, LatentConfig(epochs=0))


def test_fit_rejects_narrow_hidden_layer():
    with pytest.raises(DataError):
        fit_latent_decoder(_correlated(20, 5), 4, LatentConfig(epochs=0, hidden=3))


def test_rounded_model_is_float32_exact():
    model = _random_model(2, 5, 3).rounded_to_float32()
    for weights in model.parameters():
        assert np.array_equal(weights, weights.astype(np.float32).astype(np.float64))
