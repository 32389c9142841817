import itertools

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from hybridgs.core.errors import DegenerateCloudError, InsufficientPointsError, RangeError
from hybridgs.models import Camera, CameraList, CodingMatrix, GaussianCloud
from hybridgs.schemas.geometry import NormalizationTransform
from hybridgs.services.geometry_service import (
    adjust_cameras,
    coding_basis,
    decompose_positions,
    denormalize,
    normalize,
    recompose_positions,
    remove_outliers,
    round_positions,
)
from tests.helpers import make_cloud


def _cloud_at(positions, scale=None) -> GaussianCloud:
    positions = np.asarray(positions, dtype=np.float64)
    n = positions.shape[0]
    return GaussianCloud.from_color(
        positions=positions,
        color=np.zeros((n, 48)),
        opacity=np.zeros(n),
        scale=np.zeros((n, 3)) if scale is None else scale,
        rotation=np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)),
    )


def _brute_force_outliers(positions, nb, ratio):
    d = cdist(positions, positions)
    d.sort(axis=1)
    mean_dist = d[:, 1:nb + 1].mean(axis=1)
    return np.flatnonzero(mean_dist > mean_dist.mean() + ratio * mean_dist.std())


GRID = np.array(list(itertools.product(range(4), repeat=3)), dtype=np.float64)


# Outlier removal

def test_far_point_is_removed():
    positions = np.vstack([GRID, [[100.0, 100.0, 100.0]]])
    filtered, removed = remove_outliers(_cloud_at(positions), nb_neighbors=5, std_ratio=2.0)
    assert removed.tolist() == [64]
    assert filtered.n == 64


def test_symmetric_cloud_keeps_everything():
    corners = 2.0 * np.array(list(itertools.product(range(2), repeat=3)), dtype=np.float64)
    _, removed = remove_outliers(_cloud_at(corners), nb_neighbors=3, std_ratio=2.0)
    assert removed.size == 0


def test_twin_far_points_match_oracle():
    positions = np.vstack([GRID, [[50.0, 50.0, 50.0], [50.0, 50.0, 50.0]]])
    _, removed = remove_outliers(_cloud_at(positions), nb_neighbors=5, std_ratio=2.0)
    expected = _brute_force_outliers(positions, 5, 2.0)
    assert removed.tolist() == expected.tolist()


def test_random_cloud_matches_oracle():
    positions = np.random.default_rng(2).normal(size=(300, 3))
    _, removed = remove_outliers(_cloud_at(positions), nb_neighbors=10, std_ratio=1.0)
    assert removed.tolist() == _brute_force_outliers(positions, 10, 1.0).tolist()


def test_outliers_need_enough_points():
    with pytest.raises(InsufficientPointsError):
        remove_outliers(_cloud_at(GRID[:5]), nb_neighbors=5)


# Normalization

def test_normalize_two_points():
    cloud, t = normalize(_cloud_at([[-1, -1, -1], [3, 3, 3]]), 4)
    assert t.center == (1.0, 1.0, 1.0)
    assert t.scale == pytest.approx(3.5)
    np.testing.assert_allclose(cloud.positions, [[-7, -7, -7], [7, 7, 7]])
    np.testing.assert_allclose(cloud.scale, np.full((2, 3), np.log(3.5)))


def test_normalize_identity_when_filled():
    cloud, t = normalize(_cloud_at([[-7, 0, 2], [7, -3, -2]]), 4)
    assert t.scale == pytest.approx(1.0)
    np.testing.assert_allclose(cloud.positions, [[-7, 1.5, 2], [7, -1.5, -2]])


def test_normalize_is_idempotent():
    once, _ = normalize(make_cloud(200), 12)
    _, second = normalize(once, 12)
    assert second.scale == pytest.approx(1.0, abs=1e-9)


def test_normalize_degenerate_cloud():
    with pytest.raises(DegenerateCloudError):
        normalize(_cloud_at([[1, 2, 3], [1, 2, 3]]), 8)


def test_denormalize_inverts_normalize():
    original = make_cloud(100)
    cloud, t = normalize(original, 16)
    restored = denormalize(cloud, t)
    np.testing.assert_allclose(restored.positions, original.positions, atol=1e-12)
    np.testing.assert_allclose(restored.scale, original.scale, atol=1e-12)


def _gaussian_density(x, mu, cov):
    diff = x - mu
    inv = np.linalg.inv(cov)
    norm = np.sqrt((2 * np.pi) ** 3 * np.linalg.det(cov))
    return np.exp(-0.5 * diff @ inv @ diff) / norm


def test_density_invariant_under_scaling():
    rng = np.random.default_rng(11)
    for _ in range(100):
        k = rng.uniform(0.5, 20.0)
        mu = rng.normal(size=3)
        A = rng.normal(size=(3, 3))
        cov = A @ A.T + 0.5 * np.eye(3)
        x = mu + rng.normal(size=3)
        original = _gaussian_density(x, mu, cov)
        scaled = _gaussian_density(k * x, k * mu, k * k * cov) * k ** 3
        assert scaled == pytest.approx(original, abs=1e-12)


def test_log_scale_shift_is_covariance_scaling():
    cloud = make_cloud(10)
    scaled, t = normalize(cloud, 10)
    np.testing.assert_allclose(np.exp(scaled.scale) ** 2, (t.scale * np.exp(cloud.scale)) ** 2, rtol=1e-12)


# Cameras

def test_adjust_cameras():
    t = NormalizationTransform(center=(1.0, 1.0, 1.0), scale=3.5, bit_depth=4)
    cams = CameraList(entries=[
        Camera(id=0, center=[1, 1, 1], rotation=np.eye(3)),
        Camera(id=1, center=[2, 1, 1], rotation=np.eye(3)),
    ])
    moved = adjust_cameras(cams, t)
    np.testing.assert_allclose(moved.entries[0].center, [0, 0, 0])
    np.testing.assert_allclose(moved.entries[1].center, [3.5, 0, 0])
    assert np.array_equal(moved.entries[1].rotation, np.eye(3))


def test_adjust_cameras_identity():
    t = NormalizationTransform(center=(0.0, 0.0, 0.0), scale=1.0, bit_depth=4)
    cams = CameraList(entries=[Camera(id=4, center=[0.3, -2, 5], rotation=np.eye(3))])
    assert np.array_equal(adjust_cameras(cams, t).entries[0].center, cams.entries[0].center)


# Rounding and coding vectors

def test_round_half_away_from_zero():
    assert round_positions(np.array([[0.5, -0.5, 1.49], [-2.5, 2.5, 0.0]])).tolist() == [[1, -1, 1], [-3, 3, 0]]


def test_basis():
    assert coding_basis(4).tolist() == [4, 2, 1]


def test_decompose_examples():
    m = decompose_positions(np.array([[0, 5, -3]]), 4)
    assert m.digits[0].tolist() == [[0, 0, 0], [1, 0, 1], [0, -1, -1]]
    assert recompose_positions(m).tolist() == [[0, 5, -3]]


def test_recompose_zero_digits():
    m = CodingMatrix(digits=np.zeros((2, 3, 5), dtype=np.int8), basis=coding_basis(6))
    assert not recompose_positions(m).any()


@pytest.mark.parametrize("N", range(2, 9))
def test_decompose_exhaustive(N):
    limit = (1 << (N - 1)) - 1
    values = np.arange(-limit, limit + 1)
    positions = np.stack([values, values[::-1], np.zeros_like(values)], axis=1)
    m = decompose_positions(positions, N)
    assert set(np.unique(m.digits)) <= {-1, 0, 1}
    assert np.array_equal(recompose_positions(m), positions)


@pytest.mark.parametrize("N", [16, 18])
def test_decompose_random(N):
    limit = (1 << (N - 1)) - 1
    positions = np.random.default_rng(N).integers(-limit, limit + 1, size=(100_000, 3))
    assert np.array_equal(recompose_positions(decompose_positions(positions, N)), positions)


def test_decompose_out_of_range():
    with pytest.raises(RangeError):
        decompose_positions(np.array([[8, 0, 0]]), 4)
