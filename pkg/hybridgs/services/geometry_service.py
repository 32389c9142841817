"""
Position-channel preprocessing: outlier removal, lattice normalization and
basis/coding-vector decomposition of integer positions.
"""
import logging

import numpy as np
from scipy.spatial import cKDTree

from hybridgs.core.errors import DegenerateCloudError, InsufficientPointsError, RangeError
from hybridgs.models import Camera, CameraList, CodingMatrix, GaussianCloud
from hybridgs.schemas.geometry import NormalizationTransform

logger = logging.getLogger(__name__)


def remove_outliers(
    cloud: GaussianCloud,
    nb_neighbors: int = 50,
    std_ratio: float = 2.0,
) -> tuple[GaussianCloud, np.ndarray]:
    """
    Statistical outlier removal.

    For each point, d_i is the mean distance to its nb_neighbors nearest
    neighbors (itself excluded). Points with d_i > mean(d) + std_ratio * std(d)
    are dropped together with their attributes.

    Args:
        cloud: Input cloud
        nb_neighbors: Neighborhood size
        std_ratio: Threshold in standard deviations (population std)

    Returns:
        (filtered cloud, sorted indices of removed primitives)

    Raises:
        InsufficientPointsError: If n <= nb_neighbors
    """
    n = cloud.n
    if n <= nb_neighbors:
        raise InsufficientPointsError(
            f"outlier removal needs more than {nb_neighbors} points, got {n}"
        )

    tree = cKDTree(cloud.positions)
    dists, _ = tree.query(cloud.positions, k=nb_neighbors + 1)
    # Column 0 is the point itself (or a coincident duplicate, also at distance 0)
    mean_dist = dists[:, 1:].mean(axis=1)
    threshold = mean_dist.mean() + std_ratio * mean_dist.std()

    removed = np.flatnonzero(mean_dist > threshold)
    keep = np.ones(n, dtype=bool)
    keep[removed] = False
    logger.info(f"[GEOMETRY] Outlier removal dropped {removed.size} of {n} primitives")
    return cloud.select(keep), removed


def normalize(cloud: GaussianCloud, N: int) -> tuple[GaussianCloud, NormalizationTransform]:
    """
    Translate the scene to its bounding-box center and scale it to fill the
    signed N-bit lattice.

    positions' = k (positions - C), k = (2^(N-1) - 1)/pc_max. Log-scales grow by
    ln k, which is Sigma' = k^2 Sigma for every covariance. Rotation, opacity
    and color are unchanged.

    Raises:
        DegenerateCloudError: If all positions coincide
    """
    pos = cloud.positions
    center = (pos.max(axis=0) + pos.min(axis=0)) / 2
    centered = pos - center
    pc_max = float(np.abs(centered).max())
    if pc_max == 0:
        raise DegenerateCloudError("all positions coincide; cannot scale to the lattice")

    transform = NormalizationTransform(
        center=tuple(float(c) for c in center),
        scale=((1 << (N - 1)) - 1) / pc_max,
        bit_depth=N,
    )
    k = transform.scale
    return cloud.replace(positions=k * centered, scale=cloud.scale + np.log(k)), transform


def denormalize(cloud: GaussianCloud, transform: NormalizationTransform) -> GaussianCloud:
    """Inverse of normalize: positions / k + C, log-scale - ln k."""
    k = transform.scale
    return cloud.replace(
        positions=cloud.positions / k + np.asarray(transform.center),
        scale=cloud.scale - np.log(k),
    )


def adjust_cameras(cams: CameraList, transform: NormalizationTransform) -> CameraList:
    """Move camera centers into the normalized frame: center' = k (center - C)."""
    C = np.asarray(transform.center)
    return CameraList(
        entries=[
            Camera(id=cam.id, center=transform.scale * (cam.center - C), rotation=cam.rotation.copy())
            for cam in cams
        ]
    )


def round_positions(positions: np.ndarray) -> np.ndarray:
    """Round half away from zero, symmetric about the origin."""
    p = np.asarray(positions, dtype=np.float64)
    return (np.sign(p) * np.floor(np.abs(p) + 0.5)).astype(np.int64)


def coding_basis(N: int) -> np.ndarray:
    """e = [2^(N-2), ..., 4, 2, 1]"""
    return (1 << np.arange(N - 2, -1, -1)).astype(np.int64)


def decompose_positions(int_positions: np.ndarray, N: int) -> CodingMatrix:
    """
    Canonical coding vectors: t = sign(v) * binary digits of |v| against e.

    Raises:
        RangeError: If a coordinate lies outside [-(2^(N-1) - 1), 2^(N-1) - 1]
    """
    v = np.asarray(int_positions, dtype=np.int64)
    limit = (1 << (N - 1)) - 1
    bad = np.abs(v) > limit
    if bad.any():
        row = int(np.argwhere(bad)[0][0])
        raise RangeError(f"coordinate at primitive {row} outside [-{limit}, {limit}]")

    basis = coding_basis(N)
    magnitude = np.abs(v)[..., None]
    bits = (magnitude // basis) & 1
    digits = (np.sign(v)[..., None] * bits).astype(np.int8)
    return CodingMatrix(digits=digits, basis=basis)


def recompose_positions(m: CodingMatrix) -> np.ndarray:
    """Inner product of every coding vector with the basis."""
    return np.asarray(m.digits, dtype=np.int64) @ m.basis
