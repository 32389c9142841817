"""
Synthetic 3DGS clouds and fast encode options shared by the suites.
"""
import numpy as np

from hybridgs.models import GaussianCloud
from hybridgs.services.octree_service import morton_decode
from hybridgs.schemas.encode_config import EncodeConfig, LatentConfig


def make_cloud(n: int, seed: int = 0, extent: float = 5.0) -> GaussianCloud:
    """
    Random cloud whose values are exactly representable in float32, so a
    PLY round trip is bit-exact.
    """
    rng = np.random.default_rng(seed)
    f32 = lambda a: a.astype(np.float32).astype(np.float64)  # noqa: E731
    # Color lives near a low-dimensional subspace, like trained SH coefficients
    basis = rng.standard_normal((3, 48))
    color = rng.standard_normal((n, 3)) @ basis + 0.01 * rng.standard_normal((n, 48))
    return GaussianCloud.from_color(
        positions=f32(rng.uniform(-extent, extent, (n, 3))),
        color=f32(color),
        opacity=f32(rng.normal(0.0, 2.0, (n, 1))),
        scale=f32(rng.normal(-3.0, 0.5, (n, 3))),
        rotation=f32(rng.standard_normal((n, 4))),
    )


def make_config(**overrides) -> EncodeConfig:
    """Fast encode options for tests: no outlier pass, PCA-initialized latents."""
    values = dict(
        input="scene.ply",
        output="scene.hgs",
        bd=12,
        outlier=False,
        latent=LatentConfig(epochs=0, seed=0),
        workers=1,
    )
    values.update(overrides)
    return EncodeConfig(**values)




def random_voxels(n: int, N: int, seed: int = 0) -> np.ndarray:
    """n distinct voxels in [0, 2^N - 1]^3, in random order."""
    rng = np.random.default_rng(seed)
    if N <= 6:
        codes = rng.choice(1 << (3 * N), size=n, replace=False)
        return morton_decode(codes.astype(np.uint64), N)
    voxels = np.unique(rng.integers(0, 1 << N, size=(int(n * 1.1), 3)), axis=0)
    return voxels[rng.permutation(voxels.shape[0])[:n]]
