"""
Integerized primitive set: the codec's canonical intermediate.
"""
from dataclasses import dataclass, fields

import numpy as np

from hybridgs.core.errors import ShapeError


@dataclass
class CompactCloud:
    """
    Unique-position primitives whose attribute channels are quantization codes.

    Attributes:
        positions: n x 3 signed integer lattice coordinates
        color_latent: n x k_c codes of the shared DC+SH latent
        opacity: n x 1 codes
        scale: n x 3 codes
        rotation_latent: n x k_r codes of the rotation latent
    """
    positions: np.ndarray
    color_latent: np.ndarray
    opacity: np.ndarray
    scale: np.ndarray
    rotation_latent: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            value = np.asarray(getattr(self, f.name), dtype=np.int64)
            if value.ndim == 1:
                value = value.reshape(-1, 1)
            setattr(self, f.name, value)
        n = self.positions.shape[0]
        if self.positions.shape != (n, 3):
            raise ShapeError(f"positions: expected (n, 3), got {self.positions.shape}")
        for f in fields(self):
            if getattr(self, f.name).shape[0] != n:
                raise ShapeError(f"{f.name}: expected {n} rows, got {getattr(self, f.name).shape[0]}")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def k_c(self) -> int:
        return self.color_latent.shape[1]

    @property
    def k_r(self) -> int:
        return self.rotation_latent.shape[1]

    def attribute_channels(self) -> np.ndarray:
        """
        All attribute code columns in substream order:
        color latents, opacity, scale, rotation latents.
        """
        return np.concatenate(
            [self.color_latent, self.opacity, self.scale, self.rotation_latent], axis=1
        )

    @classmethod
    def from_channels(cls, positions: np.ndarray, channels: np.ndarray, k_c: int, k_r: int) -> "CompactCloud":
        """Inverse of attribute_channels()."""
        channels = np.asarray(channels, dtype=np.int64)
        if channels.shape[1] != k_c + 1 + 3 + k_r:
            raise ShapeError(
                f"channels: expected {k_c + 1 + 3 + k_r} columns, got {channels.shape[1]}"
            )
        return cls(
            positions=positions,
            color_latent=channels[:, :k_c],
            opacity=channels[:, k_c:k_c + 1],
            scale=channels[:, k_c + 1:k_c + 4],
            rotation_latent=channels[:, k_c + 4:],
        )

    def select(self, index: np.ndarray) -> "CompactCloud":
        return CompactCloud(**{f.name: getattr(self, f.name)[index] for f in fields(self)})

    def equals(self, other: "CompactCloud") -> bool:
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))
