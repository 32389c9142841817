"""
Floating-point 3D Gaussian Splatting primitive set.
"""
from dataclasses import dataclass, fields

import numpy as np

from hybridgs.core.errors import DataError, ShapeError

# Community 3DGS PLY channel layout: name -> width
CHANNEL_WIDTHS = {
    "positions": 3,
    "color_dc": 3,
    "color_sh": 45,
    "opacity": 1,
    "scale": 3,
    "rotation": 4,
}

# Attribute channels exclude positions: 3 + 45 + 1 + 3 + 4 = 56
ATTRIBUTE_CHANNELS = 56


@dataclass
class GaussianCloud:
    """
    Set of n Gaussian primitives in stored (pre-activation) form.

    Attributes:
        positions: n x 3 scene-unit centers
        color_dc: n x 3 SH degree-0 color
        color_sh: n x 45 higher-order SH coefficients
        opacity: n x 1 opacity logit
        scale: n x 3 log-scale
        rotation: n x 4 unnormalized quaternion (w, x, y, z)
    """
    positions: np.ndarray
    color_dc: np.ndarray
    color_sh: np.ndarray
    opacity: np.ndarray
    scale: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            value = np.asarray(getattr(self, f.name), dtype=np.float64)
            if value.ndim == 1 and CHANNEL_WIDTHS[f.name] == 1:
                value = value.reshape(-1, 1)
            setattr(self, f.name, value)
        self.validate()

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def validate(self) -> None:
        """
        Check shapes and finiteness.

        Raises:
            ShapeError: If a channel has the wrong width or row count
            DataError: If the cloud is empty or holds NaN/Inf
        """
        n = self.positions.shape[0] if self.positions.ndim == 2 else -1
        if n < 1:
            raise DataError("cloud must contain at least one primitive")
        for name, width in CHANNEL_WIDTHS.items():
            value = getattr(self, name)
            if value.ndim != 2 or value.shape != (n, width):
                raise ShapeError(f"{name}: expected shape ({n}, {width}), got {value.shape}")
            bad = ~np.isfinite(value)
            if bad.any():
                row = int(np.argwhere(bad)[0][0])
                raise DataError(f"{name}: non-finite value at primitive {row}")

    def select(self, index: np.ndarray) -> "GaussianCloud":
        """Return the primitives at `index` (boolean mask or integer indices), all channels in lockstep."""
        return GaussianCloud(**{name: getattr(self, name)[index] for name in CHANNEL_WIDTHS})

    def replace(self, **channels: np.ndarray) -> "GaussianCloud":
        """Return a copy with some channels swapped out."""
        values = {name: getattr(self, name) for name in CHANNEL_WIDTHS}
        values.update(channels)
        return GaussianCloud(**values)

    def color(self) -> np.ndarray:
        """DC and SH coefficients side by side (n x 48); they share one latent."""
        return np.concatenate([self.color_dc, self.color_sh], axis=1)

    def attributes(self) -> np.ndarray:
        """The 56 attribute channels in PLY order."""
        return np.concatenate(
            [self.color_dc, self.color_sh, self.opacity, self.scale, self.rotation], axis=1
        )

    def equals(self, other: "GaussianCloud") -> bool:
        """Bit-level equality on every channel."""
        return all(
            np.array_equal(getattr(self, name), getattr(other, name)) for name in CHANNEL_WIDTHS
        )

    @classmethod
    def from_color(
        cls,
        positions: np.ndarray,
        color: np.ndarray,
        opacity: np.ndarray,
        scale: np.ndarray,
        rotation: np.ndarray,
    ) -> "GaussianCloud":
        """Build a cloud from a combined n x 48 color block."""
        color = np.asarray(color, dtype=np.float64)
        return cls(
            positions=positions,
            color_dc=color[:, :3],
            color_sh=color[:, 3:],
            opacity=opacity,
            scale=scale,
            rotation=rotation,
        )
