from dataclasses import dataclass, field

import numpy as np


@dataclass
class Camera:
    """A camera pose: world-space center and 3 x 3 rotation."""
    id: int
    center: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)


@dataclass
class CameraList:
    entries: list[Camera] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)
