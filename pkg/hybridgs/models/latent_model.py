"""
Latent decoder weights and PCA results.
"""
from dataclasses import dataclass
from typing import Literal

import numpy as np

Activation = Literal["relu", "identity"]


@dataclass
class LatentModel:
    """
    One-hidden-layer decoder mapping k-dim latents to d_out attributes.

    decode(Z) = act(Z @ W1 + b1) @ W2 + b2

    Attributes:
        W1: k x hidden
        b1: hidden
        W2: hidden x d_out
        b2: d_out
        activation: "relu" or "identity"
    """
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    activation: Activation = "relu"

    def __post_init__(self):
        self.W1 = np.asarray(self.W1, dtype=np.float64)
        self.b1 = np.asarray(self.b1, dtype=np.float64).reshape(-1)
        self.W2 = np.asarray(self.W2, dtype=np.float64)
        self.b2 = np.asarray(self.b2, dtype=np.float64).reshape(-1)

    @property
    def k(self) -> int:
        return self.W1.shape[0]

    @property
    def hidden(self) -> int:
        return self.W1.shape[1]

    @property
    def d_out(self) -> int:
        return self.W2.shape[1]

    def parameters(self) -> list[np.ndarray]:
        """Weights in serialization order (layer-major)."""
        return [self.W1, self.b1, self.W2, self.b2]

    def rounded_to_float32(self) -> "LatentModel":
        """Snap every weight to the nearest float32, the stored precision."""
        snap = lambda a: a.astype(np.float32).astype(np.float64)  # noqa: E731
        return LatentModel(snap(self.W1), snap(self.b1), snap(self.W2), snap(self.b2), self.activation)

    def equals(self, other: "LatentModel") -> bool:
        return self.activation == other.activation and all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.parameters(), other.parameters())
        )


@dataclass
class PcaResult:
    """
    PCA viewed as a linear autoencoder: encoder U1^T, decoder U1, bias mean.

    Attributes:
        mean: d-vector column means
        components: d x q orthonormal columns
        singular_values: min(n, d) values of the centered data, descending
    """
    mean: np.ndarray
    components: np.ndarray
    singular_values: np.ndarray

    @property
    def q(self) -> int:
        return self.components.shape[1]

    def encode(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.components

    def decode(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=np.float64) @ self.components.T + self.mean

    def discarded_energy(self) -> float:
        """Sum of squared singular values beyond rank q."""
        return float(np.sum(self.singular_values[self.q:] ** 2))
