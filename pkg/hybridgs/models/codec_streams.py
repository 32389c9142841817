"""
Intermediate containers of the geometry and attribute backends.
"""
from dataclasses import dataclass

import numpy as np


@dataclass
class CodingMatrix:
    """
    Ternary coding vectors of integer positions.

    Attributes:
        digits: n x 3 x (N-1) values in {-1, 0, 1}
        basis: (N-1)-vector [2^(N-2), ..., 2, 1]
    """
    digits: np.ndarray
    basis: np.ndarray

    @property
    def bit_depth(self) -> int:
        return self.basis.shape[0] + 1


@dataclass
class OctreeStream:
    """
    Breadth-first occupancy coding of a voxel set.

    Attributes:
        bit_depth: octree depth N (cube side 2^N)
        occupancy: one byte per internal node, BFS order
        point_count: number of occupied leaves
        offset: added to signed lattice coordinates before coding
    """
    bit_depth: int
    occupancy: bytes
    point_count: int
    offset: int = 0


@dataclass
class RahtCoefficients:
    """
    RAHT output for one or more channels sharing a geometry.

    Attributes:
        coefficients: n (or n x C) values; root DC first, then AC coefficients
            from the coarsest merge step down to the finest
        weights: n integer weights; the root weight for the DC, the merged
            weight w1 + w2 for each AC
        traversal_order: permutation taking input rows to Morton order
        positions: n x 3 non-negative voxel coordinates in Morton order
        bit_depth: octree depth N
    """
    coefficients: np.ndarray
    weights: np.ndarray
    traversal_order: np.ndarray
    positions: np.ndarray
    bit_depth: int
