"""
Lossless octree geometry coding.

Octant index at each level is (x_bit << 2) | (y_bit << 1) | z_bit, so Morton
codes interleave bits as ...x1 y1 z1 x0 y0 z0 and the breadth-first leaf order
of the octree equals ascending Morton order.
"""
import logging

import numpy as np

from hybridgs.core.errors import CorruptStreamError, DuplicateError, RangeError, ShapeError
from hybridgs.models import OctreeStream

logger = logging.getLogger(__name__)

MAX_BIT_DEPTH = 21  # 3 * 21 bits fit in uint64


def morton_encode(positions: np.ndarray, N: int) -> np.ndarray:
    """Interleave the N low bits of non-negative x, y, z into uint64 codes."""
    p = np.asarray(positions, dtype=np.uint64)
    codes = np.zeros(p.shape[0], dtype=np.uint64)
    one = np.uint64(1)
    for b in range(N):
        bit = np.uint64(b)
        for axis, slot in ((0, 2), (1, 1), (2, 0)):
            codes |= ((p[:, axis] >> bit) & one) << np.uint64(3 * b + slot)
    return codes


def morton_decode(codes: np.ndarray, N: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.uint64)
    p = np.zeros((codes.shape[0], 3), dtype=np.uint64)
    one = np.uint64(1)
    for b in range(N):
        for axis, slot in ((0, 2), (1, 1), (2, 0)):
            p[:, axis] |= ((codes >> np.uint64(3 * b + slot)) & one) << np.uint64(b)
    return p.astype(np.int64)


def morton_order(positions: np.ndarray, N: int) -> np.ndarray:
    """Stable permutation sorting non-negative voxels into Morton order."""
    return np.argsort(morton_encode(positions, N), kind="stable")


def to_unsigned(positions: np.ndarray, N: int, offset: int) -> np.ndarray:
    """
    Shift signed lattice coordinates into [0, 2^N - 1].

    Raises:
        RangeError: If a shifted coordinate falls outside the cube
    """
    p = np.asarray(positions, dtype=np.int64)
    if p.ndim != 2 or p.shape[1] != 3:
        raise ShapeError(f"positions: expected (n, 3), got {p.shape}")
    p = p + offset
    bad = (p < 0) | (p >= (1 << N))
    if bad.any():
        row = int(np.argwhere(bad)[0][0])
        raise RangeError(f"voxel at index {row} lies outside the 2^{N} cube after offset {offset}")
    return p


def octree_encode(positions: np.ndarray, N: int, offset: int = 0) -> OctreeStream:
    """
    Breadth-first occupancy coding of a unique voxel set.

    Args:
        positions: n x 3 integer coordinates; coordinates + offset must lie in [0, 2^N - 1]
        N: Octree depth
        offset: Shift applied before coding and recorded in the stream

    Returns:
        OctreeStream with one occupancy byte per internal node; bit i set iff
        child octant i is occupied

    Raises:
        DuplicateError: If two positions coincide
        RangeError: If a coordinate is out of range
    """
    if not 1 <= N <= MAX_BIT_DEPTH:
        raise RangeError(f"octree depth must be in [1, {MAX_BIT_DEPTH}], got {N}")
    p = to_unsigned(positions, N, offset)
    codes = np.sort(morton_encode(p, N))
    if codes.size > 1 and np.any(codes[1:] == codes[:-1]):
        raise DuplicateError("geometry contains duplicated voxels")
    if codes.size == 0:
        return OctreeStream(bit_depth=N, occupancy=b"", point_count=0, offset=offset)

    chunks = []
    for level in range(N):
        children = np.unique(codes >> np.uint64(3 * (N - level - 1)))
        parents = children >> np.uint64(3)
        bits = np.left_shift(1, (children & np.uint64(7)).astype(np.int64)).astype(np.uint8)
        starts = np.flatnonzero(np.r_[True, parents[1:] != parents[:-1]])
        chunks.append(np.bitwise_or.reduceat(bits, starts).astype(np.uint8))

    occupancy = np.concatenate(chunks).tobytes()
    return OctreeStream(bit_depth=N, occupancy=occupancy, point_count=int(codes.size), offset=offset)


def octree_decode(stream: OctreeStream) -> np.ndarray:
    """
    Rebuild the voxel set in Morton order.

    Raises:
        CorruptStreamError: On truncation, an empty-child byte, trailing bytes
            or a point count mismatch
    """
    N = stream.bit_depth
    occ = np.frombuffer(stream.occupancy, dtype=np.uint8)
    if stream.point_count == 0:
        if occ.size:
            raise CorruptStreamError("occupancy bytes present for an empty voxel set")
        return np.zeros((0, 3), dtype=np.int64)

    codes = np.zeros(1, dtype=np.uint64)
    pos = 0
    for level in range(N):
        m = codes.size
        chunk = occ[pos:pos + m]
        if chunk.size < m:
            raise CorruptStreamError(f"occupancy truncated at level {level}")
        if np.any(chunk == 0):
            raise CorruptStreamError(f"empty occupancy byte at level {level}")
        pos += m
        bits = np.unpackbits(chunk[:, None], axis=1, bitorder="little")
        parent, octant = np.nonzero(bits)
        codes = (codes[parent] << np.uint64(3)) | octant.astype(np.uint64)

    if pos != occ.size:
        raise CorruptStreamError(f"{occ.size - pos} trailing occupancy bytes")
    if codes.size != stream.point_count:
        raise CorruptStreamError(
            f"decoded {codes.size} voxels, header declares {stream.point_count}"
        )
    return morton_decode(codes, N) - stream.offset
