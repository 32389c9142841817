"""
Substream coding: geometry through octree + entropy coding, each attribute
channel through RAHT (or directly) + entropy coding. One RAHT pass covers all
channels of a geometry.

Every substream depends only on its own channel and the geometry, so
substreams can be produced by a process pool and concatenated in order.
"""
import logging
import struct
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Literal, Sequence

import numpy as np

from hybridgs.core.errors import CorruptStreamError, DataError
from hybridgs.models import OctreeStream, RahtCoefficients
from hybridgs.services.entropy_service import entropy_decode, entropy_encode
from hybridgs.services.octree_service import octree_decode, octree_encode
from hybridgs.services.raht_service import dequantize_coeffs, quantize_coeffs, raht_forward, raht_inverse

logger = logging.getLogger(__name__)

AttrMode = Literal["raht", "bypass"]

# [u8 N][u32 offset][u64 point_count]
GEOMETRY_HEADER = struct.Struct("<BIQ")


def encode_geometry(positions: np.ndarray, N: int, offset: int = 0) -> bytes:
    """Octree occupancy of the voxel set, range coded."""
    stream = octree_encode(positions, N, offset)
    occupancy = np.frombuffer(stream.occupancy, dtype=np.uint8)
    return GEOMETRY_HEADER.pack(N, offset, stream.point_count) + entropy_encode(occupancy, "occupancy")


def decode_geometry(payload: bytes) -> tuple[np.ndarray, int, int]:
    """
    Inverse of encode_geometry.

    Returns:
        (signed positions in Morton order, N, offset)

    Raises:
        CorruptStreamError: On any framing or occupancy inconsistency
    """
    if len(payload) < GEOMETRY_HEADER.size:
        raise CorruptStreamError("geometry substream shorter than its header")
    N, offset, point_count = GEOMETRY_HEADER.unpack_from(payload)
    if not 1 <= N <= 21:
        raise CorruptStreamError(f"geometry depth {N} out of range")
    occupancy = entropy_decode(payload[GEOMETRY_HEADER.size:], "occupancy")
    stream = OctreeStream(
        bit_depth=N,
        occupancy=occupancy.astype(np.uint8).tobytes(),
        point_count=point_count,
        offset=offset,
    )
    return octree_decode(stream), N, offset


def encode_attribute(
    codes: np.ndarray,
    positions: np.ndarray,
    N: int,
    mode: AttrMode = "raht",
    qs: float = 1.0,
) -> bytes:
    """
    Code one integer attribute channel.

    Args:
        codes: n integer codes aligned with positions
        positions: n x 3 non-negative voxels in Morton order
        N: Octree depth
        mode: "raht" transforms then rounds coefficients with step qs;
            "bypass" codes the integers directly
        qs: RAHT coefficient quantization step

    Returns:
        Entropy payload
    """
    codes = np.asarray(codes, dtype=np.int64).reshape(-1, 1)
    return encode_attributes(codes, positions, N, mode, qs)[0]


def decode_attribute(
    payload: bytes,
    positions: np.ndarray,
    N: int,
    mode: AttrMode = "raht",
    qs: float = 1.0,
) -> np.ndarray:
    """Inverse of encode_attribute; RAHT reconstructions are rounded half up."""
    return decode_attributes([payload], positions, N, mode, qs)[:, 0]


def encode_attributes(
    channels: np.ndarray,
    positions: np.ndarray,
    N: int,
    mode: AttrMode = "raht",
    qs: float = 1.0,
    workers: int = 1,
) -> list[bytes]:
    """
    Code every column of an n x m code matrix as its own substream.

    RAHT runs once over all columns, sharing one merge plan; each column's
    payload is identical to encode_attribute on that column alone.
    """
    channels = np.asarray(channels, dtype=np.int64).reshape(positions.shape[0], -1)
    if mode == "bypass":
        q = channels
    elif mode == "raht":
        coeffs = raht_forward(channels.astype(np.float64), positions, N)
        q = quantize_coeffs(coeffs.coefficients, qs)
    else:
        raise DataError(f"unknown attribute mode {mode!r}")
    jobs = [(np.ascontiguousarray(q[:, j]), "coeff") for j in range(q.shape[1])]
    return run_substreams(entropy_encode, jobs, workers)


def decode_attributes(
    payloads: Sequence[bytes],
    positions: np.ndarray,
    N: int,
    mode: AttrMode = "raht",
    qs: float = 1.0,
    workers: int = 1,
) -> np.ndarray:
    """
    Inverse of encode_attributes; returns the n x m code matrix.

    Raises:
        CorruptStreamError: If a payload is malformed or has the wrong length
    """
    n = positions.shape[0]
    columns = run_substreams(entropy_decode, [(payload, "coeff") for payload in payloads], workers)
    for j, q in enumerate(columns):
        if q.size != n:
            raise CorruptStreamError(f"attribute substream {j} holds {q.size} values for {n} voxels")
    q = np.stack(columns, axis=1) if columns else np.zeros((n, 0), dtype=np.int64)
    if mode == "bypass" or q.shape[1] == 0:
        return q
    coeffs = RahtCoefficients(
        coefficients=dequantize_coeffs(q, qs),
        weights=np.zeros(0, dtype=np.int64),
        traversal_order=np.arange(n),
        positions=positions,
        bit_depth=N,
    )
    return np.floor(raht_inverse(coeffs) + 0.5).astype(np.int64)


def run_substreams(fn: Callable, jobs: Sequence[tuple], workers: int = 1) -> list:
    """
    Apply fn to every argument tuple, in order.

    With workers > 1 the jobs run in a process pool; results keep job order,
    so the output is identical to serial execution.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*args) for args in jobs]
    logger.debug(f"[CODEC] Coding {len(jobs)} substreams on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))
