"""
Region-adaptive hierarchical (Haar) transform over an octree.

Each of the 3N merge steps shifts Morton codes right by one bit, merging
siblings along z, then y, then x within every level. Two nodes with weights
w1, w2 and values a1, a2 merge into

    DC = ( sqrt(w1) a1 + sqrt(w2) a2) / sqrt(w1 + w2)
    AC = (-sqrt(w2) a1 + sqrt(w1) a2) / sqrt(w1 + w2)

with weight w1 + w2; nodes without a sibling pass through unchanged. The
transform is orthonormal, so coefficient energy equals attribute energy.
"""
from dataclasses import dataclass

import numpy as np

from hybridgs.core.errors import DataError, ShapeError
from hybridgs.models import RahtCoefficients
from hybridgs.services.octree_service import morton_encode


@dataclass
class _MergeStep:
    low: np.ndarray      # index of the lower sibling before the step
    high: np.ndarray     # index of the upper sibling before the step
    keep: np.ndarray     # mask of nodes surviving the step
    w_low: np.ndarray
    w_high: np.ndarray


def _merge_plan(sorted_codes: np.ndarray, N: int) -> list[_MergeStep]:
    """Sibling pairing and weights of every merge step, leaves to root."""
    codes = sorted_codes
    weights = np.ones(codes.size, dtype=np.int64)
    plan = []
    for _ in range(3 * N):
        parent = codes >> np.uint64(1)
        low = np.flatnonzero(parent[:-1] == parent[1:])
        high = low + 1
        keep = np.ones(codes.size, dtype=bool)
        keep[high] = False
        plan.append(_MergeStep(low, high, keep, weights[low].copy(), weights[high].copy()))
        weights = weights.copy()
        weights[low] += weights[high]
        weights = weights[keep]
        codes = parent[keep]
    return plan


def _rotation(w1: np.ndarray, w2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    total = np.sqrt((w1 + w2).astype(np.float64))
    return np.sqrt(w1) / total, np.sqrt(w2) / total


def raht_forward(attrs: np.ndarray, positions: np.ndarray, N: int) -> RahtCoefficients:
    """
    Forward RAHT of one or more attribute channels.

    Args:
        attrs: n or n x C values aligned with positions
        positions: n x 3 unique non-negative voxels in [0, 2^N - 1]
        N: Octree depth

    Returns:
        RahtCoefficients: root DC then ACs from the coarsest step to the finest,
        within a step in Morton order

    Raises:
        ShapeError: If attrs and positions have different lengths
    """
    attrs = np.asarray(attrs, dtype=np.float64)
    squeeze = attrs.ndim == 1
    values = attrs.reshape(attrs.shape[0], -1)
    positions = np.asarray(positions, dtype=np.int64)
    if values.shape[0] != positions.shape[0]:
        raise ShapeError(
            f"attributes have {values.shape[0]} rows but positions have {positions.shape[0]}"
        )

    codes = morton_encode(positions, N)
    order = np.argsort(codes, kind="stable")
    plan = _merge_plan(codes[order], N)
    values = values[order].copy()

    ac_blocks, ac_weights = [], []
    for step in plan:
        c1, c2 = _rotation(step.w_low, step.w_high)
        a1, a2 = values[step.low], values[step.high]
        dc = c1[:, None] * a1 + c2[:, None] * a2
        ac_blocks.append(-c2[:, None] * a1 + c1[:, None] * a2)
        ac_weights.append(step.w_low + step.w_high)
        values[step.low] = dc
        values = values[step.keep]

    root_weight = np.array([positions.shape[0]], dtype=np.int64) if positions.shape[0] else np.zeros(0, np.int64)
    coefficients = np.concatenate([values, *reversed(ac_blocks)], axis=0)
    weights = np.concatenate([root_weight, *reversed(ac_weights)])
    if squeeze:
        coefficients = coefficients[:, 0]
    return RahtCoefficients(
        coefficients=coefficients,
        weights=weights,
        traversal_order=order,
        positions=positions[order],
        bit_depth=N,
    )


def raht_inverse(coeffs: RahtCoefficients) -> np.ndarray:
    """
    Inverse RAHT; returns attributes in Morton (traversal) order.

    Raises:
        ShapeError: If the coefficient count differs from the voxel count
    """
    c = np.asarray(coeffs.coefficients, dtype=np.float64)
    squeeze = c.ndim == 1
    c = c.reshape(c.shape[0], -1)
    n = coeffs.positions.shape[0]
    if c.shape[0] != n:
        raise ShapeError(f"{c.shape[0]} coefficients for {n} voxels")
    if n == 0:
        return c[:, 0] if squeeze else c

    codes = morton_encode(coeffs.positions, coeffs.bit_depth)
    plan = _merge_plan(np.sort(codes), coeffs.bit_depth)

    values = c[:1].copy()
    cursor = 1
    for step in reversed(plan):
        m = step.low.size
        ac = c[cursor:cursor + m]
        cursor += m
        before = np.empty((step.keep.size, c.shape[1]))
        before[step.keep] = values
        dc = before[step.low]
        c1, c2 = _rotation(step.w_low, step.w_high)
        before[step.low] = c1[:, None] * dc - c2[:, None] * ac
        before[step.high] = c2[:, None] * dc + c1[:, None] * ac
        values = before

    return values[:, 0] if squeeze else values


def raht_inverse_to_input_order(coeffs: RahtCoefficients) -> np.ndarray:
    """Inverse RAHT with rows restored to the order given to raht_forward."""
    morton_values = raht_inverse(coeffs)
    out = np.empty_like(morton_values)
    out[coeffs.traversal_order] = morton_values
    return out


def quantize_coeffs(coefficients: np.ndarray, qs: float = 1.0) -> np.ndarray:
    """round(c / qs), half up."""
    if qs <= 0:
        raise DataError("qs must be positive")
    return np.floor(np.asarray(coefficients, dtype=np.float64) / qs + 0.5).astype(np.int64)


def dequantize_coeffs(q: np.ndarray, qs: float = 1.0) -> np.ndarray:
    return np.asarray(q, dtype=np.float64) * qs
