"""
Scalar quantizers for attribute channels.

Uniform quantization maps [f_min, f_max] onto 2^N - 1 steps. Robust
quantization quantizes with an affine map plus rounding perturbation and
reconstructs with a closed-form ridge fit r = a*q + b.
"""
import logging
from typing import Literal, Optional

import numpy as np

from hybridgs.core.errors import CodeError, DegenerateRangeError, RangeError, SingularFitError, DataError
from hybridgs.schemas.quantizer import QuantizerParams, RqParams, UqParams

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-8


def uq_quantize(
    channel: np.ndarray,
    N: int,
    f_min: Optional[float] = None,
    f_max: Optional[float] = None,
) -> tuple[np.ndarray, UqParams]:
    """
    Uniformly quantize a channel to N-bit codes.

    q_i = floor((f_i - f_min)(2^N - 1)/(f_max - f_min) + 1/2)

    Args:
        channel: Real values
        N: Bit depth in [1, 32]
        f_min: Range start; defaults to the observed minimum
        f_max: Range end; defaults to the observed maximum

    Returns:
        (codes in [0, 2^N - 1], UqParams)

    Raises:
        RangeError: If any value lies outside [f_min, f_max]
        DegenerateRangeError: If f_max == f_min
    """
    f = np.asarray(channel, dtype=np.float64).reshape(-1)
    f_min = float(f.min()) if f_min is None else float(f_min)
    f_max = float(f.max()) if f_max is None else float(f_max)
    if f_max == f_min:
        raise DegenerateRangeError(f"quantization range collapses at {f_min}")
    if f_max < f_min:
        raise RangeError(f"f_max {f_max} is below f_min {f_min}")
    outside = (f < f_min) | (f > f_max)
    if outside.any():
        i = int(np.argmax(outside))
        raise RangeError(f"value {f[i]} at index {i} outside [{f_min}, {f_max}]")

    params = UqParams(f_min=f_min, f_max=f_max, bit_depth=N)
    codes = np.floor((f - f_min) * params.levels / (f_max - f_min) + 0.5).astype(np.int64)
    # Guard the upper endpoint against floating-point overshoot
    return np.minimum(codes, params.levels), params


def uq_dequantize(q: np.ndarray, params: UqParams) -> np.ndarray:
    """
    Map UQ codes back to values: r_i = q_i (f_max - f_min)/(2^N - 1) + f_min.

    Raises:
        CodeError: If a code lies outside [0, 2^N - 1]
    """
    q = np.asarray(q, dtype=np.int64).reshape(-1)
    bad = (q < 0) | (q > params.levels)
    if bad.any():
        i = int(np.argmax(bad))
        raise CodeError(f"code {q[i]} at index {i} outside [0, {params.levels}]")
    return q * (params.f_max - params.f_min) / params.levels + params.f_min


def rq_fit_and_quantize(
    channel: np.ndarray,
    N: int,
    lam: float = 0.01,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[np.ndarray, RqParams]:
    """
    Robust quantization of one channel.

    The affine map A(f) = (f - f_min)/(f_max - f_min + eps) * (2^N - 1) is
    perturbed by sigma = round(A) - A so that q = A + sigma is an integer with
    no clipping. De-quantization parameters minimize
    (1/2M)||a*q + b - f||^2 + (lam/2) a^2, giving a = Cov_fq/(Var_q + lam)
    and b = mean(f) - a mean(q).

    Args:
        channel: Real values, at least two and not all equal
        N: Bit depth
        lam: Ridge penalty, >= 0
        epsilon: Range guard, > 0

    Returns:
        (integer codes, RqParams)

    Raises:
        DegenerateRangeError: If the channel is constant
        SingularFitError: If Var_q + lam == 0
    """
    f = np.asarray(channel, dtype=np.float64).reshape(-1)
    if f.size < 2:
        raise DataError("robust quantization needs at least two values")
    if lam < 0:
        raise DataError("ridge penalty must be non-negative")
    f_min, f_max = float(f.min()), float(f.max())
    if f_max == f_min:
        raise DegenerateRangeError(f"constant channel at {f_min}")

    A = (f - f_min) / (f_max - f_min + epsilon) * ((1 << N) - 1)
    sigma = rq_perturbation(A)
    q = np.rint(A + sigma).astype(np.int64)

    a, b = ridge_fit(q, f, lam)
    return q, RqParams(a=a, b=b, bit_depth=N, epsilon=epsilon)


def rq_perturbation(A: np.ndarray) -> np.ndarray:
    """sigma = round(A) - A, with round half up; always in [-0.5, 0.5]."""
    return np.floor(A + 0.5) - A


def ridge_fit(q: np.ndarray, f: np.ndarray, lam: float) -> tuple[float, float]:
    """Closed-form stationary point of the ridge objective."""
    q = np.asarray(q, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    q_bar, f_bar = q.mean(), f.mean()
    var_q = np.mean((q - q_bar) ** 2)
    cov_fq = np.mean((f - f_bar) * (q - q_bar))
    if var_q + lam == 0:
        raise SingularFitError("Var_q + lambda is zero; codes are constant and lambda is 0")
    a = cov_fq / (var_q + lam)
    return float(a), float(f_bar - a * q_bar)


def ridge_objective(a: float, b: float, q: np.ndarray, f: np.ndarray, lam: float) -> float:
    """(1/2M)||a*q + b - f||^2 + (lam/2) a^2"""
    r = a * np.asarray(q, dtype=np.float64) + b - np.asarray(f, dtype=np.float64)
    return float(np.mean(r ** 2) / 2 + lam * a * a / 2)


def rq_dequantize(q: np.ndarray, params: RqParams) -> np.ndarray:
    """r = a*q + b"""
    return params.a * np.asarray(q, dtype=np.float64).reshape(-1) + params.b


def quantize_channel(
    channel: np.ndarray,
    kind: Literal["uq", "rq"],
    N: int,
    lam: float = 0.01,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[np.ndarray, QuantizerParams]:
    """
    Pipeline entry: quantize one channel, tolerating constant channels.

    A constant channel is coded with UQ over [f_min, f_min + 1], which yields
    all-zero codes and exact reconstruction. RQ needs two distinct values and
    falls back to the same UQ rule otherwise.
    """
    f = np.asarray(channel, dtype=np.float64).reshape(-1)
    f_min, f_max = float(f.min()), float(f.max())
    if f_max == f_min:
        return uq_quantize(f, N, f_min, f_min + 1.0)
    if kind == "rq":
        return rq_fit_and_quantize(f, N, lam, epsilon)
    return uq_quantize(f, N, f_min, f_max)


def dequantize_channel(codes: np.ndarray, params: QuantizerParams) -> np.ndarray:
    if params.kind == "uq":
        return uq_dequantize(codes, params)
    return rq_dequantize(codes, params)


def quantize_matrix(
    X: np.ndarray,
    kind: Literal["uq", "rq"],
    N: int,
    lam: float = 0.01,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[np.ndarray, list[QuantizerParams]]:
    """Quantize each column independently."""
    X = np.asarray(X, dtype=np.float64)
    codes = np.empty(X.shape, dtype=np.int64)
    params = []
    for j in range(X.shape[1]):
        codes[:, j], p = quantize_channel(X[:, j], kind, N, lam, epsilon)
        params.append(p)
    return codes, params


def dequantize_matrix(codes: np.ndarray, params: list[QuantizerParams]) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return np.stack(
        [dequantize_channel(codes[:, j], p) for j, p in enumerate(params)], axis=1
    ).reshape(codes.shape[0], len(params))


def step_size(params: QuantizerParams) -> float:
    """Reconstruction step between adjacent codes."""
    if params.kind == "uq":
        return params.step
    return abs(params.a)


def clamp_codes(codes: np.ndarray, params: QuantizerParams) -> np.ndarray:
    """Bring decoded codes back into the valid code range for UQ channels."""
    if params.kind == "uq":
        return np.clip(codes, 0, params.levels)
    return codes
