"""
End-to-end encode, decode and self-check pipelines used by the CLI.
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from hybridgs.core.errors import DataError, HgsError
from hybridgs.models import CameraList, CompactCloud, GaussianCloud, HgsBitstream
from hybridgs.schemas.encode_config import DecodeConfig, EncodeConfig
from hybridgs.schemas.geometry import NormalizationTransform
from hybridgs.schemas.rate import RateModel
from hybridgs.schemas.report import EncodeSummary, VerifyReport
from hybridgs.services.bitstream_service import deserialize, inspect, position_offset, serialize
from hybridgs.services.geometry_service import (
    adjust_cameras,
    decompose_positions,
    denormalize,
    normalize,
    recompose_positions,
    remove_outliers,
    round_positions,
)
from hybridgs.services.latent_service import decode_latent, fit_latent_decoder
from hybridgs.services.octree_service import morton_order, to_unsigned
from hybridgs.services.ply_service import load_cameras, load_ply, read_bytes, save_cameras, save_ply
from hybridgs.services.quantizer_service import dequantize_channel, dequantize_matrix, quantize_channel, quantize_matrix
from hybridgs.services.rate_control_service import estimate_size, measure_lossless_ratio, plan_method1, plan_method2
from hybridgs.services.sparsify_service import apply_schedule, deduplicate

logger = logging.getLogger(__name__)


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Label any codec error escaping the block with the pipeline stage."""
    try:
        yield
    except HgsError as e:
        if e.stage is None:
            e.stage = name
        raise


@dataclass
class EncodeResult:
    data: bytes
    summary: EncodeSummary
    compact: CompactCloud
    transform: NormalizationTransform
    cameras: Optional[CameraList] = None


def _lattice_positions(cloud: GaussianCloud, config: EncodeConfig):
    """Integer positions plus the transform (LQM) or per-axis UQ metadata."""
    N = config.bd
    if config.position_quantizer == "lqm":
        cloud, transform = normalize(cloud, N)
        lattice = round_positions(cloud.positions)
        with stage("decompose"):
            if not np.array_equal(recompose_positions(decompose_positions(lattice, N)), lattice):
                raise DataError("coding vectors do not reproduce the lattice positions")
        return cloud, lattice, transform, None

    columns, position_params = [], []
    for axis in range(3):
        codes, params = quantize_channel(cloud.positions[:, axis], "uq", N)
        columns.append(codes)
        position_params.append(params)
    transform = NormalizationTransform(center=(0.0, 0.0, 0.0), scale=1.0, bit_depth=N)
    return cloud, np.stack(columns, axis=1), transform, position_params


def encode_cloud(
    cloud: GaussianCloud,
    config: EncodeConfig,
    cameras: Optional[CameraList] = None,
) -> EncodeResult:
    """
    Encode a floating-point cloud into an .hgs stream.

    parse output -> outlier removal -> lattice normalization -> uniqueness ->
    rate-planned pruning or bit-depth reduction -> latent fits -> attribute
    quantization -> octree/RAHT/entropy coding -> container.

    Args:
        cloud: Input primitives
        config: Encode options
        cameras: Optional cameras moved into the normalized frame

    Returns:
        EncodeResult with the stream bytes, summary and integer cloud

    Raises:
        HgsError: Any codec error, labelled with the stage it came from
    """
    if config.measure_l and config.target_size:
        first_config = config.model_copy(update={"measure_l": False})
        first = encode_cloud(cloud, first_config, cameras)
        pre_codec = first.summary.n_coded * first.summary.p_bit / 8
        L = measure_lossless_ratio(pre_codec, first.summary.coded_bytes)
        logger.info(f"[ENCODE] Measured lossless ratio {L:.3f}; re-planning")
        result = encode_cloud(cloud, first_config.model_copy(update={"lossless_ratio": L}), cameras)
        result.summary.measured_lossless_ratio = L
        return result

    n_input = cloud.n
    removed_outliers = 0
    if config.outlier:
        with stage("outlier"):
            cloud, removed = remove_outliers(cloud, config.nb_neighbors, config.std_ratio)
            removed_outliers = int(removed.size)

    with stage("normalize"):
        cloud, lattice, transform, position_params = _lattice_positions(cloud, config)
        cloud = cloud.replace(positions=lattice.astype(np.float64))

    with stage("uniqueness"):
        before = cloud.n
        cloud, _ = deduplicate(cloud, config.dedup_mode)
        removed_duplicates = before - cloud.n
    logger.info(f"[ENCODE] {cloud.n} primitives after deduplicate")

    k_c, k_r = config.kc, config.kr
    model = RateModel(bd_p=config.bd, k_c=k_c, k_r=k_r, lossless_ratio=config.lossless_ratio,
                      **config.attribute_bit_depths)
    pruned = 0
    if config.target_size:
        with stage("rate"):
            if config.rate_method == 1:
                plan = plan_method1(config.target_size, model, cloud.n, config.schedule)
                cloud, removed = apply_schedule(cloud, plan.schedule)
                pruned = int(removed.size)
            else:
                model = plan_method2(config.target_size, model, cloud.n).model

    with stage("latent"):
        Z_c, color_model = fit_latent_decoder(cloud.color(), k_c, config.latent)
        Z_r, rotation_model = fit_latent_decoder(cloud.rotation, k_r, config.latent)
        color_model = color_model.rounded_to_float32()
        rotation_model = rotation_model.rounded_to_float32()

    with stage("quantize"):
        codes, params = [], []
        for block, bd in ((Z_c, model.bd_c), (cloud.opacity, model.bd_o), (cloud.scale, model.bd_s), (Z_r, model.bd_r)):
            q, p = quantize_matrix(block, config.quantizer, bd, config.lam, config.epsilon)
            codes.append(q)
            params.extend(p)
        positions = np.rint(cloud.positions).astype(np.int64)
        compact = CompactCloud.from_channels(positions, np.concatenate(codes, axis=1), k_c, k_r)

    with stage("serialize"):
        data = serialize(
            compact, color_model, rotation_model, params, transform,
            attr_mode=config.attr_mode, qs=config.qs,
            position_params=position_params, workers=config.workers,
        )
        allocation = inspect(data)

    summary = EncodeSummary(
        n_input=n_input,
        n_coded=compact.n,
        removed_outliers=removed_outliers,
        removed_duplicates=removed_duplicates,
        pruned=pruned,
        p_bit=model.p_bit,
        coded_bytes=len(data),
        target_bytes=config.target_size,
        estimated_bytes=estimate_size(model, compact.n),
        lossless_ratio=model.lossless_ratio,
        bit_depths={"bd_p": model.bd_p, "bd_c": model.bd_c, "bd_o": model.bd_o,
                    "bd_s": model.bd_s, "bd_r": model.bd_r},
        allocation=allocation,
    )
    adjusted = adjust_cameras(cameras, transform) if cameras is not None else None
    logger.info(f"[ENCODE] {compact.n} primitives in {len(data)} bytes ({model.p_bit} bits each before coding)")
    return EncodeResult(data=data, summary=summary, compact=compact, transform=transform, cameras=adjusted)


def cameras_path(output: str | Path) -> Path:
    """Where encode writes adjusted cameras: `<output>.cameras.txt`."""
    return Path(f"{output}.cameras.txt")


def encode_file(config: EncodeConfig) -> EncodeResult:
    """Read the input PLY (and cameras), encode, and write the stream."""
    with stage("parse"):
        cloud = load_ply(config.input)
        cameras = load_cameras(config.cameras) if config.cameras else None
    result = encode_cloud(cloud, config, cameras)
    Path(config.output).write_bytes(result.data)
    if result.cameras is not None:
        save_cameras(cameras_path(config.output), result.cameras)
    return result


def decode_stream(
    data: bytes,
    workers: int = 1,
    denormalize_positions: bool = False,
) -> tuple[GaussianCloud, HgsBitstream]:
    """
    Decode a stream into a floating-point cloud.

    Positions stay on the integer lattice unless denormalize_positions is set;
    UQ-coded positions are always de-quantized.

    Returns:
        (cloud in Morton order, parsed stream)
    """
    with stage("deserialize"):
        stream = deserialize(data, workers)
    header, compact = stream.header, stream.compact
    k_c = header.k_c

    with stage("dequantize"):
        values = dequantize_matrix(compact.attribute_channels(), stream.params)
        color = decode_latent(values[:, :k_c], stream.color_model)
        rotation = decode_latent(values[:, k_c + 4:], stream.rotation_model)
        if header.position_mode == "uq":
            positions = np.stack(
                [dequantize_channel(compact.positions[:, axis], p) for axis, p in enumerate(stream.position_params)],
                axis=1,
            )
        else:
            positions = compact.positions.astype(np.float64)
        cloud = GaussianCloud.from_color(
            positions=positions,
            color=color,
            opacity=values[:, k_c:k_c + 1],
            scale=values[:, k_c + 1:k_c + 4],
            rotation=rotation,
        )

    if denormalize_positions and header.position_mode == "lqm":
        cloud = denormalize(cloud, header.transform)
    logger.info(f"[DECODE] {cloud.n} primitives from {len(data)} bytes")
    return cloud, stream


def decode_file(config: DecodeConfig) -> tuple[GaussianCloud, HgsBitstream]:
    """Read a stream, decode it, write the PLY and optionally adjusted cameras."""
    with stage("parse"):
        data = read_bytes(config.input)
    cloud, stream = decode_stream(data, config.workers, config.denormalize)
    save_ply(config.output, cloud)

    if config.cameras and config.cameras_out:
        cameras = load_cameras(config.cameras)
        if not config.denormalize:
            cameras = adjust_cameras(cameras, stream.header.transform)
        save_cameras(config.cameras_out, cameras)
    return cloud, stream


def code_error_bound(n: int, attr_mode: str, qs: float) -> float:
    """Largest per-code deviation the attribute path may introduce."""
    if attr_mode == "bypass":
        return 0.0
    return qs / 2 * float(np.sqrt(n)) + 0.5


def verify(cloud: GaussianCloud, config: EncodeConfig) -> VerifyReport:
    """
    Encode in memory, decode, and compare against the encoder's integer cloud.

    Geometry must match exactly; attribute codes must stay within the
    rounding bound of the attribute mode.
    """
    result = encode_cloud(cloud, config)
    decoded, stream = decode_stream(result.data, config.workers)

    expected = result.compact
    offset = position_offset(config.bd, stream.header.position_mode)
    order = morton_order(to_unsigned(expected.positions, config.bd, offset), config.bd)
    expected = expected.select(order)

    messages = []
    geometry_exact = np.array_equal(stream.compact.positions, expected.positions)
    if not geometry_exact:
        messages.append("decoded geometry differs from the encoded lattice")

    diff = np.abs(stream.compact.attribute_channels() - expected.attribute_channels())
    max_error = int(diff.max()) if diff.size else 0
    bound = code_error_bound(expected.n, config.attr_mode, config.qs)
    if max_error > bound:
        messages.append(f"attribute code error {max_error} exceeds bound {bound:.3f}")
    if decoded.n != expected.n:
        messages.append(f"decoded {decoded.n} primitives, encoded {expected.n}")

    ok = not messages
    logger.info(f"[VERIFY] {'passed' if ok else 'failed'}: max code error {max_error}")
    return VerifyReport(
        ok=ok,
        n=expected.n,
        geometry_exact=geometry_exact,
        max_code_error=max_error,
        code_error_bound=bound,
        coded_bytes=len(result.data),
        messages=messages,
    )
