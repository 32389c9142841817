"""
The .hgs container: fixed header, quantizer metadata, decoder weights,
geometry substream and one substream per attribute channel.

Every block after the header is framed as [u32 length][payload]. All integers
are little-endian, all floats IEEE-754. FORMAT.md documents the layout byte by
byte.
"""
import logging
import struct
from typing import Optional

import numpy as np
from pydantic import ValidationError

from hybridgs.core.errors import ConsistencyError, CorruptStreamError, DuplicateError, RangeError
from hybridgs.models import CompactCloud, HgsBitstream, LatentModel
from hybridgs.schemas.bitstream import MAGIC, VERSION, StreamHeader
from hybridgs.schemas.geometry import NormalizationTransform
from hybridgs.schemas.quantizer import QuantizerParams, RqParams, UqParams
from hybridgs.schemas.rate import RateModel
from hybridgs.schemas.report import AllocationReport, ComponentSize
from hybridgs.services.codec_service import (
    AttrMode,
    decode_attributes,
    decode_geometry,
    encode_attributes,
    encode_geometry,
)
from hybridgs.services.octree_service import morton_order, to_unsigned
from hybridgs.services.quantizer_service import clamp_codes
from hybridgs.services.rate_control_service import pre_codec_sizes

logger = logging.getLogger(__name__)

# magic, version, n, bd_p, bd_c, bd_o, bd_s, bd_r, k_c, k_r,
# quantizer kind, attribute mode, position mode, flags, qs,
# center xyz, scale, transform bit depth, substream count, payload length
HEADER = struct.Struct("<4sBQ7BBBBBd3ddBHQ")
FRAME = struct.Struct("<I")
PARAM_HEAD = struct.Struct("<BB")
MODEL_HEAD = struct.Struct("<BHHB")

QUANTIZER_KINDS = ("uq", "rq")
ATTR_MODES = ("raht", "bypass")
POSITION_MODES = ("lqm", "uq")
ACTIVATIONS = ("relu", "identity")
FLAG_RQ_WIDENED = 0x01

COLOR_CHANNELS = 48
ROTATION_CHANNELS = 4


def position_offset(N: int, position_mode: str) -> int:
    """Shift taking signed LQM coordinates into [0, 2^N - 1]; UQ codes need none."""
    return (1 << (N - 1)) - 1 if position_mode == "lqm" else 0


def _frame(payload: bytes) -> bytes:
    return FRAME.pack(len(payload)) + payload


class _Reader:
    """Bounds-checked cursor over a byte buffer."""

    def __init__(self, data: bytes, pos: int = 0, what: str = "stream"):
        self.data = data
        self.pos = pos
        self.what = what

    def take(self, size: int) -> bytes:
        end = self.pos + size
        if end > len(self.data):
            raise CorruptStreamError(f"{self.what} truncated at byte {self.pos}")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def block(self) -> bytes:
        (length,) = self.unpack(FRAME)
        return self.take(length)

    def done(self) -> bool:
        return self.pos == len(self.data)


# Metadata and decoder weights

def _pack_params(params: list[QuantizerParams]) -> bytes:
    out = bytearray(struct.pack("<H", len(params)))
    for p in params:
        if p.kind == "uq":
            out += PARAM_HEAD.pack(0, p.bit_depth) + struct.pack("<2d", p.f_min, p.f_max)
        else:
            out += PARAM_HEAD.pack(1, p.bit_depth) + struct.pack("<3d", p.a, p.b, p.epsilon)
    return bytes(out)


def _unpack_params(block: bytes) -> list[QuantizerParams]:
    r = _Reader(block, what="metadata block")
    (count,) = struct.unpack("<H", r.take(2))
    params = []
    try:
        for _ in range(count):
            kind, bit_depth = r.unpack(PARAM_HEAD)
            if kind == 0:
                f_min, f_max = struct.unpack("<2d", r.take(16))
                params.append(UqParams(f_min=f_min, f_max=f_max, bit_depth=bit_depth))
            elif kind == 1:
                a, b, epsilon = struct.unpack("<3d", r.take(24))
                params.append(RqParams(a=a, b=b, bit_depth=bit_depth, epsilon=epsilon))
            else:
                raise CorruptStreamError(f"unknown quantizer kind {kind} in metadata")
    except ValidationError as e:
        raise CorruptStreamError(f"invalid quantizer metadata: {e.errors()[0]['msg']}")
    if not r.done():
        raise CorruptStreamError("trailing bytes in metadata block")
    return params


def _pack_model(model: LatentModel) -> bytes:
    head = MODEL_HEAD.pack(model.k, model.hidden, model.d_out, ACTIVATIONS.index(model.activation))
    return head + b"".join(np.ascontiguousarray(w, dtype="<f4").tobytes() for w in model.parameters())


def _unpack_model(block: bytes, name: str) -> LatentModel:
    r = _Reader(block, what=f"{name} block")
    k, hidden, d_out, activation = r.unpack(MODEL_HEAD)
    if activation >= len(ACTIVATIONS):
        raise CorruptStreamError(f"unknown activation {activation} in {name}")
    shapes = [(k, hidden), (hidden,), (hidden, d_out), (d_out,)]
    weights = []
    for shape in shapes:
        count = int(np.prod(shape))
        weights.append(np.frombuffer(r.take(4 * count), dtype="<f4").astype(np.float64).reshape(shape))
    if not r.done():
        raise CorruptStreamError(f"trailing bytes in {name} block")
    return LatentModel(*weights, activation=ACTIVATIONS[activation])


# Consistency checks

def _group_bit_depth(params: list[QuantizerParams], lo: int, hi: int, name: str) -> int:
    depths = {p.bit_depth for p in params[lo:hi]}
    if len(depths) != 1:
        raise ConsistencyError("params", f"{name} channels use mixed bit depths {sorted(depths)}")
    return depths.pop()


def _check_models(compact: CompactCloud, color_model: LatentModel, rotation_model: LatentModel) -> None:
    if color_model.k != compact.k_c:
        raise ConsistencyError("color_model", f"latent width {color_model.k} != k_c {compact.k_c}")
    if color_model.d_out != COLOR_CHANNELS:
        raise ConsistencyError("color_model", f"output width {color_model.d_out} != {COLOR_CHANNELS}")
    if rotation_model.k != compact.k_r:
        raise ConsistencyError("rotation_model", f"latent width {rotation_model.k} != k_r {compact.k_r}")
    if rotation_model.d_out != ROTATION_CHANNELS:
        raise ConsistencyError("rotation_model", f"output width {rotation_model.d_out} != {ROTATION_CHANNELS}")


def _check_codes(channels: np.ndarray, params: list[QuantizerParams]) -> None:
    for j, p in enumerate(params):
        if p.kind != "uq" or channels.shape[0] == 0:
            continue
        column = channels[:, j]
        if column.min() < 0 or column.max() > p.levels:
            raise ConsistencyError(f"channel {j}", f"codes outside [0, {p.levels}]")


def serialize(
    compact: CompactCloud,
    color_model: LatentModel,
    rotation_model: LatentModel,
    params: list[QuantizerParams],
    transform: NormalizationTransform,
    *,
    attr_mode: AttrMode = "raht",
    qs: float = 1.0,
    position_params: Optional[list[UqParams]] = None,
    workers: int = 1,
) -> bytes:
    """
    Write a complete .hgs stream.

    The cloud is canonicalized into Morton order before coding, so the
    output depends only on the primitive set, never on its row order.

    Args:
        compact: Integer cloud
        color_model: Decoder of the color latent (k_c -> 48)
        rotation_model: Decoder of the rotation latent (k_r -> 4)
        params: Quantizer metadata per attribute channel, in substream order
            (color latents, opacity, scale x3, rotation latents)
        transform: Lattice normalization; its bit depth is the position bit depth
        attr_mode: "raht" or "bypass"
        qs: RAHT coefficient step
        position_params: Per-axis UqParams when positions are UQ codes
        workers: Process pool size for substream coding

    Returns:
        Stream bytes

    Raises:
        ConsistencyError: Naming the first field that disagrees with the rest
    """
    k_c, k_r = compact.k_c, compact.k_r
    expected = k_c + 1 + 3 + k_r
    if len(params) != expected:
        raise ConsistencyError("params", f"{len(params)} entries for {expected} attribute channels")
    _check_models(compact, color_model, rotation_model)

    N = transform.bit_depth
    if not 2 <= N <= 18:
        raise ConsistencyError("transform", f"bit depth {N} outside [2, 18]")
    position_mode = "uq" if position_params is not None else "lqm"
    if position_params is not None and (
        len(position_params) != 3 or any(p.kind != "uq" or p.bit_depth != N for p in position_params)
    ):
        raise ConsistencyError("position_params", f"expected 3 UQ entries at bit depth {N}")

    offset = position_offset(N, position_mode)
    try:
        unsigned = to_unsigned(compact.positions, N, offset)
    except RangeError as e:
        raise ConsistencyError("positions", e.message)
    order = morton_order(unsigned, N)
    compact, unsigned = compact.select(order), unsigned[order]

    channels = compact.attribute_channels()
    _check_codes(channels, params)
    quantizer_kind = "rq" if any(p.kind == "rq" for p in params) else "uq"

    try:
        geometry = encode_geometry(compact.positions, N, offset)
    except DuplicateError as e:
        raise ConsistencyError("positions", e.message)
    substreams = encode_attributes(channels, unsigned, N, attr_mode, qs, workers)

    meta = _pack_params(list(position_params or []) + list(params))
    blocks = [
        meta,
        _pack_model(color_model),
        _pack_model(rotation_model),
        geometry,
        *substreams,
    ]
    body = b"".join(_frame(b) for b in blocks)

    header = HEADER.pack(
        MAGIC, VERSION, compact.n,
        N,
        _group_bit_depth(params, 0, k_c, "color"),
        _group_bit_depth(params, k_c, k_c + 1, "opacity"),
        _group_bit_depth(params, k_c + 1, k_c + 4, "scale"),
        _group_bit_depth(params, k_c + 4, expected, "rotation"),
        k_c, k_r,
        QUANTIZER_KINDS.index(quantizer_kind),
        ATTR_MODES.index(attr_mode),
        POSITION_MODES.index(position_mode),
        FLAG_RQ_WIDENED if quantizer_kind == "rq" else 0,
        qs,
        *transform.center, transform.scale, transform.bit_depth,
        expected,
        len(body),
    )
    logger.info(f"[BITSTREAM] Wrote {compact.n} primitives in {HEADER.size + len(body)} bytes")
    return header + body


def read_header(data: bytes) -> StreamHeader:
    """
    Parse and validate the fixed header.

    Raises:
        CorruptStreamError: On a bad magic, version, field value or length
    """
    if len(data) < HEADER.size:
        raise CorruptStreamError(f"stream of {len(data)} bytes is shorter than the header")
    fields = HEADER.unpack_from(data)
    (magic, version, n, bd_p, bd_c, bd_o, bd_s, bd_r, k_c, k_r,
     kind, attr_mode, position_mode, flags, qs, cx, cy, cz, scale, tbd,
     substream_count, payload_length) = fields
    if magic != MAGIC:
        raise CorruptStreamError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptStreamError(f"unsupported stream version {version}")
    if kind >= len(QUANTIZER_KINDS) or attr_mode >= len(ATTR_MODES) or position_mode >= len(POSITION_MODES):
        raise CorruptStreamError("unknown mode byte in header")
    try:
        header = StreamHeader(
            version=version, n=n,
            bd_p=bd_p, bd_c=bd_c, bd_o=bd_o, bd_s=bd_s, bd_r=bd_r,
            k_c=k_c, k_r=k_r,
            quantizer_kind=QUANTIZER_KINDS[kind],
            attr_mode=ATTR_MODES[attr_mode],
            position_mode=POSITION_MODES[position_mode],
            rq_widened=bool(flags & FLAG_RQ_WIDENED),
            qs=qs,
            transform=NormalizationTransform(center=(cx, cy, cz), scale=scale, bit_depth=tbd),
            substream_count=substream_count,
            payload_length=payload_length,
        )
    except ValidationError as e:
        raise CorruptStreamError(f"invalid header: {e.errors()[0]['msg']}")
    if header.substream_count != header.expected_substreams:
        raise CorruptStreamError(
            f"header declares {header.substream_count} substreams, expected {header.expected_substreams}"
        )
    actual = len(data) - HEADER.size
    if actual != header.payload_length:
        raise CorruptStreamError(
            f"header declares {header.payload_length} payload bytes, found {actual}"
        )
    return header


def _read_blocks(data: bytes, header: StreamHeader) -> list[bytes]:
    r = _Reader(data, HEADER.size)
    blocks = [r.block() for _ in range(4 + header.substream_count)]
    if not r.done():
        raise CorruptStreamError("trailing bytes after the last substream")
    return blocks


def deserialize(data: bytes, workers: int = 1) -> HgsBitstream:
    """
    Read a stream back into its components.

    Returns:
        HgsBitstream whose compact cloud is in Morton order; UQ codes are
        clamped into their valid range

    Raises:
        CorruptStreamError: On truncation or any internal inconsistency
    """
    header = read_header(data)
    blocks = _read_blocks(data, header)
    meta, color_block, rotation_block, geometry, *substreams = blocks

    all_params = _unpack_params(meta)
    n_pos = 3 if header.position_mode == "uq" else 0
    if len(all_params) != n_pos + header.substream_count:
        raise CorruptStreamError(
            f"metadata holds {len(all_params)} entries, expected {n_pos + header.substream_count}"
        )
    position_params = all_params[:n_pos] or None
    params = all_params[n_pos:]

    color_model = _unpack_model(color_block, "color decoder")
    rotation_model = _unpack_model(rotation_block, "rotation decoder")
    if color_model.k != header.k_c or color_model.d_out != COLOR_CHANNELS:
        raise CorruptStreamError("color decoder shape disagrees with the header")
    if rotation_model.k != header.k_r or rotation_model.d_out != ROTATION_CHANNELS:
        raise CorruptStreamError("rotation decoder shape disagrees with the header")

    positions, N, offset = decode_geometry(geometry)
    if N != header.bd_p or offset != position_offset(header.bd_p, header.position_mode):
        raise CorruptStreamError("geometry substream disagrees with the header")
    if positions.shape[0] != header.n:
        raise CorruptStreamError(f"geometry holds {positions.shape[0]} voxels, header declares {header.n}")

    unsigned = positions + offset
    decoded = decode_attributes(substreams, unsigned, N, header.attr_mode, header.qs, workers)
    channels = np.stack(
        [clamp_codes(decoded[:, j], p) for j, p in enumerate(params)], axis=1
    ) if params else np.zeros((header.n, 0), dtype=np.int64)

    compact = CompactCloud.from_channels(positions, channels, header.k_c, header.k_r)
    return HgsBitstream(
        header=header,
        params=params,
        color_model=color_model,
        rotation_model=rotation_model,
        compact=compact,
        position_params=position_params,
        block_sizes=_block_sizes(blocks, header),
    )


def _block_sizes(blocks: list[bytes], header: StreamHeader) -> dict[str, int]:
    framed = [FRAME.size + len(b) for b in blocks]
    k_c, k_r = header.k_c, header.k_r
    attrs = framed[4:]
    return {
        "position": framed[3],
        "color": sum(attrs[:k_c]),
        "opacity": attrs[k_c],
        "scale": sum(attrs[k_c + 1:k_c + 4]),
        "rotation": sum(attrs[k_c + 4:]),
        "color decoder": framed[1],
        "rotation decoder": framed[2],
        "metadata": HEADER.size + framed[0],
    }


def allocation_report(n: int, model: RateModel, coded: Optional[dict[str, int]] = None) -> AllocationReport:
    """
    Component sizes: coded bytes where known, and the pre-codec size
    n * channels * BD / 8 of every quantized component.
    """
    coded = coded or {}
    pre = pre_codec_sizes(model, n)
    names = ["position", "color", "opacity", "scale", "rotation", "color decoder", "rotation decoder", "metadata"]
    components = [
        ComponentSize(name=name, coded_bytes=coded.get(name, 0), pre_codec_bytes=pre.get(name))
        for name in names
    ]
    return AllocationReport(n=n, p_bit=model.p_bit, total_bytes=sum(coded.values()), components=components)


def rate_model_of(header: StreamHeader, lossless_ratio: float = 1.3) -> RateModel:
    return RateModel(
        bd_p=header.bd_p, bd_c=header.bd_c, bd_o=header.bd_o, bd_s=header.bd_s, bd_r=header.bd_r,
        k_c=header.k_c, k_r=header.k_r, lossless_ratio=lossless_ratio,
    )


def inspect(data: bytes) -> AllocationReport:
    """
    Rate allocation of a stream, read from its framing without decoding.

    Raises:
        CorruptStreamError: If the header or framing is invalid
    """
    header = read_header(data)
    sizes = _block_sizes(_read_blocks(data, header), header)
    return allocation_report(header.n, rate_model_of(header), sizes)
