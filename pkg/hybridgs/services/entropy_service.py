"""
Adaptive binary range coding of occupancy bytes and integer coefficients.

The coder keeps a 32-bit range with byte-wise renormalization and carry
propagation through a cached output byte. Bit probabilities are 12-bit
counters updated with a shift of 4. Occupancy bytes use one context per bit
position. Integer coefficients are binarized as zero flag, sign, unary
exponent with one adaptive context per exponent position, and raw mantissa
bits.

The coding loops are numba kernels over numpy arrays: coder state lives in a
small int64 array, probabilities in an int64 array per stream, and output in
a growable uint8 buffer.

Payload layout: [u8 kind][u8 mode][u32 count][body]. When the range-coded
body would not be smaller than the raw symbols, the raw symbols are stored.
"""
import struct
from typing import Literal

import numpy as np
from numba import njit

from hybridgs.core.errors import CorruptStreamError, DataError

PROB_BITS = 12
PROB_ONE = 1 << PROB_BITS
PROB_INIT = PROB_ONE >> 1
ADAPT_SHIFT = 4
TOP = 1 << 24
MASK32 = 0xFFFFFFFF

KIND_OCCUPANCY = 0
KIND_COEFF = 1
KINDS = {"occupancy": KIND_OCCUPANCY, "coeff": KIND_COEFF}

MODE_RANGE = 0
MODE_RAW8 = 1
MODE_RAW32 = 2
MODE_RAW64 = 3

PAYLOAD_HEADER = struct.Struct("<BBI")

# Coefficient contexts: zero flag, sign, then one per exponent position
CTX_ZERO = 0
CTX_SIGN = 1
CTX_EXP = 2
MAX_EXPONENT = 63
COEFF_CONTEXTS = CTX_EXP + MAX_EXPONENT + 1

# Upper bound on bytes one symbol can flush, pending carry bytes excluded
MAX_SYMBOL_BYTES = 256

# Encoder state slots
_LOW, _RANGE, _CACHE, _CACHE_SIZE, _POS = 0, 1, 2, 3, 4
# Decoder state slots
_DRANGE, _CODE, _DPOS, _OVERRUN = 0, 1, 2, 3

_U0 = np.uint64(0)
_U1 = np.uint64(1)


@njit(cache=True)
def _encoder_state():
    st = np.zeros(5, dtype=np.int64)
    st[_RANGE] = MASK32
    st[_CACHE_SIZE] = 1
    return st


@njit(cache=True)
def _grow(out, need):
    size = out.size
    while size < need:
        size *= 2
    grown = np.empty(size, dtype=np.uint8)
    grown[:out.size] = out
    return grown


@njit(cache=True)
def _shift_low(st, out):
    low = st[_LOW]
    if low < 0xFF000000 or low > MASK32:
        carry = low >> 32
        temp = st[_CACHE]
        pos = st[_POS]
        while True:
            out[pos] = (temp + carry) & 0xFF
            pos += 1
            temp = 0xFF
            st[_CACHE_SIZE] -= 1
            if st[_CACHE_SIZE] == 0:
                break
        st[_POS] = pos
        st[_CACHE] = (low >> 24) & 0xFF
    st[_CACHE_SIZE] += 1
    st[_LOW] = (low & 0x00FFFFFF) << 8


@njit(cache=True)
def _encode_bit(st, out, probs, ctx, bit):
    p = probs[ctx]
    bound = (st[_RANGE] >> PROB_BITS) * p
    if bit:
        st[_LOW] += bound
        st[_RANGE] -= bound
        probs[ctx] = p - (p >> ADAPT_SHIFT)
    else:
        st[_RANGE] = bound
        probs[ctx] = p + ((PROB_ONE - p) >> ADAPT_SHIFT)
    while st[_RANGE] < TOP:
        st[_RANGE] = st[_RANGE] << 8
        _shift_low(st, out)


@njit(cache=True)
def _encode_direct(st, out, value, nbits):
    """Equiprobable low bits of a uint64 value, most significant first."""
    for i in range(nbits - 1, -1, -1):
        st[_RANGE] = st[_RANGE] >> 1
        if (value >> np.uint64(i)) & _U1:
            st[_LOW] += st[_RANGE]
        while st[_RANGE] < TOP:
            st[_RANGE] = st[_RANGE] << 8
            _shift_low(st, out)


@njit(cache=True)
def _finish(st, out):
    need = st[_POS] + st[_CACHE_SIZE] + 5
    if need > out.size:
        out = _grow(out, need)
    for _ in range(5):
        _shift_low(st, out)
    return out[:st[_POS]].copy()


@njit(cache=True)
def _encode_occupancy(symbols):
    st = _encoder_state()
    out = np.empty(2 * symbols.size + 1024, dtype=np.uint8)
    probs = np.full(8, PROB_INIT, dtype=np.int64)
    for j in range(symbols.size):
        need = st[_POS] + st[_CACHE_SIZE] + MAX_SYMBOL_BYTES
        if need > out.size:
            out = _grow(out, need)
        s = symbols[j]
        for i in range(8):
            _encode_bit(st, out, probs, i, (s >> i) & 1)
    return _finish(st, out)


@njit(cache=True)
def _encode_coefficients(symbols):
    st = _encoder_state()
    out = np.empty(2 * symbols.size + 1024, dtype=np.uint8)
    probs = np.full(COEFF_CONTEXTS, PROB_INIT, dtype=np.int64)
    for j in range(symbols.size):
        need = st[_POS] + st[_CACHE_SIZE] + MAX_SYMBOL_BYTES
        if need > out.size:
            out = _grow(out, need)
        v = symbols[j]
        if v == 0:
            _encode_bit(st, out, probs, CTX_ZERO, 0)
            continue
        _encode_bit(st, out, probs, CTX_ZERO, 1)
        if v < 0:
            _encode_bit(st, out, probs, CTX_SIGN, 1)
            m = _U0 - np.uint64(v)
        else:
            _encode_bit(st, out, probs, CTX_SIGN, 0)
            m = np.uint64(v)
        e = 0
        t = m >> _U1
        while t:
            e += 1
            t = t >> _U1
        for i in range(e):
            _encode_bit(st, out, probs, CTX_EXP + i, 1)
        if e < MAX_EXPONENT:
            _encode_bit(st, out, probs, CTX_EXP + e, 0)
        if e > 0:
            _encode_direct(st, out, m, e)
    return _finish(st, out)


@njit(cache=True)
def _next_byte(ds, data):
    pos = ds[_DPOS]
    if pos >= data.size:
        ds[_OVERRUN] = 1
        return np.int64(0)
    ds[_DPOS] = pos + 1
    return np.int64(data[pos])


@njit(cache=True)
def _decoder_state(data):
    ds = np.zeros(4, dtype=np.int64)
    ds[_DRANGE] = MASK32
    for _ in range(5):
        ds[_CODE] = ((ds[_CODE] << 8) | _next_byte(ds, data)) & MASK32
    return ds


@njit(cache=True)
def _decode_bit(ds, data, probs, ctx):
    p = probs[ctx]
    bound = (ds[_DRANGE] >> PROB_BITS) * p
    if ds[_CODE] < bound:
        ds[_DRANGE] = bound
        probs[ctx] = p + ((PROB_ONE - p) >> ADAPT_SHIFT)
        bit = 0
    else:
        ds[_CODE] -= bound
        ds[_DRANGE] -= bound
        probs[ctx] = p - (p >> ADAPT_SHIFT)
        bit = 1
    while ds[_DRANGE] < TOP:
        ds[_DRANGE] = ds[_DRANGE] << 8
        ds[_CODE] = ((ds[_CODE] << 8) | _next_byte(ds, data)) & MASK32
    return bit


@njit(cache=True)
def _decode_direct(ds, data, nbits):
    value = _U0
    for _ in range(nbits):
        ds[_DRANGE] = ds[_DRANGE] >> 1
        value = value << _U1
        if ds[_CODE] >= ds[_DRANGE]:
            ds[_CODE] -= ds[_DRANGE]
            value = value | _U1
        while ds[_DRANGE] < TOP:
            ds[_DRANGE] = ds[_DRANGE] << 8
            ds[_CODE] = ((ds[_CODE] << 8) | _next_byte(ds, data)) & MASK32
    return value


@njit(cache=True)
def _decode_occupancy(data, count):
    ds = _decoder_state(data)
    probs = np.full(8, PROB_INIT, dtype=np.int64)
    out = np.zeros(count, dtype=np.int64)
    for j in range(count):
        if ds[_OVERRUN]:
            break
        s = 0
        for i in range(8):
            s |= _decode_bit(ds, data, probs, i) << i
        out[j] = s
    return out, ds[_DPOS], ds[_OVERRUN]


@njit(cache=True)
def _decode_coefficients(data, count):
    ds = _decoder_state(data)
    probs = np.full(COEFF_CONTEXTS, PROB_INIT, dtype=np.int64)
    out = np.zeros(count, dtype=np.int64)
    for j in range(count):
        if ds[_OVERRUN]:
            break
        if _decode_bit(ds, data, probs, CTX_ZERO) == 0:
            continue
        negative = _decode_bit(ds, data, probs, CTX_SIGN)
        e = 0
        while e < MAX_EXPONENT and _decode_bit(ds, data, probs, CTX_EXP + e) == 1:
            e += 1
        m = (_U1 << np.uint64(e)) | _decode_direct(ds, data, e)
        if negative:
            out[j] = np.int64(_U0 - m)
        else:
            out[j] = np.int64(m)
    return out, ds[_DPOS], ds[_OVERRUN]


def _run_decoder(kernel, body: bytes, count: int) -> np.ndarray:
    data = np.frombuffer(body, dtype=np.uint8).copy()
    out, pos, overrun = kernel(data, count)
    if overrun:
        raise CorruptStreamError("range-coded payload truncated")
    if pos != data.size:
        raise CorruptStreamError(f"{data.size - pos} trailing bytes in range-coded payload")
    return out


def entropy_encode(symbols: np.ndarray, kind: Literal["occupancy", "coeff"]) -> bytes:
    """
    Losslessly code a symbol vector.

    Args:
        symbols: uint8 occupancy bytes, or signed 64-bit integers
        kind: "occupancy" or "coeff"

    Returns:
        Payload: fixed 6-byte header followed by range-coded or raw symbols

    Raises:
        DataError: If a symbol lies outside the declared alphabet
    """
    values = np.asarray(symbols, dtype=np.int64).reshape(-1)
    count = int(values.size)
    if kind == "occupancy":
        if count and (values.min() < 0 or values.max() > 0xFF):
            raise DataError("occupancy symbols must be bytes")
        raw_mode, raw = MODE_RAW8, values.astype(np.uint8).tobytes()
    elif kind == "coeff":
        if count and values.min() >= -(1 << 31) and values.max() < (1 << 31):
            raw_mode, raw = MODE_RAW32, values.astype("<i4").tobytes()
        else:
            raw_mode, raw = MODE_RAW64, values.astype("<i8").tobytes()
    else:
        raise DataError(f"unknown symbol kind {kind!r}")

    if count == 0:
        return PAYLOAD_HEADER.pack(KINDS[kind], MODE_RANGE, 0)

    values = np.ascontiguousarray(values)
    kernel = _encode_occupancy if kind == "occupancy" else _encode_coefficients
    body = kernel(values).tobytes()
    if len(body) < len(raw):
        return PAYLOAD_HEADER.pack(KINDS[kind], MODE_RANGE, count) + body
    return PAYLOAD_HEADER.pack(KINDS[kind], raw_mode, count) + raw


def entropy_decode(payload: bytes, kind: Literal["occupancy", "coeff"] | None = None) -> np.ndarray:
    """
    Inverse of entropy_encode.

    Raises:
        CorruptStreamError: On a bad header, kind mismatch, truncation or trailing bytes
    """
    if len(payload) < PAYLOAD_HEADER.size:
        raise CorruptStreamError("entropy payload shorter than its header")
    kind_code, mode, count = PAYLOAD_HEADER.unpack_from(payload)
    if kind_code not in KINDS.values():
        raise CorruptStreamError(f"unknown entropy payload kind {kind_code}")
    if kind is not None and KINDS[kind] != kind_code:
        raise CorruptStreamError(f"expected {kind} payload, found kind {kind_code}")
    body = payload[PAYLOAD_HEADER.size:]

    if count == 0:
        if body:
            raise CorruptStreamError("trailing bytes after empty payload")
        return np.zeros(0, dtype=np.int64)

    if mode == MODE_RANGE:
        if kind_code == KIND_OCCUPANCY:
            return _run_decoder(_decode_occupancy, body, count)
        return _run_decoder(_decode_coefficients, body, count)

    widths = {MODE_RAW8: ("<u1", 1), MODE_RAW32: ("<i4", 4), MODE_RAW64: ("<i8", 8)}
    if mode not in widths:
        raise CorruptStreamError(f"unknown entropy payload mode {mode}")
    dtype, width = widths[mode]
    if len(body) != count * width:
        raise CorruptStreamError(f"raw payload holds {len(body)} bytes, expected {count * width}")
    return np.frombuffer(body, dtype=dtype).astype(np.int64)
