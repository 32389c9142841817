import time

import numpy as np
import pytest

from hybridgs.core.errors import CorruptStreamError
from hybridgs.services.codec_service import (
    GEOMETRY_HEADER,
    decode_attribute,
    decode_attributes,
    decode_geometry,
    encode_attribute,
    encode_attributes,
    encode_geometry,
)
from hybridgs.services.octree_service import morton_order
from tests.helpers import random_voxels


def _sorted_voxels(n, N, seed=0):
    voxels = random_voxels(n, N, seed)
    return voxels[morton_order(voxels, N)]


def test_geometry_round_trip_with_offset():
    voxels = _sorted_voxels(2000, 8, seed=1)
    decoded, N, offset = decode_geometry(encode_geometry(voxels - 127, 8, offset=127))
    assert (N, offset) == (8, 127)
    assert np.array_equal(decoded, voxels - 127)


def test_geometry_header_depth_is_checked():
    payload = bytearray(encode_geometry(_sorted_voxels(50, 4), 4))
    payload[0] = 0
    with pytest.raises(CorruptStreamError, match="depth"):
        decode_geometry(bytes(payload))


def test_short_geometry_payload():
    with pytest.raises(CorruptStreamError):
        decode_geometry(bytes(GEOMETRY_HEADER.size - 1))


@pytest.mark.parametrize("mode", ["raht", "bypass"])
def test_batched_channels_match_single_channel_payloads(mode):
    positions = _sorted_voxels(3000, 10, seed=2)
    rng = np.random.default_rng(3)
    channels = rng.integers(0, 1 << 10, size=(3000, 4))
    payloads = encode_attributes(channels, positions, 10, mode, qs=2.0)
    for j, payload in enumerate(payloads):
        assert payload == encode_attribute(channels[:, j], positions, 10, mode, qs=2.0)
    decoded = decode_attributes(payloads, positions, 10, mode, qs=2.0)
    assert decoded.shape == channels.shape
    np.testing.assert_array_equal(decoded[:, 1], decode_attribute(payloads[1], positions, 10, mode, qs=2.0))
    if mode == "bypass":
        assert np.array_equal(decoded, channels)


def test_fine_raht_step_is_lossless():
    positions = _sorted_voxels(1000, 8, seed=4)
    codes = np.random.default_rng(5).integers(0, 256, size=(1000, 2))
    payloads = encode_attributes(codes, positions, 8, "raht", qs=1e-6)
    assert np.array_equal(decode_attributes(payloads, positions, 8, "raht", qs=1e-6), codes)


def test_attribute_length_mismatch():
    positions = _sorted_voxels(100, 6, seed=6)
    payload = encode_attribute(np.arange(100), positions, 6, "bypass")
    with pytest.raises(CorruptStreamError, match="substream 0 holds 100 values for 99 voxels"):
        decode_attributes([payload], positions[:99], 6, "bypass")


@pytest.mark.slow
def test_large_geometry_round_trip_at_depth_16():
    voxels = random_voxels(100_000, 16, seed=7)
    encode_geometry(_sorted_voxels(100, 16, seed=8), 16)

    start = time.perf_counter()
    decoded, N, offset = decode_geometry(encode_geometry(voxels, 16))
    elapsed = time.perf_counter() - start

    assert (N, offset) == (16, 0)
    assert np.array_equal(decoded, voxels[morton_order(voxels, 16)])
    assert elapsed < 30.0
