import pytest

from hybridgs.core.config import Settings
from hybridgs.core.errors import ConfigError
from hybridgs.schemas.encode_config import DecodeConfig, EncodeConfig, build_config


def test_defaults(monkeypatch):
    for key in ("HGS_ENV", "HGS_BIT_DEPTH", "HGS_WORKERS", "HGS_LOSSLESS_RATIO"):
        monkeypatch.delenv(key, raising=False)
    s = Settings()
    assert s.BIT_DEPTH == 16
    assert s.WORKERS == 1
    assert s.LOSSLESS_RATIO == 1.3
    assert not s.is_production()


@pytest.mark.parametrize("key, value", [
    ("HGS_BIT_DEPTH", "sixteen"),
    ("HGS_BIT_DEPTH", "1"),
    ("HGS_WORKERS", "0"),
    ("HGS_LOSSLESS_RATIO", "-1"),
    ("HGS_LOG_LEVEL", "loud"),
    ("HGS_ENV", "staging"),
])
def test_invalid_environment(monkeypatch, key, value):
    monkeypatch.setenv(key, value)
    with pytest.raises(ConfigError, match=key):
        Settings()


def test_build_config_drops_unset_options():
    config = build_config(DecodeConfig, input="a.hgs", output="b.ply", workers=None)
    assert config.workers >= 1


def test_build_config_names_the_field():
    with pytest.raises(ConfigError, match="kr"):
        build_config(EncodeConfig, input="a.ply", output="b.hgs", kr=5)


def test_attribute_bit_depths_default_to_bd():
    config = EncodeConfig(input="a.ply", output="b.hgs", bd=14, bd_r=9)
    assert config.attribute_bit_depths == {"bd_c": 14, "bd_o": 14, "bd_s": 14, "bd_r": 9}
