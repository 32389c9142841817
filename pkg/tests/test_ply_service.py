import io

import numpy as np
import pytest
from plyfile import PlyData, PlyElement

from hybridgs.core.errors import DataError, InputFileError, ParseError, SchemaError
from hybridgs.models import Camera, CameraList, GaussianCloud
from hybridgs.services.ply_service import (
    PROPERTY_NAMES,
    load_ply,
    parse_ply,
    read_cameras,
    save_ply,
    write_cameras,
    write_ply,
)
from tests.helpers import make_cloud


def _ply_bytes(elements: np.ndarray, text: bool = False) -> bytes:
    out = io.BytesIO()
    PlyData([PlyElement.describe(elements, "vertex")], text=text, byte_order="<").write(out)
    return out.getvalue()


def _vertex_array(n: int, names=PROPERTY_NAMES) -> np.ndarray:
    return np.zeros(n, dtype=[(name, "<f4") for name in names])


def test_property_layout_has_62_fields():
    assert len(PROPERTY_NAMES) == 62
    assert PROPERTY_NAMES[:6] == ["x", "y", "z", "nx", "ny", "nz"]
    assert PROPERTY_NAMES[-4:] == ["rot_0", "rot_1", "rot_2", "rot_3"]


def test_single_zero_vertex():
    cloud = parse_ply(_ply_bytes(_vertex_array(1)))
    assert cloud.n == 1
    assert not cloud.attributes().any()
    assert not cloud.positions.any()


def test_write_then_parse_is_exact():
    cloud = make_cloud(1000)
    assert parse_ply(write_ply(cloud)).equals(cloud)


def test_zero_cloud_header():
    data = write_ply(GaussianCloud.from_color(np.zeros((1, 3)), np.zeros((1, 48)), np.zeros(1),
                                              np.zeros((1, 3)), np.zeros((1, 4))))
    header = data.split(b"end_header")[0].decode("ascii")
    assert "element vertex 1" in header
    assert header.count("property float") == 62


def test_one_opacity_changes_bytes():
    cloud = make_cloud(10)
    other = cloud.replace(opacity=cloud.opacity.copy())
    other.opacity[3, 0] += 1.0
    assert write_ply(cloud) != write_ply(other)


def test_missing_property_is_schema_error():
    names = [name for name in PROPERTY_NAMES if name != "f_rest_44"]
    with pytest.raises(SchemaError, match="f_rest_44"):
        parse_ply(_ply_bytes(_vertex_array(2, names)))


def test_ascii_ply_is_rejected():
    with pytest.raises(ParseError):
        parse_ply(_ply_bytes(_vertex_array(2), text=True))


def test_not_a_ply():
    with pytest.raises(ParseError):
        parse_ply(b"solid cube\n")


def test_non_finite_value_names_index():
    elements = _vertex_array(3)
    elements["opacity"][2] = np.nan
    with pytest.raises(DataError, match="index 2"):
        parse_ply(_ply_bytes(elements))


def test_write_rejects_float32_overflow():
    cloud = make_cloud(5)
    opacity = cloud.opacity.copy()
    opacity[2, 0] = 1e39
    with pytest.raises(DataError, match="'opacity' at primitive 2"):
        write_ply(cloud.replace(opacity=opacity))


def test_write_rounds_to_nearest_float32():
    cloud = make_cloud(4)
    scale = cloud.scale.copy()
    scale[0, 0] = 0.1
    parsed = parse_ply(write_ply(cloud.replace(scale=scale)))
    assert parsed.scale[0, 0] == float(np.float32(0.1))
    assert parsed.scale[0, 0] != 0.1
    np.testing.assert_array_equal(parsed.scale[1:], cloud.scale[1:])


def test_load_missing_file_names_path(tmp_path):
    path = tmp_path / "absent.ply"
    with pytest.raises(InputFileError, match="absent.ply"):
        load_ply(path)


def test_save_and_load(tmp_path):
    cloud = make_cloud(20)
    path = tmp_path / "scene.ply"
    save_ply(path, cloud)
    assert load_ply(path).equals(cloud)


def test_cameras_round_trip():
    theta = 0.3
    rotation = np.array([
        [np.cos(theta), -np.sin(theta), 0.0],
        [np.sin(theta), np.cos(theta), 0.0],
        [0.0, 0.0, 1.0],
    ])
    cams = CameraList(entries=[
        Camera(id=0, center=[1.0, 2.0, 3.0], rotation=np.eye(3)),
        Camera(id=7, center=[-0.1, 0.2, 1e-7], rotation=rotation),
    ])
    parsed = read_cameras("# poses\n\n" + write_cameras(cams))
    assert [c.id for c in parsed] == [0, 7]
    for a, b in zip(parsed, cams):
        assert np.array_equal(a.center, b.center)
        assert np.array_equal(a.rotation, b.rotation)


def test_camera_line_with_wrong_field_count():
    with pytest.raises(ParseError, match="line 2"):
        read_cameras("0 0 0 0 1 0 0 0 1 0 0 0 1\n1 0 0 0 1 0 0\n")


def test_camera_with_skewed_rotation():
    with pytest.raises(DataError, match="camera 3"):
        read_cameras("3 0 0 0 1 0 0 0 2 0 0 0 1\n")
