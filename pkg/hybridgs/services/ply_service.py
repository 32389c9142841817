"""
3DGS PLY and camera-list I/O.
"""
import io
import logging
from pathlib import Path

import numpy as np
from plyfile import PlyData, PlyElement

from hybridgs.core.errors import DataError, InputFileError, ParseError, SchemaError
from hybridgs.models import Camera, CameraList, GaussianCloud

logger = logging.getLogger(__name__)

# Property order of the community 3DGS layout
PROPERTY_GROUPS = [
    ("positions", ["x", "y", "z"]),
    ("normals", ["nx", "ny", "nz"]),
    ("color_dc", [f"f_dc_{i}" for i in range(3)]),
    ("color_sh", [f"f_rest_{i}" for i in range(45)]),
    ("opacity", ["opacity"]),
    ("scale", [f"scale_{i}" for i in range(3)]),
    ("rotation", [f"rot_{i}" for i in range(4)]),
]
PROPERTY_NAMES = [name for _, names in PROPERTY_GROUPS for name in names]

ORTHONORMAL_TOLERANCE = 1e-6


def parse_ply(data: bytes) -> GaussianCloud:
    """
    Parse a binary-little-endian 3DGS PLY file.

    Args:
        data: Raw file bytes

    Returns:
        GaussianCloud with one primitive per vertex (normals are ignored)

    Raises:
        ParseError: If the header is malformed or the file is not binary little endian
        SchemaError: If the vertex element or a required property is missing
        DataError: If any value is NaN/Inf or the file holds no vertices
    """
    if not data.startswith(b"ply"):
        raise ParseError("not a PLY file (missing 'ply' magic)")
    try:
        ply = PlyData.read(io.BytesIO(data))
    except Exception as e:
        raise ParseError(f"malformed PLY: {e}")

    if ply.text or ply.byte_order != "<":
        raise ParseError("only binary_little_endian PLY is supported")

    try:
        vertex = ply["vertex"]
    except KeyError:
        raise SchemaError("missing element 'vertex'")

    present = {prop.name for prop in vertex.properties}
    for name in PROPERTY_NAMES:
        if name not in present:
            raise SchemaError(f"missing required property '{name}'")

    if vertex.count < 1:
        raise DataError("PLY holds no vertices")

    channels = {}
    for group, names in PROPERTY_GROUPS:
        if group == "normals":
            continue
        block = np.stack([np.asarray(vertex[name], dtype=np.float32) for name in names], axis=1)
        bad = ~np.isfinite(block)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise DataError(f"non-finite value in '{names[col]}' at vertex index {row}")
        channels[group] = block.astype(np.float64)

    return GaussianCloud(**channels)


def write_ply(cloud: GaussianCloud) -> bytes:
    """
    Emit a cloud as a binary-little-endian 3DGS PLY file.

    Values are stored as 32-bit floats, rounded to the nearest float32, so
    parse_ply(write_ply(cloud)) reproduces the cloud exactly only when every
    value is float32-representable.

    Args:
        cloud: Cloud to write

    Returns:
        PLY file bytes with zero normals

    Raises:
        DataError: If a finite value overflows float32
    """
    cloud.validate()
    columns = {
        "positions": cloud.positions,
        "normals": np.zeros((cloud.n, 3)),
        "color_dc": cloud.color_dc,
        "color_sh": cloud.color_sh,
        "opacity": cloud.opacity,
        "scale": cloud.scale,
        "rotation": cloud.rotation,
    }
    elements = np.empty(cloud.n, dtype=[(name, "<f4") for name in PROPERTY_NAMES])
    for group, names in PROPERTY_GROUPS:
        with np.errstate(over="ignore"):
            block = columns[group].astype(np.float32)
        bad = ~np.isfinite(block)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise DataError(f"value of '{names[col]}' at primitive {row} overflows float32")
        for i, name in enumerate(names):
            elements[name] = block[:, i]

    out = io.BytesIO()
    PlyData([PlyElement.describe(elements, "vertex")], text=False, byte_order="<").write(out)
    return out.getvalue()


def load_ply(path: str | Path) -> GaussianCloud:
    """Read and parse a PLY file from disk."""
    cloud = parse_ply(read_bytes(path))
    logger.info(f"[PLY] Loaded {cloud.n} primitives from {path}")
    return cloud


def save_ply(path: str | Path, cloud: GaussianCloud) -> None:
    Path(path).write_bytes(write_ply(cloud))
    logger.info(f"[PLY] Wrote {cloud.n} primitives to {path}")


def read_cameras(text: str) -> CameraList:
    """
    Parse a camera list, one `id tx ty tz r00 r01 ... r22` line per camera.

    Args:
        text: File contents; blank lines and '#' comments are skipped

    Returns:
        CameraList in file order

    Raises:
        ParseError: If a line has the wrong number of fields or a bad number
        DataError: If a rotation is not orthonormal within 1e-6
    """
    entries = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 13:
            raise ParseError(f"camera line {line_no}: expected 13 fields, got {len(parts)}")
        try:
            cam_id = int(parts[0])
            values = [float(p) for p in parts[1:]]
        except ValueError:
            raise ParseError(f"camera line {line_no}: invalid number")

        rotation = np.array(values[3:], dtype=np.float64).reshape(3, 3)
        if not np.allclose(rotation @ rotation.T, np.eye(3), rtol=0.0, atol=ORTHONORMAL_TOLERANCE):
            raise DataError(f"camera {cam_id}: rotation is not orthonormal")
        entries.append(Camera(id=cam_id, center=values[:3], rotation=rotation))

    return CameraList(entries=entries)


def write_cameras(cams: CameraList) -> str:
    lines = []
    for cam in cams:
        values = [*cam.center.tolist(), *cam.rotation.reshape(-1).tolist()]
        lines.append(" ".join([str(cam.id), *(repr(float(v)) for v in values)]))
    return "\n".join(lines) + ("\n" if lines else "")


def load_cameras(path: str | Path) -> CameraList:
    return read_cameras(read_bytes(path).decode("utf-8"))


def save_cameras(path: str | Path, cams: CameraList) -> None:
    Path(path).write_text(write_cameras(cams))


def read_bytes(path: str | Path) -> bytes:
    """Read a whole input file; a missing or unreadable file is an InputFileError."""
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise InputFileError(f"cannot read {path}: {e.strerror or e}")
