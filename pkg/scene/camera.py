"""
Camera description files.

Plain-text key-value document, one `key = value` pair per line, `#` starts
a comment. Schema is documented in docs/CAMERA_FORMAT.md.
"""

import math
import logging
from typing import Optional

from .types import Camera

INTRINSIC_KEYS = ('fx', 'fy', 'cx', 'cy')
FOV_KEYS = ('fov_x', 'fov_y')
DEFAULT_NEAR_PLANE = 0.2


class CameraFormatError(ValueError):
    """Invalid camera description"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(message if field is None else f"{message}: '{field}'")


def focal_from_fov(dim: int, fov: float) -> float:
    """focal = dim / (2 tan(fov / 2)), fov in radians"""
    return dim / (2.0 * math.tan(fov / 2.0))


def _parse_pairs(text: str) -> dict:
    fields = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise CameraFormatError(f"line {number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split('=', 1))
        if key in fields:
            raise CameraFormatError("duplicate field", key)
        fields[key] = value
    return fields


def _number(fields: dict, key: str) -> float:
    if key not in fields:
        raise CameraFormatError("missing field", key)
    try:
        return float(fields[key])
    except ValueError:
        raise CameraFormatError("not a number", key)


def _integer(fields: dict, key: str) -> int:
    value = _number(fields, key)
    if value != int(value):
        raise CameraFormatError("not an integer", key)
    return int(value)


def parse_camera(text: str) -> Camera:
    """
    Parse a camera description document.

    Either all of fx, fy, cx, cy or both of fov_x, fov_y must be present.
    With field-of-view input the principal point defaults to the image
    center ((width - 1) / 2, (height - 1) / 2) unless cx / cy are given.

    Raises:
        CameraFormatError: missing field, non-positive focal or resolution
    """
    fields = _parse_pairs(text)

    width = _integer(fields, 'width')
    height = _integer(fields, 'height')
    if width <= 0 or height <= 0:
        raise CameraFormatError("non-positive resolution")

    if all(k in fields for k in FOV_KEYS) and 'fx' not in fields:
        fov_x, fov_y = _number(fields, 'fov_x'), _number(fields, 'fov_y')
        if not (0.0 < fov_x < math.pi and 0.0 < fov_y < math.pi):
            raise CameraFormatError("field of view out of range")
        focal_x, focal_y = focal_from_fov(width, fov_x), focal_from_fov(height, fov_y)
        cx = _number(fields, 'cx') if 'cx' in fields else (width - 1) / 2.0
        cy = _number(fields, 'cy') if 'cy' in fields else (height - 1) / 2.0
    else:
        focal_x, focal_y = _number(fields, 'fx'), _number(fields, 'fy')
        cx, cy = _number(fields, 'cx'), _number(fields, 'cy')
    if not (focal_x > 0.0 and focal_y > 0.0):
        raise CameraFormatError("non-positive focal length")

    if 'world_to_camera' not in fields:
        raise CameraFormatError("missing field", 'world_to_camera')
    try:
        matrix = tuple(float(v) for v in fields['world_to_camera'].replace(',', ' ').split())
    except ValueError:
        raise CameraFormatError("not a number", 'world_to_camera')
    if len(matrix) != 16:
        raise CameraFormatError(f"expected 16 numbers, got {len(matrix)}", 'world_to_camera')

    near_plane = _number(fields, 'near_plane') if 'near_plane' in fields else DEFAULT_NEAR_PLANE
    if near_plane <= 0.0:
        raise CameraFormatError("non-positive near plane", 'near_plane')

    return Camera(
        world_to_camera=matrix,
        focal_x=focal_x,
        focal_y=focal_y,
        cx=cx,
        cy=cy,
        width=width,
        height=height,
        near_plane=near_plane,
    )


def load_camera(path: str) -> Camera:
    """
    Load a camera description file.

    Args:
        path: Path to the key-value document

    Returns:
        Camera with invariants satisfied
    """
    with open(path, 'r', encoding='utf-8') as f:
        camera = parse_camera(f.read())
    logging.info(f"Loaded camera {camera.width}x{camera.height} from {path}")
    return camera


def format_camera(camera: Camera) -> str:
    """Serialize a camera; floats use repr so parsing restores them exactly"""
    matrix = ' '.join(repr(float(v)) for v in camera.world_to_camera)
    return '\n'.join([
        f"width = {camera.width}",
        f"height = {camera.height}",
        f"fx = {float(camera.focal_x)!r}",
        f"fy = {float(camera.focal_y)!r}",
        f"cx = {float(camera.cx)!r}",
        f"cy = {float(camera.cy)!r}",
        f"near_plane = {float(camera.near_plane)!r}",
        f"world_to_camera = {matrix}",
        '',
    ])


def save_camera(camera: Camera, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_camera(camera))
