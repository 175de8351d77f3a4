"""
Gaussian scene I/O in the de-facto 3DGS point-cloud export layout.

Vertex properties, in file order:
    x, y, z, nx, ny, nz, f_dc_0..2, f_rest_0..(3k-1), opacity,
    scale_0..2, rot_0..3
where k = (degree + 1)^2 - 1 rest coefficients per channel, grouped
channel-major (all red, then all green, then all blue). Normals are
carried through untouched and never used.
"""

import os
import logging
from typing import Optional

import numpy as np
from plyfile import PlyData, PlyElement, PlyElementParseError, PlyHeaderParseError

from .types import GaussianScene, SH_COEFFS, inverse_sigmoid

POSITION_PROPS = ('x', 'y', 'z')
NORMAL_PROPS = ('nx', 'ny', 'nz')
DC_PROPS = ('f_dc_0', 'f_dc_1', 'f_dc_2')
SCALE_PROPS = ('scale_0', 'scale_1', 'scale_2')
ROTATION_PROPS = ('rot_0', 'rot_1', 'rot_2', 'rot_3')
REQUIRED_PROPS = POSITION_PROPS + DC_PROPS + ('opacity',) + SCALE_PROPS + ROTATION_PROPS

# f_rest count -> SH degree
REST_COUNT_TO_DEGREE = {0: 0, 9: 1, 24: 2, 45: 3}

ROTATION_UNIT_TOL = 1e-5


class SceneFormatError(ValueError):
    """Malformed or invalid scene file, located by byte offset and property."""

    def __init__(self, message: str, offset: Optional[int] = None, property_name: Optional[str] = None):
        self.offset = offset
        self.property_name = property_name
        where = []
        if offset is not None:
            where.append(f"byte {offset}")
        if property_name is not None:
            where.append(f"property '{property_name}'")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


def _header_lines(raw: bytes) -> list:
    """Header lines (with newlines) up to and including end_header"""
    end = raw.find(b'end_header')
    if end < 0:
        return raw.splitlines(keepends=True)
    newline = raw.find(b'\n', end)
    stop = len(raw) if newline < 0 else newline + 1
    return raw[:stop].splitlines(keepends=True)


def _line_offset(lines: list, line_number: Optional[int]) -> int:
    if not line_number:
        return 0
    return sum(len(line) for line in lines[:max(0, line_number - 1)])


def _element_line_offset(lines: list, element_name: str) -> int:
    offset = 0
    for line in lines:
        if line.split()[:2] == [b'element', element_name.encode()]:
            return offset
        offset += len(line)
    return 0


class _Locator:
    """Maps (row, property) to byte offsets for binary payloads."""

    def __init__(self, header_len: int, element, binary: bool, byte_order: str):
        self.header_len = header_len
        self.binary = binary
        self.dtype = element.dtype(byte_order) if binary else None

    def offset(self, row: int, prop: Optional[str] = None) -> Optional[int]:
        if not self.binary:
            return None
        base = self.header_len + row * self.dtype.itemsize
        if prop is not None:
            base += self.dtype.fields[prop][1]
        return base

    def truncation(self, file_size: int):
        """Offset and property where the payload runs out"""
        available = file_size - self.header_len
        row, within = divmod(available, self.dtype.itemsize)
        for name in self.dtype.names:
            start = self.dtype.fields[name][1]
            if start + self.dtype.fields[name][0].itemsize > within:
                return self.header_len + row * self.dtype.itemsize + start, name
        return file_size, None


def load_scene(path: str) -> GaussianScene:
    """
    Load a trained Gaussian scene and apply activations.

    Args:
        path: Path to the point-cloud file

    Returns:
        GaussianScene with exp scales, sigmoid opacities and unit rotations

    Raises:
        SceneFormatError: malformed header, missing property, truncated
            payload, non-finite value or violated activation invariant
    """
    with open(path, 'rb') as f:
        raw_bytes = f.read()
    lines = _header_lines(raw_bytes)
    header_len = sum(len(line) for line in lines)

    try:
        with open(path, 'rb') as f:
            ply = PlyData.read(f, mmap=False)
    except PlyHeaderParseError as e:
        line = getattr(e, 'line', None)
        raise SceneFormatError(f"malformed header: {getattr(e, 'message', e)}",
                               offset=_line_offset(lines, line)) from e
    except PlyElementParseError as e:
        element = getattr(e, 'element', None)
        if element is not None and _is_binary(lines):
            locator = _Locator(header_len, element, True, _byte_order(lines))
            offset, prop = locator.truncation(len(raw_bytes))
            raise SceneFormatError(f"truncated payload in element '{element.name}'",
                                   offset=offset, property_name=prop) from e
        prop = getattr(e, 'prop', None)
        raise SceneFormatError(f"malformed payload: {getattr(e, 'message', e)}",
                               offset=header_len,
                               property_name=getattr(prop, 'name', None)) from e

    if 'vertex' not in ply:
        raise SceneFormatError("missing element 'vertex'", offset=0)

    element = ply['vertex']
    names = [p.name for p in element.properties]
    element_offset = _element_line_offset(lines, 'vertex')
    for name in REQUIRED_PROPS:
        if name not in names:
            raise SceneFormatError("missing required property", offset=element_offset, property_name=name)

    rest_names = [n for n in names if n.startswith('f_rest_')]
    if len(rest_names) not in REST_COUNT_TO_DEGREE:
        raise SceneFormatError(f"unsupported f_rest count {len(rest_names)}", offset=element_offset,
                               property_name='f_rest_0')
    for k in range(len(rest_names)):
        if f"f_rest_{k}" not in names:
            raise SceneFormatError("missing required property", offset=element_offset,
                                   property_name=f"f_rest_{k}")
    degree = REST_COUNT_TO_DEGREE[len(rest_names)]

    data = element.data
    count = element.count
    if len(data) != count:
        raise SceneFormatError(f"expected {count} records, got {len(data)}", offset=header_len)

    locator = _Locator(header_len, element, _is_binary(lines), _byte_order(lines))

    def column(name: str) -> np.ndarray:
        values = np.asarray(data[name], dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise SceneFormatError(f"non-finite value in record {int(bad[0])}",
                                   offset=locator.offset(int(bad[0]), name), property_name=name)
        return values

    positions = np.stack([column(n) for n in POSITION_PROPS], axis=1)

    log_scales = np.stack([column(n) for n in SCALE_PROPS], axis=1)
    with np.errstate(over='ignore', under='ignore'):
        scales = np.exp(log_scales)
    bad_row, bad_col = _first_bad(~(np.isfinite(scales) & (scales > 0.0)))
    if bad_row is not None:
        raise SceneFormatError(f"scale activation out of range in record {bad_row}",
                               offset=locator.offset(bad_row, SCALE_PROPS[bad_col]),
                               property_name=SCALE_PROPS[bad_col])

    logits = column('opacity')
    with np.errstate(over='ignore'):
        opacities = 1.0 / (1.0 + np.exp(-logits))
    bad = np.flatnonzero(~((opacities > 0.0) & (opacities < 1.0)))
    if bad.size:
        raise SceneFormatError(f"opacity saturates in record {int(bad[0])}",
                               offset=locator.offset(int(bad[0]), 'opacity'), property_name='opacity')

    quats = np.stack([column(n) for n in ROTATION_PROPS], axis=1)
    norms = np.linalg.norm(quats, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise SceneFormatError(f"zero-norm rotation in record {int(bad[0])}",
                               offset=locator.offset(int(bad[0]), 'rot_0'), property_name='rot_0')
    renormalized = int(np.count_nonzero(np.abs(norms - 1.0) > ROTATION_UNIT_TOL))
    if renormalized:
        logging.warning(f"Normalized {renormalized} non-unit rotations in {os.path.basename(path)}")
    rotations = quats / norms[:, None]

    sh = np.zeros((count, SH_COEFFS, 3), dtype=np.float64)
    sh[:, 0, :] = np.stack([column(n) for n in DC_PROPS], axis=1)
    per_channel = len(rest_names) // 3
    for channel in range(3):
        for k in range(per_channel):
            sh[:, 1 + k, channel] = column(f"f_rest_{channel * per_channel + k}")

    logging.info(f"Loaded {count} Gaussians (SH degree {degree}) from {path}")

    return GaussianScene(
        positions=positions,
        scales=scales,
        rotations=rotations,
        opacities=opacities,
        sh=sh,
        sh_degree=degree,
        raw=np.array(data),
    )


def save_scene(scene: GaussianScene, path: str, text: bool = False) -> None:
    """
    Serialize a scene in the export layout.

    Loaded scenes write back their raw record (bit-exact round trip);
    in-memory scenes go through inverse activations.

    Args:
        scene: Scene to write
        path: Output path
        text: Write the ASCII variant instead of binary little-endian
    """
    if scene.raw is not None and len(scene.raw) == len(scene):
        record = scene.raw
    else:
        record = _encode_record(scene)

    element = PlyElement.describe(record, 'vertex')
    PlyData([element], text=text, byte_order='<').write(path)
    logging.debug(f"Wrote {len(scene)} Gaussians to {path} ({'ascii' if text else 'binary'})")


def _encode_record(scene: GaussianScene) -> np.ndarray:
    per_channel = (scene.sh_degree + 1) ** 2 - 1
    rest_names = [f"f_rest_{k}" for k in range(3 * per_channel)]
    names = list(POSITION_PROPS + NORMAL_PROPS + DC_PROPS) + rest_names + ['opacity'] + \
        list(SCALE_PROPS + ROTATION_PROPS)
    record = np.zeros(len(scene), dtype=[(n, '<f4') for n in names])

    for i, n in enumerate(POSITION_PROPS):
        record[n] = scene.positions[:, i]
    for i, n in enumerate(DC_PROPS):
        record[n] = scene.sh[:, 0, i]
    for channel in range(3):
        for k in range(per_channel):
            record[f"f_rest_{channel * per_channel + k}"] = scene.sh[:, 1 + k, channel]
    record['opacity'] = inverse_sigmoid(scene.opacities)
    for i, n in enumerate(SCALE_PROPS):
        record[n] = np.log(scene.scales[:, i])
    for i, n in enumerate(ROTATION_PROPS):
        record[n] = scene.rotations[:, i]
    return record


def _first_bad(mask: np.ndarray):
    hits = np.argwhere(mask)
    if hits.size == 0:
        return None, None
    return int(hits[0][0]), int(hits[0][1])


def _is_binary(lines: list) -> bool:
    for line in lines:
        parts = line.split()
        if parts[:1] == [b'format']:
            return len(parts) > 1 and parts[1] != b'ascii'
    return False


def _byte_order(lines: list) -> str:
    for line in lines:
        parts = line.split()
        if parts[:1] == [b'format'] and len(parts) > 1:
            return '>' if parts[1] == b'binary_big_endian' else '<'
    return '<'
