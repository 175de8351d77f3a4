"""
Matrix-multiply formulation of the Gaussian exponent.

For a pixel p and splat g with Δ = p - g split around a per-tile reference
pixel c into Δ = (p - c) + (c - g) = x̄ + x̂, the exponent expands to a dot
product of a per-splat vector

    v_g = [-A/2, -C/2, -B, -A x̂ - B ŷ, -C ŷ - B x̂, -A x̂²/2 - C ŷ²/2 - B x̂ ŷ]

with a per-pixel column

    v_p = [x̄², ȳ², x̄ ȳ, x̄, ȳ, 1]

that is identical for every tile. Stacking a batch of splats into M_g and all
tile pixels into M_p turns power evaluation into one GEMM per batch.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from numba import jit

from backend_config import KERNEL_SHAPE, REFERENCE_PIXELS, get_precision_config
from scene.types import Splat2D, SplatTable
from utils.jit import JIT_OPTIONS
from .state import PixelState, TileResult, composite, DEFAULT_EARLY_STOP_T

ROW_BLOCK = KERNEL_SHAPE['row_block']
COL_BLOCK = KERNEL_SHAPE['col_block']
INNER = KERNEL_SHAPE['inner']
VECTOR_LEN = 6

# positive powers up to this value are float32 cancellation around Δ = 0
POWER_CLAMP = 1e-4

# (tile_size, reference) -> PixelMatrix
_pixel_matrix_cache: Dict[Tuple[int, str], 'PixelMatrix'] = {}
_cache_lock = threading.Lock()


def round_up(n: int, block: int) -> int:
    return -(-n // block) * block


def reference_offset(tile_size: int, reference: str = 'top_left') -> Tuple[int, int]:
    """Position of the reference pixel inside a tile"""
    if reference not in REFERENCE_PIXELS:
        raise ValueError(f"unknown reference pixel '{reference}'")
    if reference == 'center':
        return tile_size // 2, tile_size // 2
    return 0, 0


@dataclass(frozen=True, eq=False)
class PixelMatrix:
    """
    Per-pixel operand shared by every tile.

    `matrix` is the 6 x P form; `padded` adds two zero rows and pads the
    columns to the kernel's column block so it feeds gemm_block directly.
    Both arrays are read-only.
    """

    tile_size: int
    reference: str
    matrix: np.ndarray  # (6, P) float32
    padded: np.ndarray  # (8, P_pad) float32

    @property
    def pixels(self) -> int:
        return self.tile_size * self.tile_size

    @property
    def origin_offset(self) -> Tuple[int, int]:
        return reference_offset(self.tile_size, self.reference)


def build_pixel_matrix(tile_size: int, reference: str = 'top_left') -> PixelMatrix:
    """
    Build (or fetch from cache) the pixel matrix for a tile size.

    Columns are ordered row-major over the tile. With the top-left reference
    every entry is a small exact integer.

    Example:
        >>> build_pixel_matrix(1).matrix[:, 0]
        array([0., 0., 0., 0., 0., 1.], dtype=float32)
    """
    if tile_size < 1:
        raise ValueError("tile_size must be >= 1")
    key = (int(tile_size), reference)
    with _cache_lock:
        cached = _pixel_matrix_cache.get(key)
        if cached is not None:
            return cached

        ox, oy = reference_offset(tile_size, reference)
        ys, xs = np.divmod(np.arange(tile_size * tile_size, dtype=np.int64), tile_size)
        xb = (xs - ox).astype(np.float64)
        yb = (ys - oy).astype(np.float64)
        matrix = np.stack([xb * xb, yb * yb, xb * yb, xb, yb, np.ones_like(xb)]).astype(np.float32)

        padded = np.zeros((INNER, round_up(matrix.shape[1], COL_BLOCK)), dtype=np.float32)
        padded[:VECTOR_LEN, :matrix.shape[1]] = matrix
        matrix.setflags(write=False)
        padded.setflags(write=False)

        built = PixelMatrix(tile_size=int(tile_size), reference=reference, matrix=matrix, padded=padded)
        _pixel_matrix_cache[key] = built
        logging.debug(f"Built pixel matrix for tile_size={tile_size} reference={reference}")
        return built


def gaussian_vector_from_offset(conic, offset) -> np.ndarray:
    """
    Per-splat vector for a conic and offset (x̂, ŷ) = reference - center.

    Example:
        >>> gaussian_vector_from_offset((2.0, 1.0, 3.0), (1.0, 2.0))
        array([-1. , -1.5, -1. , -4. , -7. , -9. ])
    """
    a, b, c = (float(v) for v in conic)
    xh, yh = (float(v) for v in offset)
    return np.array([
        -0.5 * a,
        -0.5 * c,
        -b,
        -a * xh - b * yh,
        -c * yh - b * xh,
        -0.5 * a * xh * xh - 0.5 * c * yh * yh - b * xh * yh,
    ], dtype=np.float64)


def build_gaussian_vector(splat: Splat2D, tile_origin: tuple, tile_size: int = 16,
                          reference: str = 'top_left') -> np.ndarray:
    """Per-splat vector against the reference pixel of the tile at tile_origin"""
    ox, oy = reference_offset(tile_size, reference)
    ref_x = float(tile_origin[0] + ox)
    ref_y = float(tile_origin[1] + oy)
    return gaussian_vector_from_offset(
        splat.conic, (ref_x - splat.center[0], ref_y - splat.center[1])
    )


def build_gaussian_matrix(conics: np.ndarray, centers: np.ndarray, reference_point: tuple,
                          rows: int, dtype=np.float32) -> np.ndarray:
    """
    Stack per-splat vectors into the padded (rows, 8) operand.

    Rows beyond the batch and the two trailing columns stay zero. The
    vectors are formed in double precision and stored as `dtype`.
    """
    count = conics.shape[0]
    m_g = np.zeros((rows, INNER), dtype=dtype)
    if count == 0:
        return m_g
    a = conics[:, 0].astype(np.float64)
    b = conics[:, 1].astype(np.float64)
    c = conics[:, 2].astype(np.float64)
    xh = float(reference_point[0]) - centers[:, 0].astype(np.float64)
    yh = float(reference_point[1]) - centers[:, 1].astype(np.float64)
    m_g[:count, 0] = -0.5 * a
    m_g[:count, 1] = -0.5 * c
    m_g[:count, 2] = -b
    m_g[:count, 3] = -a * xh - b * yh
    m_g[:count, 4] = -c * yh - b * xh
    m_g[:count, 5] = -0.5 * a * xh * xh - 0.5 * c * yh * yh - b * xh * yh
    return m_g


@jit(**JIT_OPTIONS)
def _gemm_kernel(a, b, out):
    rows, inner = a.shape
    cols = b.shape[1]
    for r0 in range(0, rows, ROW_BLOCK):
        for c0 in range(0, cols, COL_BLOCK):
            for r in range(r0, r0 + ROW_BLOCK):
                for col in range(c0, c0 + COL_BLOCK):
                    acc = np.float32(0.0)
                    for k in range(inner):
                        acc += a[r, k] * b[k, col]
                    out[r, col] = acc


def round_operand(m: np.ndarray, precision: str) -> np.ndarray:
    """Round operand entries to the storage type of a precision mode"""
    mode = get_precision_config(precision)
    if not mode:
        raise ValueError(f"unknown precision '{precision}'")
    if mode['operand_dtype'] == 'float16':
        return m.astype(np.float16).astype(np.float32)
    return m


def gemm_block(m_g: np.ndarray, m_p: np.ndarray, precision: str = 'full') -> np.ndarray:
    """
    Power matrix M_g @ M_p through the 16x8 blocked micro-kernel.

    Operands are zero-padded to whole blocks (inner dimension to 8) and the
    result is cropped back to (b, P). Accumulation is single precision; in
    'mixed' mode the operands are first rounded to half precision.

    Args:
        m_g: (b, k) per-splat vectors, k <= 8
        m_p: (k, P) pixel matrix
        precision: 'full' or 'mixed'

    Raises:
        ValueError: dimension mismatch or unknown precision
    """
    m_g = np.asarray(m_g, dtype=np.float32)
    m_p = np.asarray(m_p, dtype=np.float32)
    if m_g.ndim != 2 or m_p.ndim != 2:
        raise ValueError("gemm_block operands must be 2-D")
    if m_g.shape[1] != m_p.shape[0]:
        raise ValueError(f"dimension mismatch: {m_g.shape} x {m_p.shape}")
    if m_g.shape[1] > INNER:
        raise ValueError(f"inner dimension {m_g.shape[1]} exceeds {INNER}")

    rows, inner = m_g.shape
    cols = m_p.shape[1]
    a = np.zeros((round_up(max(rows, 1), ROW_BLOCK), INNER), dtype=np.float32)
    b = np.zeros((INNER, round_up(max(cols, 1), COL_BLOCK)), dtype=np.float32)
    a[:rows, :inner] = round_operand(m_g, precision)
    b[:inner, :cols] = round_operand(m_p, precision)
    out = np.empty((a.shape[0], b.shape[1]), dtype=np.float32)
    _gemm_kernel(a, b, out)
    return out[:rows, :cols]


def gemm_padded(m_g: np.ndarray, m_p_padded: np.ndarray) -> np.ndarray:
    """Kernel call on operands already padded to whole blocks"""
    out = np.empty((m_g.shape[0], m_p_padded.shape[1]), dtype=np.float32)
    _gemm_kernel(m_g, m_p_padded, out)
    return out


@jit(**JIT_OPTIONS)
def composite_powers(powers, count, opacities, colors, transmittance, color, done, t_min, clamp):
    """Front-to-back compositing from a precomputed power matrix; rows >= count are padding"""
    pixels = transmittance.shape[0]
    for j in range(pixels):
        if done[j]:
            continue
        for i in range(count):
            power = powers[i, j]
            if power != power:
                # half-precision overflow
                continue
            if power > 0.0:
                if power > clamp:
                    continue
                power = np.float32(0.0)
            if composite(j, power, opacities[i], colors, i, transmittance, color, done, t_min):
                break


def blend_tile_gemm(splats: Union[SplatTable, Sequence[Splat2D]], tile_origin: tuple,
                    pixel_matrix: PixelMatrix = None, batch_size: int = 256,
                    background=(0.0, 0.0, 0.0), precision: str = 'full',
                    t_min: float = DEFAULT_EARLY_STOP_T) -> tuple:
    """
    Blend a depth-sorted splat list over one tile through the GEMM path.

    Compositing rules match blend_tile_ref; powers come from the batch
    power matrix. Once every pixel has terminated the remaining batches are
    skipped.

    Returns:
        (rgb (ts, ts, 3), transmittance (ts, ts))
    """
    from .pipeline import GemmBackend, TileWork, staged_tile_pipeline
    from .reference import as_table

    if pixel_matrix is None:
        pixel_matrix = build_pixel_matrix(16)
    table = as_table(splats)
    work = TileWork(tile_id=0, origin=(int(tile_origin[0]), int(tile_origin[1])),
                    indices=np.arange(len(table), dtype=np.int32))
    backend = GemmBackend(pixel_matrix, batch_size=batch_size, precision=precision, t_min=t_min)
    result = staged_tile_pipeline(work, table, backend, batch_size=batch_size)
    return result.finalize(background)
