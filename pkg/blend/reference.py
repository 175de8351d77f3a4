"""
Reference per-pixel blending.

Every pixel walks the tile's depth-sorted splat list, evaluates the
Gaussian power directly and composites front to back until its
transmittance falls below the early-stop threshold.
"""

from typing import Sequence, Union

import numpy as np
from numba import jit

from backend_config import get_backend_config
from scene.types import Splat2D, SplatTable
from utils.jit import JIT_OPTIONS
from .state import PixelState, TileResult, composite, DEFAULT_EARLY_STOP_T

MACS_PER_PAIR = get_backend_config('reference')['macs_per_pair']


def power_ref(conic, delta):
    """
    Gaussian exponent -1/2 (A dx^2 + C dy^2) - B dx dy.

    Works on scalars and on broadcastable numpy arrays.

    Args:
        conic: (A, B, C)
        delta: (dx, dy) = pixel - splat center

    Example:
        >>> power_ref((1.0, 0.0, 1.0), (1.0, 1.0))
        -1.0
    """
    a, b, c = conic
    dx, dy = delta
    return -0.5 * (a * dx * dx + c * dy * dy) - b * dx * dy


@jit(**JIT_OPTIONS)
def _power32(a, b, c, dx, dy):
    return np.float32(-0.5) * (a * dx * dx + c * dy * dy) - b * dx * dy


@jit(**JIT_OPTIONS)
def reference_batch(origin_x, origin_y, tile_size, centers, conics, opacities, colors,
                    transmittance, color, done, t_min):
    """Blend one batch of splats into the tile state. Returns evaluated pairs."""
    evaluated = 0
    count = centers.shape[0]
    for j in range(tile_size * tile_size):
        if done[j]:
            continue
        px = np.float32(origin_x + j % tile_size)
        py = np.float32(origin_y + j // tile_size)
        for i in range(count):
            dx = px - centers[i, 0]
            dy = py - centers[i, 1]
            power = _power32(conics[i, 0], conics[i, 1], conics[i, 2], dx, dy)
            evaluated += 1
            if power > 0.0:
                continue
            if composite(j, power, opacities[i], colors, i, transmittance, color, done, t_min):
                break
    return evaluated


def as_table(splats: Union[SplatTable, Sequence[Splat2D]]) -> SplatTable:
    if isinstance(splats, SplatTable):
        return splats
    return SplatTable.from_splats(list(splats))


def blend_tile_ref(splats: Union[SplatTable, Sequence[Splat2D]], tile_origin: tuple,
                   background=(0.0, 0.0, 0.0), tile_size: int = 16,
                   t_min: float = DEFAULT_EARLY_STOP_T) -> tuple:
    """
    Blend a depth-sorted splat list over one tile.

    Args:
        splats: Splats sorted front to back
        tile_origin: (x0, y0) pixel coordinates of the tile's top-left pixel
        background: RGB added with the remaining transmittance
        tile_size: Tile edge length in pixels
        t_min: Early-stop transmittance threshold

    Returns:
        (rgb (ts, ts, 3), transmittance (ts, ts))
    """
    result = blend_tile_ref_result(as_table(splats), tile_origin, tile_size, t_min)
    return result.finalize(background)


def blend_tile_ref_result(table: SplatTable, tile_origin: tuple, tile_size: int = 16,
                          t_min: float = DEFAULT_EARLY_STOP_T) -> TileResult:
    state = PixelState.fresh(tile_size * tile_size)
    pairs = 0
    if len(table):
        pairs = reference_batch(
            np.int64(tile_origin[0]), np.int64(tile_origin[1]), np.int64(tile_size),
            np.ascontiguousarray(table.centers), np.ascontiguousarray(table.conics),
            np.ascontiguousarray(table.opacities), np.ascontiguousarray(table.colors),
            state.transmittance, state.color, state.done, np.float32(t_min),
        )
    return TileResult(tile_size=tile_size, state=state, macs=MACS_PER_PAIR * int(pairs),
                      pairs=int(pairs), batches=1 if len(table) else 0)
