"""
Tile grid and splat/tile intersection
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from scene.types import Splat2D, SplatTable

# sqrt(2 ln 255) ~= 3.329 is the Mahalanobis radius where alpha falls to 1/255
# for opacity 1; 3.33 keeps the box conservative for every opacity.
DEFAULT_SIGMA_EXTENT = 3.33


@dataclass(frozen=True)
class TileGrid:
    tile_size: int
    tiles_x: int
    tiles_y: int

    def __post_init__(self):
        if self.tile_size < 1:
            raise ValueError("tile_size must be >= 1")
        if self.tiles_x * self.tiles_y < 1:
            raise ValueError("tile grid is empty")

    @classmethod
    def for_frame(cls, width: int, height: int, tile_size: int = 16) -> 'TileGrid':
        if tile_size < 1:
            raise ValueError("tile_size must be >= 1")
        return cls(tile_size, -(-width // tile_size), -(-height // tile_size))

    @property
    def num_tiles(self) -> int:
        return self.tiles_x * self.tiles_y

    def tile_origin(self, tile_id: int) -> tuple:
        """Pixel coordinates of the tile's top-left pixel"""
        ty, tx = divmod(int(tile_id), self.tiles_x)
        return tx * self.tile_size, ty * self.tile_size


@dataclass(frozen=True)
class TouchedTiles:
    """Inclusive tile rectangle"""

    tx_min: int
    tx_max: int
    ty_min: int
    ty_max: int

    @property
    def count(self) -> int:
        return (self.tx_max - self.tx_min + 1) * (self.ty_max - self.ty_min + 1)

    def tile_ids(self, grid: TileGrid) -> list:
        return [ty * grid.tiles_x + tx
                for ty in range(self.ty_min, self.ty_max + 1)
                for tx in range(self.tx_min, self.tx_max + 1)]


def sigma_max(conics: np.ndarray) -> np.ndarray:
    """Square root of the largest eigenvalue of the 2D covariance, from its conic"""
    a = conics[:, 0].astype(np.float64)
    b = conics[:, 1].astype(np.float64)
    c = conics[:, 2].astype(np.float64)
    det = a * c - b * b
    # covariance = [[c, -b], [-b, a]] / det
    cov_xx, cov_yy = c / det, a / det
    mid = 0.5 * (cov_xx + cov_yy)
    cov_det = 1.0 / det
    lam = mid + np.sqrt(np.maximum(mid * mid - cov_det, 0.0))
    return np.sqrt(lam)


def touched_tiles_batch(table: SplatTable, grid: TileGrid,
                        sigma_extent: float = DEFAULT_SIGMA_EXTENT) -> tuple:
    """
    Tile rectangles for all splats.

    Returns:
        (rects, counts): rects (N, 4) int32 as (tx_min, tx_max, ty_min, ty_max),
        counts (N,) int64; a zero count means the splat touches no tile
    """
    n = len(table)
    if n == 0:
        return np.zeros((0, 4), dtype=np.int32), np.zeros(0, dtype=np.int64)

    radius = sigma_extent * sigma_max(table.conics)
    x = table.centers[:, 0].astype(np.float64)
    y = table.centers[:, 1].astype(np.float64)
    ts = grid.tile_size

    tx_min = np.floor((x - radius) / ts)
    tx_max = np.floor((x + radius) / ts)
    ty_min = np.floor((y - radius) / ts)
    ty_max = np.floor((y + radius) / ts)

    outside = (tx_max < 0) | (ty_max < 0) | (tx_min > grid.tiles_x - 1) | (ty_min > grid.tiles_y - 1)
    tx_min = np.clip(tx_min, 0, grid.tiles_x - 1)
    ty_min = np.clip(ty_min, 0, grid.tiles_y - 1)
    tx_max = np.clip(tx_max, 0, grid.tiles_x - 1)
    ty_max = np.clip(ty_max, 0, grid.tiles_y - 1)

    rects = np.stack([tx_min, tx_max, ty_min, ty_max], axis=1).astype(np.int32)
    counts = ((tx_max - tx_min + 1) * (ty_max - ty_min + 1)).astype(np.int64)
    counts[outside] = 0
    return rects, counts


def touched_tiles(s: Splat2D, grid: TileGrid,
                  sigma_extent: float = DEFAULT_SIGMA_EXTENT) -> Optional[TouchedTiles]:
    """
    Tiles overlapping the box center +/- sigma_extent * sigma_max, clipped to the grid.

    The vanilla rasterizer uses a 3 sigma box; pass sigma_extent=3.0 (or set
    GEMM_SPLAT_SIGMA_EXTENT=3.0) to reproduce it. That box can drop the faint
    rim of a splat with opacity near 1, which the default keeps.

    Returns:
        TouchedTiles, or None when the box misses the grid (splat dropped)
    """
    rects, counts = touched_tiles_batch(SplatTable.from_splats([s]), grid, sigma_extent)
    if counts[0] == 0:
        return None
    return TouchedTiles(*(int(v) for v in rects[0]))

