"""
Per-tile half-open ranges into the sorted key array
"""

from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class TileRanges:
    """starts[t]..ends[t] indexes the splats of tile t; empty tiles have start == end"""

    starts: np.ndarray  # (T,) int64
    ends: np.ndarray    # (T,) int64

    def __len__(self) -> int:
        return int(self.starts.shape[0])

    def __getitem__(self, tile_id: int) -> tuple:
        return int(self.starts[tile_id]), int(self.ends[tile_id])

    def count(self, tile_id: int) -> int:
        return int(self.ends[tile_id] - self.starts[tile_id])

    def non_empty(self) -> np.ndarray:
        return np.flatnonzero(self.ends > self.starts)


def tile_ranges(sorted_keys: np.ndarray, num_tiles: int) -> TileRanges:
    """
    Derive contiguous per-tile ranges from sorted keys.

    Ranges are ordered by tile id and partition the key array, so an empty
    tile sits at the position where its keys would have been.

    Raises:
        ValueError: tile id outside the grid
    """
    tiles = (np.asarray(sorted_keys, dtype=np.uint64) >> np.uint64(32)).astype(np.int64)
    if tiles.size and tiles[-1] >= num_tiles:
        raise ValueError(f"tile id {int(tiles[-1])} outside grid of {num_tiles} tiles")
    counts = np.bincount(tiles, minlength=num_tiles).astype(np.int64)
    ends = np.cumsum(counts)
    return TileRanges(starts=ends - counts, ends=ends)
