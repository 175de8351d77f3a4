"""
Duplication of splats into per-tile sort keys.

Key layout: tile id in the high 32 bits, the binary32 pattern of the
(strictly positive) depth in the low 32 bits. For positive floats the
unsigned bit pattern orders like the value, so sorting keys groups splats
by tile and orders each group front to back.
"""

import logging

import numpy as np
from numba import jit

from utils.jit import JIT_OPTIONS


class DuplicationCapacityError(ValueError):
    """Duplicated key count exceeds the configured capacity"""

    def __init__(self, required: int, capacity: int):
        self.required = required
        self.capacity = capacity
        super().__init__(f"duplication needs {required} keys, capacity is {capacity}")


def depth_bits(depths: np.ndarray) -> np.ndarray:
    """Reinterpret positive binary32 depths as sortable uint32"""
    depths = np.ascontiguousarray(depths, dtype=np.float32)
    if depths.size and not np.all(depths > 0):
        raise ValueError("depths must be strictly positive")
    return depths.view(np.uint32)


def make_key(tile_id: int, depth: float) -> int:
    bits = int(np.array([depth], dtype=np.float32).view(np.uint32)[0])
    return (int(tile_id) << 32) | bits


@jit(**JIT_OPTIONS)
def _fill_keys(rects, counts, offsets, bits, tiles_x, keys, values):
    shift = np.uint64(32)
    for i in range(rects.shape[0]):
        if counts[i] == 0:
            continue
        k = offsets[i]
        low = np.uint64(bits[i])
        for ty in range(rects[i, 2], rects[i, 3] + 1):
            for tx in range(rects[i, 0], rects[i, 1] + 1):
                tile = np.uint64(ty * tiles_x + tx)
                keys[k] = (tile << shift) | low
                values[k] = i
                k += 1


def duplicate_and_key(depths: np.ndarray, rects: np.ndarray, counts: np.ndarray,
                      tiles_x: int, capacity: int) -> tuple:
    """
    One key per (splat, touched tile) pair.

    Args:
        depths: (N,) positive splat depths
        rects: (N, 4) tile rectangles from touched_tiles_batch
        counts: (N,) touched-tile counts (0 = dropped)
        tiles_x: Grid width in tiles
        capacity: Maximum number of keys

    Returns:
        (keys uint64, values int32) in splat order, tiles row-major per splat

    Raises:
        DuplicationCapacityError: total exceeds capacity
    """
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total > capacity:
        raise DuplicationCapacityError(total, capacity)

    offsets = np.zeros(counts.size, dtype=np.int64)
    if counts.size:
        np.cumsum(counts[:-1], out=offsets[1:])
    keys = np.empty(total, dtype=np.uint64)
    values = np.empty(total, dtype=np.int32)
    if total:
        _fill_keys(np.ascontiguousarray(rects, dtype=np.int32), counts, offsets,
                   depth_bits(depths), np.int64(tiles_x), keys, values)
    logging.debug(f"Duplicated {counts.size} splats into {total} keys")
    return keys, values
