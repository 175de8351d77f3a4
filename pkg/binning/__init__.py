"""
Binning stages
- Duplication of splats into (tile, depth) keys
- Stable radix sort
- Per-tile ranges
"""

from .keys import duplicate_and_key, depth_bits, make_key, DuplicationCapacityError
from .radix import sort_keys
from .ranges import tile_ranges, TileRanges

__all__ = [
    'duplicate_and_key',
    'depth_bits',
    'make_key',
    'DuplicationCapacityError',
    'sort_keys',
    'tile_ranges',
    'TileRanges',
]
