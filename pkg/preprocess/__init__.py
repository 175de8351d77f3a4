"""
Preprocessing stage
- Projection of Gaussians to splats (culling, EWA conic)
- Spherical-harmonic color evaluation
- Tile grid and splat/tile intersection
"""

from .projection import project_gaussian, project_scene, covariance_3d, quaternion_to_rotation
from .sh import eval_color, eval_colors, SH_C0
from .tiles import TileGrid, TouchedTiles, touched_tiles, touched_tiles_batch, sigma_max, DEFAULT_SIGMA_EXTENT

__all__ = [
    'project_gaussian',
    'project_scene',
    'covariance_3d',
    'quaternion_to_rotation',
    'eval_color',
    'eval_colors',
    'SH_C0',
    'TileGrid',
    'TouchedTiles',
    'touched_tiles',
    'touched_tiles_batch',
    'sigma_max',
    'DEFAULT_SIGMA_EXTENT',
]
