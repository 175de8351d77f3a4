"""
Blending backends
- Per-pixel reference compositor
- GEMM power reformulation with a blocked micro-kernel
- Double-buffered three-stage tile pipeline
"""

from .state import PixelState, TileResult, ALPHA_MIN, ALPHA_MAX, DEFAULT_EARLY_STOP_T
from .reference import power_ref, blend_tile_ref, blend_tile_ref_result
from .gemm import (
    PixelMatrix,
    build_pixel_matrix,
    build_gaussian_vector,
    gaussian_vector_from_offset,
    build_gaussian_matrix,
    gemm_block,
    blend_tile_gemm,
)
from .pipeline import (
    TileWork,
    BatchRecord,
    DoubleBuffer,
    ReferenceBackend,
    GemmBackend,
    load_batch,
    staged_tile_pipeline,
)

__all__ = [
    'PixelState',
    'TileResult',
    'ALPHA_MIN',
    'ALPHA_MAX',
    'DEFAULT_EARLY_STOP_T',
    'power_ref',
    'blend_tile_ref',
    'blend_tile_ref_result',
    'PixelMatrix',
    'build_pixel_matrix',
    'build_gaussian_vector',
    'gaussian_vector_from_offset',
    'build_gaussian_matrix',
    'gemm_block',
    'blend_tile_gemm',
    'TileWork',
    'BatchRecord',
    'DoubleBuffer',
    'ReferenceBackend',
    'GemmBackend',
    'load_batch',
    'staged_tile_pipeline',
]
