"""
Utility functions for the splat renderer
"""

from .jit import JIT_OPTIONS
from .timing import StageTimer
from .imaging import (
    to_uint8,
    save_image,
    load_image,
    psnr,
    max_abs_error,
    error_histogram,
    HISTOGRAM_BUCKETS,
)

__all__ = [
    'JIT_OPTIONS',
    'StageTimer',
    'to_uint8',
    'save_image',
    'load_image',
    'psnr',
    'max_abs_error',
    'error_histogram',
    'HISTOGRAM_BUCKETS',
]
