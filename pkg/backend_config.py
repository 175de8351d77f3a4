"""
Backend registry for gemm-splat
Blending backends, precision modes and reference-pixel conventions
"""

# ============================================
# BLENDING BACKENDS
# ============================================

BACKEND_TYPES = {
    'reference': {
        'name': 'Per-pixel reference',
        'description': 'Scalar per-pixel power evaluation and compositing',
        'macs_per_pair': 3,
        'uses_pixel_matrix': False,
    },
    'gemm': {
        'name': 'GEMM reformulation',
        'description': 'Six-term dot products batched through a blocked micro-kernel',
        'uses_pixel_matrix': True,
    },
}


def get_backend_config(backend: str) -> dict:
    """Get registry entry for a backend name"""
    return BACKEND_TYPES.get(backend, {})


# ============================================
# PRECISION MODES (GEMM backend only)
# ============================================

PRECISION_MODES = {
    'full': {
        'description': 'Single-precision operands, single-precision accumulate',
        'operand_dtype': 'float32',
    },
    'mixed': {
        'description': 'Half-precision operands, single-precision accumulate',
        'operand_dtype': 'float16',
    },
}


def get_precision_config(precision: str) -> dict:
    """Get registry entry for a precision mode"""
    return PRECISION_MODES.get(precision, {})


# ============================================
# MICRO-KERNEL SHAPE
# Output block rows x cols, padded inner dimension
# ============================================

KERNEL_SHAPE = {
    'row_block': 16,
    'col_block': 8,
    'inner': 8,
}

# Reference pixel p_c inside a tile
REFERENCE_PIXELS = ('top_left', 'center')
