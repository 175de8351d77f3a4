"""
Frame export and comparison metrics
"""

import logging
import math
import os
from typing import Dict

import numpy as np
from PIL import Image

# per-pixel max channel error in 8-bit levels: (label, low, high) inclusive
HISTOGRAM_BUCKETS = (
    ('0', 0, 0),
    ('1', 1, 1),
    ('2', 2, 2),
    ('3-4', 3, 4),
    ('5-8', 5, 8),
    ('9-16', 9, 16),
    ('17+', 17, 255),
)


def to_uint8(rgb: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize with floor(255 v + 0.5)"""
    clamped = np.clip(np.asarray(rgb, dtype=np.float64), 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def save_image(rgb: np.ndarray, path: str) -> None:
    """
    Write an (H, W, 3) linear frame as 8-bit RGB.

    Binary PPM unless the extension is .png.

    Raises:
        OSError: on write failure
    """
    image = Image.fromarray(to_uint8(rgb))
    ext = os.path.splitext(path)[1].lower()
    image.save(path, format='PNG' if ext == '.png' else 'PPM')
    logging.info(f"Wrote {image.width}x{image.height} image to {path}")


def load_image(path: str) -> np.ndarray:
    """Read an 8-bit RGB image back as (H, W, 3) uint8"""
    with Image.open(path) as image:
        return np.asarray(image.convert('RGB'), dtype=np.uint8)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """PSNR in dB over clamped frames with peak 1.0; identical frames give inf"""
    a = np.clip(np.asarray(a, dtype=np.float64), 0.0, 1.0)
    b = np.clip(np.asarray(b, dtype=np.float64), 0.0, 1.0)
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2)) if a.size else 0.0
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def max_abs_error(a: np.ndarray, b: np.ndarray) -> float:
    """Largest per-channel absolute difference of the clamped frames"""
    a = np.clip(np.asarray(a, dtype=np.float64), 0.0, 1.0)
    b = np.clip(np.asarray(b, dtype=np.float64), 0.0, 1.0)
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def error_histogram(a: np.ndarray, b: np.ndarray) -> Dict[str, int]:
    """Pixel counts per bucket of max channel error between the exported 8-bit frames"""
    diff = np.abs(to_uint8(a).astype(np.int16) - to_uint8(b).astype(np.int16))
    per_pixel = diff.max(axis=-1) if diff.size else diff.reshape(-1)
    return {
        label: int(np.count_nonzero((per_pixel >= low) & (per_pixel <= high)))
        for label, low, high in HISTOGRAM_BUCKETS
    }
