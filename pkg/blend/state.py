"""
Per-pixel compositing state and the shared front-to-back update rule
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import jit

from utils.jit import JIT_OPTIONS

ALPHA_MIN = 1.0 / 255.0
ALPHA_MAX = 0.99
DEFAULT_EARLY_STOP_T = 1e-4


@jit(**JIT_OPTIONS)
def composite(j, power, opacity, colors, i, transmittance, color, done, t_min):
    """
    Composite splat i onto pixel j. Returns True when the pixel terminates.

    The splat that would push T below t_min is not composited. Color is
    accumulated with the transmittance before the update.
    """
    alpha = min(ALPHA_MAX, opacity * math.exp(power))
    if alpha < ALPHA_MIN:
        return False
    t = transmittance[j]
    test_t = t * (1.0 - alpha)
    if test_t < t_min:
        done[j] = True
        return True
    weight = alpha * t
    color[j, 0] += colors[i, 0] * weight
    color[j, 1] += colors[i, 1] * weight
    color[j, 2] += colors[i, 2] * weight
    transmittance[j] = test_t
    return False


@dataclass(eq=False)
class PixelState:
    """Transmittance, accumulated color and termination flag for every pixel of a tile"""

    transmittance: np.ndarray  # (P,) float32
    color: np.ndarray          # (P, 3) float32
    done: np.ndarray           # (P,) bool

    @classmethod
    def fresh(cls, pixels: int) -> 'PixelState':
        return cls(
            transmittance=np.ones(pixels, dtype=np.float32),
            color=np.zeros((pixels, 3), dtype=np.float32),
            done=np.zeros(pixels, dtype=np.bool_),
        )

    @property
    def pixels(self) -> int:
        return int(self.transmittance.shape[0])

    def all_done(self) -> bool:
        return bool(self.done.all())


@dataclass(eq=False)
class TileResult:
    """Blended tile before the background is applied"""

    tile_size: int
    state: PixelState
    macs: int = 0
    pairs: int = 0
    padding_macs: int = 0      # spent on zero rows and columns of padded GEMM operands
    batches: int = 0

    def finalize(self, background=(0.0, 0.0, 0.0)) -> tuple:
        """
        Apply C + T * background.

        Returns:
            (rgb (ts, ts, 3) float32, transmittance (ts, ts) float32)
        """
        ts = self.tile_size
        bg = np.asarray(background, dtype=np.float32)
        t = self.state.transmittance
        rgb = self.state.color + t[:, None] * bg[None, :]
        return rgb.reshape(ts, ts, 3), t.reshape(ts, ts).copy()
