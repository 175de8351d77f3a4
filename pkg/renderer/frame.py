"""
Rendered frame and per-frame statistics
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from utils.imaging import to_uint8

STAGES = ('preprocess', 'duplicate', 'sort', 'blend', 'assemble')


@dataclass
class RenderStats:
    gaussians: int = 0
    splats: int = 0
    duplicates: int = 0
    tiles_blended: int = 0
    stage_ms: Dict[str, float] = field(default_factory=lambda: {s: 0.0 for s in STAGES})
    total_ms: float = 0.0
    mac_count: int = 0
    padding_macs: int = 0
    pairs: int = 0
    batches: int = 0

    @property
    def pair_macs(self) -> int:
        """MACs spent on real (splat, pixel) pairs"""
        return self.mac_count - self.padding_macs

    def macs_per_pair(self) -> float:
        return self.pair_macs / self.pairs if self.pairs else 0.0

    def format_block(self) -> str:
        """Human-readable stats block printed by the CLI"""
        lines = [
            f"gaussians:   {self.gaussians}",
            f"splats:      {self.splats}",
            f"duplicates:  {self.duplicates}",
            f"tiles:       {self.tiles_blended}",
            f"batches:     {self.batches}",
            f"pairs:       {self.pairs}",
            f"macs:        {self.mac_count}",
            f"padding:     {self.padding_macs}",
            f"macs/pair:   {self.macs_per_pair():.3f}",
        ]
        lines += [f"{name + '_ms:':<13}{self.stage_ms.get(name, 0.0):.3f}" for name in STAGES]
        lines.append(f"{'total_ms:':<13}{self.total_ms:.3f}")
        return "\n".join(lines)


@dataclass(eq=False)
class RenderFrame:
    """Linear RGB frame and per-pixel final transmittance"""

    width: int
    height: int
    color: np.ndarray          # (H, W, 3) float32
    transmittance: np.ndarray  # (H, W) float32
    stats: RenderStats = field(default_factory=RenderStats)

    def to_uint8(self) -> np.ndarray:
        return to_uint8(self.color)

    def clamped(self) -> np.ndarray:
        return np.clip(self.color, 0.0, 1.0)
