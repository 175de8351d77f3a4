"""
Per-render configuration
"""

import dataclasses
from dataclasses import dataclass, field

from backend_config import BACKEND_TYPES, PRECISION_MODES, REFERENCE_PIXELS
from config import Config


@dataclass(frozen=True)
class RenderConfig:
    """
    Validated render settings. Defaults come from the environment-driven
    Config; use `with_overrides` to apply CLI flags.

    Raises:
        ValueError: from __post_init__ on any invalid field
    """

    backend: str = field(default_factory=lambda: Config.BACKEND)
    precision: str = field(default_factory=lambda: Config.PRECISION)
    tile_size: int = field(default_factory=lambda: Config.TILE_SIZE)
    batch_size: int = field(default_factory=lambda: Config.BATCH_SIZE)
    t_min: float = field(default_factory=lambda: Config.EARLY_STOP_T)
    background: tuple = field(default_factory=Config.background_rgb)
    workers: int = field(default_factory=lambda: Config.WORKERS)
    prefetch: bool = field(default_factory=lambda: Config.PREFETCH)
    reference_pixel: str = field(default_factory=lambda: Config.REFERENCE_PIXEL)
    sigma_extent: float = field(default_factory=lambda: Config.SIGMA_EXTENT)
    max_duplicates: int = field(default_factory=lambda: Config.MAX_DUPLICATES)

    def __post_init__(self):
        if self.backend not in BACKEND_TYPES:
            raise ValueError(f"unknown backend '{self.backend}'")
        if self.precision not in PRECISION_MODES:
            raise ValueError(f"unknown precision '{self.precision}'")
        if self.reference_pixel not in REFERENCE_PIXELS:
            raise ValueError(f"unknown reference pixel '{self.reference_pixel}'")
        if self.tile_size < 1:
            raise ValueError("tile_size must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0.0 <= self.t_min < 1.0:
            raise ValueError("early-stop threshold must be in [0, 1)")
        if self.sigma_extent <= 0.0:
            raise ValueError("sigma_extent must be positive")
        if self.max_duplicates < 0:
            raise ValueError("max_duplicates must be >= 0")
        if len(self.background) != 3:
            raise ValueError("background needs three channels")
        object.__setattr__(self, 'background', tuple(float(v) for v in self.background))

    def with_overrides(self, **overrides) -> 'RenderConfig':
        """Copy with the given fields replaced; None values are ignored"""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})
