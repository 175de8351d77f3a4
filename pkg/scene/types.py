"""
Scene domain types: trained Gaussians, cameras and projected splats
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

SH_COEFFS = 16  # degree 3


def inverse_sigmoid(x):
    """Opacity back to the logit stored on disk"""
    return np.log(x / (1.0 - x))


@dataclass(frozen=True)
class Gaussian3D:
    """One trained scene primitive with activations applied."""

    position: tuple
    scale: tuple
    rotation: tuple  # unit quaternion (w, x, y, z)
    opacity: float
    sh_coeffs: np.ndarray = field(compare=False)  # (16, 3)

    @property
    def opacity_logit(self) -> float:
        return float(inverse_sigmoid(self.opacity))


@dataclass(eq=False)
class GaussianScene:
    """
    Struct-of-arrays scene container.

    All arrays hold activated values (exp scale, sigmoid opacity, normalized
    rotation). `raw` keeps the on-disk record of a loaded file so the scene
    serializes back bit-exactly; scenes built in memory leave it None.
    """

    positions: np.ndarray   # (N, 3) float64
    scales: np.ndarray      # (N, 3) float64, > 0
    rotations: np.ndarray   # (N, 4) float64, unit (w, x, y, z)
    opacities: np.ndarray   # (N,) float64, in (0, 1)
    sh: np.ndarray          # (N, 16, 3) float64
    sh_degree: int = 3
    raw: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.positions.shape[0])

    def __getitem__(self, i: int) -> Gaussian3D:
        return Gaussian3D(
            position=tuple(float(v) for v in self.positions[i]),
            scale=tuple(float(v) for v in self.scales[i]),
            rotation=tuple(float(v) for v in self.rotations[i]),
            opacity=float(self.opacities[i]),
            sh_coeffs=self.sh[i].copy(),
        )

    def __iter__(self) -> Iterator[Gaussian3D]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, start: int, stop: int) -> 'GaussianScene':
        """Contiguous slice of the scene (views, no copy)"""
        return GaussianScene(
            positions=self.positions[start:stop],
            scales=self.scales[start:stop],
            rotations=self.rotations[start:stop],
            opacities=self.opacities[start:stop],
            sh=self.sh[start:stop],
            sh_degree=self.sh_degree,
        )

    @classmethod
    def empty(cls) -> 'GaussianScene':
        return cls(
            positions=np.zeros((0, 3)),
            scales=np.ones((0, 3)),
            rotations=np.zeros((0, 4)),
            opacities=np.zeros(0),
            sh=np.zeros((0, SH_COEFFS, 3)),
        )

    @classmethod
    def from_gaussians(cls, gaussians: Sequence[Gaussian3D]) -> 'GaussianScene':
        if not gaussians:
            return cls.empty()
        return cls(
            positions=np.array([g.position for g in gaussians], dtype=np.float64),
            scales=np.array([g.scale for g in gaussians], dtype=np.float64),
            rotations=np.array([g.rotation for g in gaussians], dtype=np.float64),
            opacities=np.array([g.opacity for g in gaussians], dtype=np.float64),
            sh=np.stack([np.asarray(g.sh_coeffs, dtype=np.float64) for g in gaussians]),
        )


@dataclass(frozen=True)
class Camera:
    """Pinhole camera; pixel (i, j) has its center at integer coordinates (i, j)."""

    world_to_camera: tuple  # 16 floats, row-major 4x4
    focal_x: float
    focal_y: float
    cx: float
    cy: float
    width: int
    height: int
    near_plane: float = 0.2

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("non-positive resolution")
        if not (self.focal_x > 0 and self.focal_y > 0):
            raise ValueError("non-positive focal length")
        if not self.near_plane > 0:
            raise ValueError("non-positive near plane")
        if len(self.world_to_camera) != 16:
            raise ValueError("world_to_camera needs 16 values")

    @property
    def view_matrix(self) -> np.ndarray:
        return np.array(self.world_to_camera, dtype=np.float64).reshape(4, 4)

    @property
    def position(self) -> np.ndarray:
        """Camera center in world coordinates"""
        view = self.view_matrix
        rot, trans = view[:3, :3], view[:3, 3]
        return -rot.T @ trans


@dataclass(frozen=True)
class Splat2D:
    """A Gaussian after projection to the image plane."""

    center: tuple          # (x_g, y_g) pixels
    conic: tuple           # (A, B, C) of the inverse 2D covariance
    color: tuple           # linear RGB, >= 0
    opacity: float
    depth: float


@dataclass(eq=False)
class SplatTable:
    """
    Struct-of-arrays of projected splats in single precision.

    `source_index` maps each row back to its Gaussian in the scene.
    """

    centers: np.ndarray      # (N, 2) float32
    conics: np.ndarray       # (N, 3) float32
    colors: np.ndarray       # (N, 3) float32
    opacities: np.ndarray    # (N,) float32
    depths: np.ndarray       # (N,) float32
    source_index: np.ndarray  # (N,) int64

    def __len__(self) -> int:
        return int(self.centers.shape[0])

    def __getitem__(self, i: int) -> Splat2D:
        return Splat2D(
            center=(float(self.centers[i, 0]), float(self.centers[i, 1])),
            conic=tuple(float(v) for v in self.conics[i]),
            color=tuple(float(v) for v in self.colors[i]),
            opacity=float(self.opacities[i]),
            depth=float(self.depths[i]),
        )

    @classmethod
    def empty(cls) -> 'SplatTable':
        return cls(
            centers=np.zeros((0, 2), dtype=np.float32),
            conics=np.zeros((0, 3), dtype=np.float32),
            colors=np.zeros((0, 3), dtype=np.float32),
            opacities=np.zeros(0, dtype=np.float32),
            depths=np.zeros(0, dtype=np.float32),
            source_index=np.zeros(0, dtype=np.int64),
        )

    @classmethod
    def from_splats(cls, splats: Sequence[Splat2D]) -> 'SplatTable':
        if not splats:
            return cls.empty()
        return cls(
            centers=np.array([s.center for s in splats], dtype=np.float32),
            conics=np.array([s.conic for s in splats], dtype=np.float32),
            colors=np.array([s.color for s in splats], dtype=np.float32),
            opacities=np.array([s.opacity for s in splats], dtype=np.float32),
            depths=np.array([s.depth for s in splats], dtype=np.float32),
            source_index=np.arange(len(splats), dtype=np.int64),
        )

    @classmethod
    def concatenate(cls, tables: Sequence['SplatTable']) -> 'SplatTable':
        if not tables:
            return cls.empty()
        return cls(
            centers=np.concatenate([t.centers for t in tables]),
            conics=np.concatenate([t.conics for t in tables]),
            colors=np.concatenate([t.colors for t in tables]),
            opacities=np.concatenate([t.opacities for t in tables]),
            depths=np.concatenate([t.depths for t in tables]),
            source_index=np.concatenate([t.source_index for t in tables]),
        )
