"""
Scene layer for gemm-splat
- Domain types (Gaussians, cameras, projected splats)
- Point-cloud scene I/O and camera description files
"""

from .types import Gaussian3D, GaussianScene, Camera, Splat2D, SplatTable
from .ply import load_scene, save_scene, SceneFormatError
from .camera import load_camera, save_camera, parse_camera, format_camera, CameraFormatError

__all__ = [
    'Gaussian3D',
    'GaussianScene',
    'Camera',
    'Splat2D',
    'SplatTable',
    'load_scene',
    'save_scene',
    'SceneFormatError',
    'load_camera',
    'save_camera',
    'parse_camera',
    'format_camera',
    'CameraFormatError',
]
