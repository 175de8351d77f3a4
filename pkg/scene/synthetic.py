"""
Seeded synthetic scenes and cameras for tests and benchmarks
"""

import math
from typing import Optional

import numpy as np

from .camera import focal_from_fov
from .types import Camera, GaussianScene, SH_COEFFS
from preprocess.sh import SH_C0

IDENTITY_VIEW = tuple(float(v) for v in np.eye(4).ravel())


def default_camera(width: int = 256, height: int = 256, fov_x: float = math.radians(60.0)) -> Camera:
    """Camera at the origin looking down +z (x right, y down)"""
    focal = focal_from_fov(width, fov_x)
    return Camera(
        world_to_camera=IDENTITY_VIEW,
        focal_x=focal,
        focal_y=focal,
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
        width=width,
        height=height,
    )


def look_at_camera(eye, target, up=(0.0, -1.0, 0.0), width: int = 256, height: int = 256,
                   fov_x: float = math.radians(60.0)) -> Camera:
    """
    Camera at `eye` looking at `target`.

    Camera axes follow x right, y down, z forward; `up` is the world
    direction that should appear at the top of the image.
    """
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    norm = np.linalg.norm(forward)
    if norm == 0.0:
        raise ValueError("eye and target coincide")
    forward /= norm
    down = -np.asarray(up, dtype=np.float64)
    down = down - np.dot(down, forward) * forward
    if np.linalg.norm(down) < 1e-12:
        raise ValueError("up is parallel to the view direction")
    down /= np.linalg.norm(down)
    right = np.cross(down, forward)

    view = np.eye(4)
    view[:3, :3] = np.stack([right, down, forward])
    view[:3, 3] = -view[:3, :3] @ eye
    focal = focal_from_fov(width, fov_x)
    return Camera(
        world_to_camera=tuple(float(v) for v in view.ravel()),
        focal_x=focal,
        focal_y=focal,
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
        width=width,
        height=height,
    )


def scale_camera(camera: Camera, factor: int) -> Camera:
    """Same view rendered at `factor` times the resolution"""
    return Camera(
        world_to_camera=camera.world_to_camera,
        focal_x=camera.focal_x * factor,
        focal_y=camera.focal_y * factor,
        cx=(camera.cx + 0.5) * factor - 0.5,
        cy=(camera.cy + 0.5) * factor - 0.5,
        width=camera.width * factor,
        height=camera.height * factor,
        near_plane=camera.near_plane,
    )


def random_quaternions(rng: np.random.Generator, count: int) -> np.ndarray:
    q = rng.normal(size=(count, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_scene(
    count: int,
    camera: Optional[Camera] = None,
    seed: int = 0,
    depth_range: tuple = (2.0, 12.0),
    sigma_px_range: tuple = (0.6, 10.0),
    opacity_range: tuple = (0.05, 0.95),
    sh_degree: int = 0,
) -> GaussianScene:
    """
    Random Gaussians whose centers project inside the camera frame.

    Screen-space sizes are drawn in pixels and converted to world scales at
    the sampled depth, so the splat footprint stays controlled regardless of
    resolution. Base colors are uniform in [0, 1].
    """
    camera = camera or default_camera()
    rng = np.random.default_rng(seed)

    u = rng.uniform(0.0, camera.width - 1, count)
    v = rng.uniform(0.0, camera.height - 1, count)
    z = rng.uniform(*depth_range, count)
    cam_points = np.stack([(u - camera.cx) / camera.focal_x * z, (v - camera.cy) / camera.focal_y * z, z], axis=1)

    view = camera.view_matrix
    rot, trans = view[:3, :3], view[:3, 3]
    positions = (cam_points - trans) @ rot

    sigma_px = rng.uniform(*sigma_px_range, (count, 3))
    scales = sigma_px * z[:, None] / camera.focal_x

    base = rng.uniform(0.0, 1.0, (count, 3))
    sh = np.zeros((count, SH_COEFFS, 3))
    sh[:, 0, :] = (base - 0.5) / SH_C0
    n_rest = (sh_degree + 1) ** 2 - 1
    if n_rest:
        sh[:, 1:1 + n_rest, :] = rng.normal(0.0, 0.05, (count, n_rest, 3))

    return GaussianScene(
        positions=positions,
        scales=scales,
        rotations=random_quaternions(rng, count),
        opacities=rng.uniform(*opacity_range, count),
        sh=sh,
        sh_degree=sh_degree,
    )
