"""
Projection of 3D Gaussians to screen-space splats (EWA splatting).

All math runs in double precision on whole arrays with explicit
per-row products, so a Gaussian projects to the same bits whether it is
processed alone, in a chunk, or in the whole scene.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from scene.types import Camera, Gaussian3D, GaussianScene, Splat2D, SplatTable
from .sh import eval_colors

LOW_PASS_DILATION = 0.3
FRUSTUM_GUARD_BAND = 1.3
MIN_COV_DET = 1e-12
MIN_CHUNK = 4096


def quaternion_to_rotation(q: np.ndarray) -> np.ndarray:
    """Unit quaternions (N, 4) as (w, x, y, z) -> rotation matrices (N, 3, 3)"""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    return np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
        np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
        np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
    ], axis=1)


def _bmm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise matrix product (N, i, k) x (N, k, j) with a fixed summation order"""
    out = a[:, :, 0, None] * b[:, None, 0, :]
    for k in range(1, a.shape[2]):
        out = out + a[:, :, k, None] * b[:, None, k, :]
    return out


def covariance_3d(scales: np.ndarray, rotations: np.ndarray) -> np.ndarray:
    """Sigma = R diag(s^2) R^T for (N, 3) scales and (N, 4) quaternions"""
    m = quaternion_to_rotation(rotations) * scales[:, None, :]
    return _bmm(m, np.transpose(m, (0, 2, 1)))


def _project_chunk(scene: GaussianScene, camera: Camera, offset: int) -> SplatTable:
    if len(scene) == 0:
        return SplatTable.empty()

    view = camera.view_matrix
    rot, trans = view[:3, :3], view[:3, 3]
    p = scene.positions
    t = p[:, 0, None] * rot[:, 0] + p[:, 1, None] * rot[:, 1] + p[:, 2, None] * rot[:, 2] + trans
    tx, ty, tz = t[:, 0], t[:, 1], t[:, 2]

    keep = tz > camera.near_plane
    safe_z = np.where(keep, tz, 1.0)
    lim_x = FRUSTUM_GUARD_BAND * camera.width / (2.0 * camera.focal_x)
    lim_y = FRUSTUM_GUARD_BAND * camera.height / (2.0 * camera.focal_y)
    keep &= (np.abs(tx / safe_z) <= lim_x) & (np.abs(ty / safe_z) <= lim_y)

    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return SplatTable.empty()
    tx, ty, tz = tx[idx], ty[idx], tz[idx]

    fx, fy = camera.focal_x, camera.focal_y
    zeros = np.zeros_like(tz)
    jac = np.stack([
        np.stack([fx / tz, zeros, -fx * tx / (tz * tz)], axis=-1),
        np.stack([zeros, fy / tz, -fy * ty / (tz * tz)], axis=-1),
    ], axis=1)
    tmat = _bmm(jac, np.broadcast_to(rot, (idx.size, 3, 3)))
    sigma = covariance_3d(scene.scales[idx], scene.rotations[idx])
    cov = _bmm(_bmm(tmat, sigma), np.transpose(tmat, (0, 2, 1)))

    a = cov[:, 0, 0] + LOW_PASS_DILATION
    b = cov[:, 0, 1]
    c = cov[:, 1, 1] + LOW_PASS_DILATION
    det = a * c - b * b
    good = det > MIN_COV_DET

    conics = np.stack([c / np.where(good, det, 1.0), -b / np.where(good, det, 1.0),
                       a / np.where(good, det, 1.0)], axis=1).astype(np.float32)
    depths = tz.astype(np.float32)
    good &= (conics[:, 0] > 0) & (conics[:, 2] > 0)
    good &= conics[:, 0].astype(np.float64) * conics[:, 2] - conics[:, 1].astype(np.float64) ** 2 > 0
    good &= depths > camera.near_plane

    sel = np.flatnonzero(good)
    idx = idx[sel]
    centers = np.stack([fx * tx[sel] / tz[sel] + camera.cx, fy * ty[sel] / tz[sel] + camera.cy], axis=1)

    dirs = scene.positions[idx] - camera.position
    dirs = dirs / np.sqrt(dirs[:, 0] ** 2 + dirs[:, 1] ** 2 + dirs[:, 2] ** 2)[:, None]
    colors = eval_colors(scene.sh[idx], dirs, degree=scene.sh_degree)

    return SplatTable(
        centers=centers.astype(np.float32),
        conics=conics[sel],
        colors=colors.astype(np.float32),
        opacities=scene.opacities[idx].astype(np.float32),
        depths=depths[sel],
        source_index=(idx + offset).astype(np.int64),
    )


def project_scene(scene: GaussianScene, camera: Camera, workers: int = 1) -> SplatTable:
    """
    Project every Gaussian of a scene; culled Gaussians are dropped.

    Args:
        scene: Loaded scene
        camera: Viewing camera
        workers: Chunk the scene over this many threads; output order and
            bits do not depend on it

    Returns:
        SplatTable of retained splats in scene order
    """
    n = len(scene)
    chunk = max(MIN_CHUNK, -(-n // max(1, workers)))
    starts = list(range(0, n, chunk))
    if len(starts) <= 1:
        table = _project_chunk(scene, camera, 0)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda s: _project_chunk(scene.subset(s, s + chunk), camera, s), starts))
        table = SplatTable.concatenate(parts)
    logging.debug(f"Projected {n} Gaussians, retained {len(table)}")
    return table


def project_gaussian(g: Gaussian3D, cam: Camera) -> Optional[Splat2D]:
    """
    Project one Gaussian.

    Returns:
        Splat2D, or None when culled (behind the near plane, outside the
        guard band, or degenerate 2D covariance)
    """
    table = _project_chunk(GaussianScene.from_gaussians([g]), cam, 0)
    return table[0] if len(table) else None
