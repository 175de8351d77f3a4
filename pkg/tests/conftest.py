"""
Shared fixtures: seeded RNG, cameras, synthetic scenes and PLY writers
"""

import numpy as np
import pytest
from plyfile import PlyData, PlyElement

from preprocess import SH_C0
from scene.synthetic import IDENTITY_VIEW, default_camera, random_scene
from scene.types import SH_COEFFS, Camera, GaussianScene, Splat2D, SplatTable


def vertex_dtype(rest: int = 45, drop=()):
    names = ['x', 'y', 'z', 'nx', 'ny', 'nz', 'f_dc_0', 'f_dc_1', 'f_dc_2']
    names += [f"f_rest_{k}" for k in range(rest)]
    names += ['opacity', 'scale_0', 'scale_1', 'scale_2', 'rot_0', 'rot_1', 'rot_2', 'rot_3']
    return [(n, '<f4') for n in names if n not in drop]


def make_records(count: int, rest: int = 45, seed: int = 0, drop=()) -> np.ndarray:
    """Valid vertex records with random content"""
    rng = np.random.default_rng(seed)
    records = np.zeros(count, dtype=vertex_dtype(rest, drop))
    for name in records.dtype.names:
        records[name] = rng.normal(0.0, 0.5, count)
    if 'rot_0' in records.dtype.names:
        records['rot_0'] = 1.0 + np.abs(records['rot_0'])
    return records


def write_ply(path, records: np.ndarray, text: bool = False) -> str:
    PlyData([PlyElement.describe(records, 'vertex')], text=text, byte_order='<').write(str(path))
    return str(path)


def splat(center, conic=(1.0, 0.0, 1.0), color=(1.0, 0.0, 0.0), opacity=0.5, depth=1.0) -> Splat2D:
    return Splat2D(center=tuple(center), conic=tuple(conic), color=tuple(color),
                   opacity=opacity, depth=depth)


def random_tile_splats(count: int, seed: int = 0, tile_origin=(0, 0), tile_size: int = 16,
                       spread: float = 24.0) -> SplatTable:
    """Random positive-definite splats around a tile, front to back"""
    rng = np.random.default_rng(seed)
    centers = np.asarray(tile_origin, dtype=np.float64) + tile_size / 2.0 + rng.uniform(-spread, spread, (count, 2))
    sigmas = rng.uniform(0.6, 8.0, (count, 2))
    angles = rng.uniform(0.0, np.pi, count)
    cos, sin = np.cos(angles), np.sin(angles)
    # covariance = R diag(s^2) R^T; conic is its inverse
    cxx = cos ** 2 * sigmas[:, 0] ** 2 + sin ** 2 * sigmas[:, 1] ** 2
    cyy = sin ** 2 * sigmas[:, 0] ** 2 + cos ** 2 * sigmas[:, 1] ** 2
    cxy = cos * sin * (sigmas[:, 0] ** 2 - sigmas[:, 1] ** 2)
    det = cxx * cyy - cxy ** 2
    conics = np.stack([cyy / det, -cxy / det, cxx / det], axis=1)
    return SplatTable(
        centers=centers.astype(np.float32),
        conics=conics.astype(np.float32),
        colors=rng.uniform(0.0, 1.0, (count, 3)).astype(np.float32),
        opacities=rng.uniform(0.05, 0.95, count).astype(np.float32),
        depths=np.sort(rng.uniform(1.0, 10.0, count)).astype(np.float32),
        source_index=np.arange(count, dtype=np.int64),
    )


def three_splat_scene():
    """Three small isotropic Gaussians projecting exactly onto pixels (16, 16), (48, 16), (32, 48)"""
    camera = Camera(world_to_camera=IDENTITY_VIEW, focal_x=64.0, focal_y=64.0, cx=32.0, cy=32.0,
                    width=64, height=64)
    colors = np.array([[0.9, 0.1, 0.1], [0.1, 0.8, 0.3], [0.4, 0.4, 1.0]])
    sh = np.zeros((3, SH_COEFFS, 3))
    sh[:, 0, :] = (colors - 0.5) / SH_C0
    scene = GaussianScene(
        positions=np.array([[-1.0, -1.0, 4.0], [1.0, -1.0, 4.0], [0.0, 1.0, 4.0]]),
        scales=np.full((3, 3), 0.09375),
        rotations=np.tile([1.0, 0.0, 0.0, 0.0], (3, 1)),
        opacities=np.array([0.5, 0.75, 0.25]),
        sh=sh,
        sh_degree=0,
    )
    return scene, camera


def closed_form_frame(scene: GaussianScene, camera: Camera, background) -> tuple:
    """
    Float64 frame of unrotated degree-0 Gaussians seen through an identity view.

    Splats are composited front to back without early termination, so the
    scene must keep transmittance well above the cutoff.

    Returns:
        (rgb (H, W, 3), margin (H, W, 3)); margin is the distance of 255 * rgb
        from the nearest 8-bit rounding boundary, zero where some alpha sits on
        the 1/255 cutoff
    """
    ys, xs = np.mgrid[0:camera.height, 0:camera.width].astype(np.float64)
    fx, fy = camera.focal_x, camera.focal_y
    color = np.zeros((camera.height, camera.width, 3))
    trans = np.ones((camera.height, camera.width))
    cutoff = np.zeros((camera.height, camera.width), dtype=bool)

    for k in np.argsort(scene.positions[:, 2], kind='stable'):
        x, y, z = scene.positions[k]
        jac = np.array([[fx / z, 0.0, -fx * x / z ** 2], [0.0, fy / z, -fy * y / z ** 2]])
        conic = np.linalg.inv(jac @ np.diag(scene.scales[k] ** 2) @ jac.T + 0.3 * np.eye(2))
        dx = xs - (fx * x / z + camera.cx)
        dy = ys - (fy * y / z + camera.cy)
        power = -0.5 * (conic[0, 0] * dx ** 2 + conic[1, 1] * dy ** 2) - conic[0, 1] * dx * dy
        alpha = np.minimum(0.99, scene.opacities[k] * np.exp(power))
        hit = alpha >= 1.0 / 255.0
        cutoff |= np.abs(255.0 * alpha - 1.0) < 1e-3
        rgb = np.maximum(SH_C0 * scene.sh[k, 0] + 0.5, 0.0)
        color += np.where(hit, alpha * trans, 0.0)[..., None] * rgb
        trans = np.where(hit, trans * (1.0 - alpha), trans)

    frame = color + trans[..., None] * np.asarray(background, dtype=np.float64)
    scaled = 255.0 * np.clip(frame, 0.0, 1.0)
    margin = np.abs(scaled - np.floor(scaled) - 0.5)
    margin[cutoff] = 0.0
    return frame, margin


def assert_matches_closed_form(exported: np.ndarray, scene: GaussianScene, camera: Camera, background):
    """
    Whole-frame check of an exported 8-bit image.

    Channels further than 0.01 levels from a rounding boundary must match
    exactly; the rest may differ by one level.
    """
    expected, margin = closed_form_frame(scene, camera, background)
    quantized = np.floor(255.0 * np.clip(expected, 0.0, 1.0) + 0.5).astype(np.int64)
    exported = np.asarray(exported, dtype=np.int64)
    assert exported.shape == quantized.shape

    settled = margin > 0.01
    background_level = np.floor(255.0 * np.clip(np.asarray(background), 0.0, 1.0) + 0.5)
    assert np.count_nonzero(settled & (quantized != background_level)) > 200
    np.testing.assert_array_equal(exported[settled], quantized[settled])
    assert np.max(np.abs(exported - quantized)) <= 1


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def camera():
    return default_camera(64, 64)


@pytest.fixture
def small_scene(camera):
    return random_scene(300, camera, seed=3)


@pytest.fixture
def ply_file(tmp_path):
    """Factory writing vertex records to a PLY file under tmp_path"""
    def _write(records, name='scene.ply', text=False):
        return write_ply(tmp_path / name, records, text=text)
    return _write
