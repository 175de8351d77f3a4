"""
Tests for projection, spherical-harmonic color and tile intersection
"""

import numpy as np
import pytest

from blend import power_ref, ALPHA_MIN
from preprocess import (
    SH_C0,
    TileGrid,
    eval_color,
    eval_colors,
    project_gaussian,
    project_scene,
    sigma_max,
    touched_tiles,
    touched_tiles_batch,
)
from preprocess.projection import LOW_PASS_DILATION, MIN_CHUNK
from scene.synthetic import default_camera, random_scene
from scene.types import Gaussian3D, SH_COEFFS

from conftest import random_tile_splats, splat


def gaussian(position, scale=(0.05, 0.05, 0.05), rotation=(1.0, 0.0, 0.0, 0.0), opacity=0.5, sh=None):
    return Gaussian3D(
        position=tuple(position),
        scale=tuple(scale),
        rotation=tuple(rotation),
        opacity=opacity,
        sh_coeffs=np.zeros((SH_COEFFS, 3)) if sh is None else sh,
    )


# =============================================================================
# project_gaussian
# =============================================================================


class TestProjectGaussian:

    def test_behind_near_plane_culled(self, camera):
        assert project_gaussian(gaussian((0.0, 0.0, 0.1)), camera) is None
        assert project_gaussian(gaussian((0.0, 0.0, -3.0)), camera) is None

    def test_outside_guard_band_culled(self, camera):
        # |x/z| limit is 1.3 * width / (2 fx)
        limit = 1.3 * camera.width / (2.0 * camera.focal_x)
        assert project_gaussian(gaussian((limit * 2.0 * 1.01, 0.0, 2.0)), camera) is None
        assert project_gaussian(gaussian((limit * 2.0 * 0.99, 0.0, 2.0)), camera) is not None

    def test_isotropic_on_axis(self, camera):
        s, z = 0.05, 4.0
        out = project_gaussian(gaussian((0.0, 0.0, z), scale=(s, s, s)), camera)
        assert out is not None
        expected = (camera.focal_x * s / z) ** 2 + LOW_PASS_DILATION
        assert out.conic[1] == 0.0
        assert out.conic[0] == pytest.approx(1.0 / expected, rel=1e-6)
        assert out.conic[2] == pytest.approx(1.0 / expected, rel=1e-6)
        assert out.center == pytest.approx((camera.cx, camera.cy))
        assert out.depth == pytest.approx(z)

    def test_retained_conics_positive_definite(self, small_scene, camera):
        table = project_scene(small_scene, camera)
        assert len(table) > 0
        a, b, c = (table.conics[:, k].astype(np.float64) for k in range(3))
        assert np.all(a > 0) and np.all(c > 0)
        assert np.all(a * c - b * b > 0)
        assert np.all(table.depths > camera.near_plane)

    def test_single_matches_batch(self, small_scene, camera):
        table = project_scene(small_scene, camera)
        for row in (0, len(table) // 2, len(table) - 1):
            single = project_gaussian(small_scene[int(table.source_index[row])], camera)
            assert single == table[row]

    def test_deterministic_across_workers(self):
        camera = default_camera(128, 128)
        scene = random_scene(MIN_CHUNK * 2 + 17, camera, seed=5)
        one = project_scene(scene, camera, workers=1)
        many = project_scene(scene, camera, workers=4)
        for name in ('centers', 'conics', 'colors', 'opacities', 'depths', 'source_index'):
            np.testing.assert_array_equal(getattr(one, name), getattr(many, name))


# =============================================================================
# eval_color
# =============================================================================


class TestEvalColor:

    def test_zero_coefficients(self):
        assert eval_color(gaussian((0, 0, 1)), (0.0, 0.0, 1.0)) == (0.5, 0.5, 0.5)

    def test_degree_zero_only(self):
        sh = np.zeros((SH_COEFFS, 3))
        sh[0] = (1.0, -0.5, 0.25)
        rgb = eval_color(gaussian((0, 0, 1), sh=sh), (0.0, 1.0, 0.0))
        assert rgb == pytest.approx((SH_C0 + 0.5, -0.5 * SH_C0 + 0.5, 0.25 * SH_C0 + 0.5))

    def test_negative_clamped(self):
        sh = np.zeros((SH_COEFFS, 3))
        sh[0, 0] = -10.0
        assert eval_color(gaussian((0, 0, 1), sh=sh), (1.0, 0.0, 0.0))[0] == 0.0

    def test_non_unit_direction_rejected(self):
        with pytest.raises(ValueError):
            eval_color(gaussian((0, 0, 1)), (0.0, 0.0, 1.1))

    def test_degree_one_depends_on_direction(self, rng):
        sh = rng.normal(size=(1, SH_COEFFS, 3))
        up = eval_colors(sh, np.array([[0.0, 1.0, 0.0]]), degree=1)
        down = eval_colors(sh, np.array([[0.0, -1.0, 0.0]]), degree=1)
        assert not np.array_equal(up, down)
        assert np.array_equal(eval_colors(sh, np.array([[0.0, 1.0, 0.0]]), degree=0),
                              eval_colors(sh, np.array([[0.0, -1.0, 0.0]]), degree=0))


# =============================================================================
# touched_tiles
# =============================================================================


class TestTouchedTiles:

    def test_inside_one_tile(self):
        grid = TileGrid.for_frame(64, 64, 16)
        rect = touched_tiles(splat((24.0, 24.0), conic=(4.0, 0.0, 4.0)), grid)
        assert rect.count == 1
        assert rect.tile_ids(grid) == [1 * 4 + 1]

    def test_on_tile_corner(self):
        grid = TileGrid.for_frame(64, 64, 16)
        rect = touched_tiles(splat((32.0, 32.0), conic=(4.0, 0.0, 4.0)), grid)
        assert rect.count == 4
        assert sorted(rect.tile_ids(grid)) == [5, 6, 9, 10]

    def test_off_screen_dropped(self):
        grid = TileGrid.for_frame(64, 64, 16)
        assert touched_tiles(splat((-50.0, 10.0)), grid) is None

    def test_clipped_to_grid(self):
        grid = TileGrid.for_frame(40, 40, 16)
        rect = touched_tiles(splat((20.0, 20.0), conic=(1e-4, 0.0, 1e-4)), grid)
        assert (rect.tx_min, rect.tx_max, rect.ty_min, rect.ty_max) == (0, 2, 0, 2)

    def test_three_sigma_box_is_tighter(self):
        grid = TileGrid.for_frame(64, 64, 16)
        s = splat((25.5, 24.0), conic=(0.25, 0.0, 0.25))
        # sigma 2: 3 sigma reaches x=31.5, the default 3.33 sigma crosses into tile 2
        assert touched_tiles(s, grid, sigma_extent=3.0).count == 1
        assert touched_tiles(s, grid).count == 2

    def test_sigma_max_isotropic(self):
        conics = np.array([[0.25, 0.0, 0.25]], dtype=np.float32)
        assert sigma_max(conics)[0] == pytest.approx(2.0)

    def test_conservative_against_pixel_scan(self):
        """Every pixel with alpha >= 1/255 lies inside a touched tile"""
        width = height = 48
        grid = TileGrid.for_frame(width, height, 16)
        table = random_tile_splats(200, seed=7, tile_origin=(16, 16), spread=30.0)
        table.opacities[:] = 0.99
        rects, counts = touched_tiles_batch(table, grid)

        ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
        for i in range(len(table)):
            conic = tuple(float(v) for v in table.conics[i])
            power = power_ref(conic, (xs - table.centers[i, 0], ys - table.centers[i, 1]))
            alpha = np.minimum(0.99, float(table.opacities[i]) * np.exp(power))
            hit = alpha >= ALPHA_MIN
            if not hit.any():
                continue
            assert counts[i] > 0
            tx, ty = xs[hit] // 16, ys[hit] // 16
            tx_min, tx_max, ty_min, ty_max = rects[i]
            assert np.all((tx >= tx_min) & (tx <= tx_max) & (ty >= ty_min) & (ty <= ty_max))
