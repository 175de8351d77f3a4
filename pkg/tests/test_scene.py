"""
Tests for scene and camera loading, saving and synthetic generation
"""

import math
import os

import numpy as np
import pytest

from scene import (
    CameraFormatError,
    SceneFormatError,
    format_camera,
    load_camera,
    load_scene,
    parse_camera,
    save_camera,
    save_scene,
)
from scene.synthetic import default_camera, look_at_camera, random_scene, scale_camera

from conftest import make_records


# =============================================================================
# load_scene
# =============================================================================


class TestLoadScene:

    def test_zero_elements_gives_empty_scene(self, ply_file):
        scene = load_scene(ply_file(make_records(0)))
        assert len(scene) == 0

    def test_zero_logit_gives_half_opacity(self, ply_file):
        records = make_records(1)
        records['opacity'] = 0.0
        scene = load_scene(ply_file(records))
        assert scene.opacities[0] == 0.5

    def test_activations_applied(self, ply_file):
        records = make_records(5, seed=1)
        scene = load_scene(ply_file(records))
        assert len(scene) == 5
        np.testing.assert_allclose(scene.scales[:, 0], np.exp(records['scale_0'].astype(np.float64)))
        np.testing.assert_allclose(np.linalg.norm(scene.rotations, axis=1), 1.0, atol=1e-12)
        assert np.all((scene.opacities > 0) & (scene.opacities < 1))

    def test_rest_coefficients_are_channel_major(self, ply_file):
        records = make_records(2, seed=2)
        scene = load_scene(ply_file(records))
        assert scene.sh_degree == 3
        assert scene.sh[0, 1, 0] == np.float64(records['f_rest_0'][0])
        assert scene.sh[0, 1, 1] == np.float64(records['f_rest_15'][0])
        assert scene.sh[0, 15, 2] == np.float64(records['f_rest_44'][0])

    @pytest.mark.parametrize("rest,degree", [(0, 0), (9, 1), (24, 2)])
    def test_lower_sh_degree_detected_and_padded(self, ply_file, rest, degree):
        scene = load_scene(ply_file(make_records(3, rest=rest)))
        assert scene.sh_degree == degree
        assert np.all(scene.sh[:, (degree + 1) ** 2:, :] == 0.0)

    def test_text_mode_reparse_matches_binary(self, ply_file):
        records = make_records(20, seed=4)
        binary = load_scene(ply_file(records, 'a.ply'))
        text = load_scene(ply_file(records, 'b.ply', text=True))
        for i in (0, 7, 19):
            np.testing.assert_allclose(binary.positions[i], text.positions[i], rtol=1e-6)
            np.testing.assert_allclose(binary.scales[i], text.scales[i], rtol=1e-6)
            np.testing.assert_allclose(binary.sh[i], text.sh[i], rtol=1e-6, atol=1e-7)

    def test_missing_property_reports_offset_and_name(self, ply_file):
        path = ply_file(make_records(2, drop=('opacity',)))
        with open(path, 'rb') as f:
            element_offset = f.read().find(b'element vertex')
        with pytest.raises(SceneFormatError) as info:
            load_scene(path)
        assert info.value.property_name == 'opacity'
        assert info.value.offset == element_offset

    def test_truncated_payload_reports_offset_and_property(self, ply_file):
        path = ply_file(make_records(4))
        size = os.path.getsize(path)
        with open(path, 'rb') as f:
            data = f.read()
        with open(path, 'wb') as f:
            f.write(data[:size - 10])
        with pytest.raises(SceneFormatError) as info:
            load_scene(path)
        # last 10 bytes cut: rot_3 and rot_2 lost entirely, rot_1 partially
        assert info.value.property_name == 'rot_1'
        assert info.value.offset == size - 12

    def test_malformed_header(self, tmp_path):
        path = tmp_path / 'bad.ply'
        path.write_bytes(b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty floot x\nend_header\n")
        with pytest.raises(SceneFormatError):
            load_scene(str(path))

    def test_non_finite_value_rejected(self, ply_file):
        records = make_records(3)
        records['x'][1] = np.nan
        with pytest.raises(SceneFormatError) as info:
            load_scene(ply_file(records))
        assert info.value.property_name == 'x'

    def test_zero_rotation_rejected(self, ply_file):
        records = make_records(2)
        for name in ('rot_0', 'rot_1', 'rot_2', 'rot_3'):
            records[name][0] = 0.0
        with pytest.raises(SceneFormatError) as info:
            load_scene(ply_file(records))
        assert info.value.property_name == 'rot_0'


class TestSaveScene:

    def test_round_trip_is_bit_exact(self, ply_file, tmp_path):
        path = ply_file(make_records(10, seed=5))
        out = str(tmp_path / 'out.ply')
        save_scene(load_scene(path), out)
        with open(path, 'rb') as a, open(out, 'rb') as b:
            assert a.read() == b.read()

    def test_in_memory_scene_round_trips_through_activations(self, tmp_path):
        scene = random_scene(16, seed=9, sh_degree=1)
        out = str(tmp_path / 'mem.ply')
        save_scene(scene, out)
        loaded = load_scene(out)
        assert loaded.sh_degree == 1
        np.testing.assert_allclose(loaded.positions, scene.positions, rtol=1e-6, atol=1e-6)
        np.testing.assert_allclose(loaded.scales, scene.scales, rtol=1e-5)
        np.testing.assert_allclose(loaded.opacities, scene.opacities, rtol=1e-5)

    def test_stored_opacity_is_the_gaussian_logit(self, tmp_path):
        scene = random_scene(8, seed=3)
        out = str(tmp_path / 'logit.ply')
        save_scene(scene, out)
        stored = load_scene(out).raw['opacity']
        for i, gaussian in enumerate(scene):
            assert stored[i] == pytest.approx(gaussian.opacity_logit, rel=1e-6, abs=1e-6)
        assert scene[0].opacity_logit == pytest.approx(math.log(scene.opacities[0] / (1.0 - scene.opacities[0])))


# =============================================================================
# Cameras
# =============================================================================


CAMERA_TEXT = """
# test camera
width = 320
height = 240
fx = 300.5
fy = 301.25
cx = 159.5
cy = 119.5
world_to_camera = 1 0 0 0, 0 1 0 0, 0 0 1 2, 0 0 0 1
"""


class TestLoadCamera:

    def test_round_trip(self, tmp_path):
        camera = parse_camera(CAMERA_TEXT)
        path = str(tmp_path / 'view.cam')
        save_camera(camera, path)
        assert load_camera(path) == camera
        assert parse_camera(format_camera(camera)) == camera

    def test_defaults(self):
        camera = parse_camera(CAMERA_TEXT)
        assert camera.near_plane == 0.2
        np.testing.assert_array_equal(camera.position, [0.0, 0.0, -2.0])

    def test_zero_width(self):
        with pytest.raises(CameraFormatError, match="non-positive resolution"):
            parse_camera(CAMERA_TEXT.replace("width = 320", "width = 0"))

    def test_non_positive_focal(self):
        with pytest.raises(CameraFormatError, match="non-positive focal length"):
            parse_camera(CAMERA_TEXT.replace("fx = 300.5", "fx = -1"))

    def test_fov_converts_to_focal(self):
        text = "\n".join([
            "width = 200", "height = 100", "fov_x = 1.2", "fov_y = 0.7",
            "world_to_camera = " + " ".join(str(v) for v in np.eye(4).ravel()),
        ])
        camera = parse_camera(text)
        assert camera.focal_x == pytest.approx(200 / (2 * math.tan(0.6)))
        assert camera.focal_y == pytest.approx(100 / (2 * math.tan(0.35)))
        assert (camera.cx, camera.cy) == (99.5, 49.5)

    def test_missing_field_named(self):
        with pytest.raises(CameraFormatError) as info:
            parse_camera(CAMERA_TEXT.replace("cy = 119.5", ""))
        assert info.value.field == 'cy'

    def test_short_matrix(self):
        with pytest.raises(CameraFormatError) as info:
            parse_camera(CAMERA_TEXT.replace(", 0 0 0 1", ""))
        assert info.value.field == 'world_to_camera'

    def test_duplicate_field(self):
        with pytest.raises(CameraFormatError):
            parse_camera(CAMERA_TEXT + "\nwidth = 10\n")


# =============================================================================
# Synthetic scenes
# =============================================================================


class TestSynthetic:

    def test_seeded(self):
        a = random_scene(50, seed=11)
        b = random_scene(50, seed=11)
        np.testing.assert_array_equal(a.positions, b.positions)
        np.testing.assert_array_equal(a.sh, b.sh)

    def test_scale_camera_keeps_field_of_view(self):
        camera = default_camera(64, 48)
        scaled = scale_camera(camera, 3)
        assert (scaled.width, scaled.height) == (192, 144)
        assert scaled.focal_x == 3 * camera.focal_x
        assert scaled.cx == (camera.cx + 0.5) * 3 - 0.5

    def test_look_at_identity(self):
        camera = look_at_camera((0, 0, 0), (0, 0, 5))
        np.testing.assert_allclose(camera.view_matrix, np.eye(4), atol=1e-12)

    def test_look_at_puts_target_on_axis(self):
        camera = look_at_camera((3.0, -2.0, 1.0), (0.5, 0.5, 4.0), up=(0.0, -1.0, 0.0))
        target = camera.view_matrix @ np.array([0.5, 0.5, 4.0, 1.0])
        np.testing.assert_allclose(target[:2], 0.0, atol=1e-9)
        assert target[2] > 0
