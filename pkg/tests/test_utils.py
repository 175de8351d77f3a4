"""
Tests for imaging helpers, stage timing and configuration
"""

import math
import time

import numpy as np
import pytest

from backend_config import BACKEND_TYPES, get_backend_config, get_precision_config
from config import Config, parse_rgb
from utils import StageTimer, error_histogram, load_image, max_abs_error, psnr, save_image, to_uint8


class TestToUint8:

    def test_clamp_and_round_half_up(self):
        assert to_uint8(np.array([0.0, 1.0, 0.5, -1.0, 2.0])).tolist() == [0, 255, 128, 0, 255]


class TestSaveImage:

    @pytest.mark.parametrize("name", ['frame.png', 'frame.ppm'])
    def test_round_trip(self, tmp_path, rng, name):
        rgb = rng.uniform(-0.1, 1.1, (9, 13, 3)).astype(np.float32)
        path = str(tmp_path / name)
        save_image(rgb, path)
        np.testing.assert_array_equal(load_image(path), to_uint8(rgb))

    def test_ppm_header(self, tmp_path):
        path = str(tmp_path / 'frame.ppm')
        save_image(np.zeros((2, 3, 3)), path)
        with open(path, 'rb') as f:
            assert f.read(2) == b'P6'


class TestMetrics:

    def test_identical_frames(self):
        frame = np.full((4, 4, 3), 0.3)
        assert math.isinf(psnr(frame, frame))
        assert max_abs_error(frame, frame) == 0.0

    def test_known_mse(self):
        assert psnr(np.zeros((4, 4, 3)), np.full((4, 4, 3), 0.1)) == pytest.approx(20.0)

    def test_values_are_clamped(self):
        assert math.isinf(psnr(np.full((2, 2, 3), 1.5), np.ones((2, 2, 3))))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))

    def test_histogram_buckets(self):
        a = np.zeros((1, 4, 3))
        b = np.zeros((1, 4, 3))
        b[0, 1, 0] = 1.0 / 255.0
        b[0, 2, 2] = 3.0 / 255.0
        b[0, 3, 1] = 20.0 / 255.0
        hist = error_histogram(a, b)
        assert hist == {'0': 1, '1': 1, '2': 0, '3-4': 1, '5-8': 0, '9-16': 0, '17+': 1}


class TestStageTimer:

    def test_accumulates_per_stage(self):
        timer = StageTimer()
        for _ in range(2):
            with timer.stage('sort'):
                time.sleep(0.002)
        with timer.stage('blend'):
            pass
        assert timer.ms['sort'] >= 4.0
        assert set(timer.ms) == {'sort', 'blend'}
        assert timer.total_ms() >= sum(timer.ms.values())

    def test_records_on_error(self):
        timer = StageTimer()
        with pytest.raises(RuntimeError):
            with timer.stage('preprocess'):
                raise RuntimeError("boom")
        assert 'preprocess' in timer.ms


class TestConfig:

    def test_parse_rgb(self):
        assert parse_rgb(" 0.1, 0.2,0.3") == (0.1, 0.2, 0.3)
        with pytest.raises(ValueError):
            parse_rgb("1,2")

    def test_defaults_verify(self):
        assert Config.verify_settings()

    def test_invalid_backend_reported(self, monkeypatch, capsys):
        monkeypatch.setattr(Config, 'BACKEND', 'cuda')
        monkeypatch.setattr(Config, 'BATCH_SIZE', 0)
        assert not Config.verify_settings()
        out = capsys.readouterr().out
        assert "GEMM_SPLAT_BACKEND=cuda" in out
        assert "GEMM_SPLAT_BATCH_SIZE=0" in out

    def test_registry_lookups(self):
        assert get_backend_config('reference')['macs_per_pair'] == 3
        assert get_backend_config('gemm')['uses_pixel_matrix']
        assert get_backend_config('cuda') == {}
        assert get_precision_config('mixed')['operand_dtype'] == 'float16'
        assert set(BACKEND_TYPES) == {'reference', 'gemm'}
