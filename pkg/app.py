#!/usr/bin/env python3
"""
gemm-splat - tile-based Gaussian splat renderer
Commands: render a frame, compare blending backends, run benchmarks
"""

import io
import math
import os
import sys
import logging
from logging.handlers import RotatingFileHandler

import click

from backend_config import BACKEND_TYPES, PRECISION_MODES
from binning import DuplicationCapacityError
from config import DEFAULT_ENV_FILE, Config, load_env_file, parse_rgb
from renderer import RenderConfig, render, run_benchmark, write_csv
from renderer.benchmark import BATCH_SIZES, RESOLUTION_SCALES
from scene import CameraFormatError, SceneFormatError, load_camera, load_scene
from scene.synthetic import default_camera, random_scene, scale_camera
from utils.imaging import error_histogram, max_abs_error, psnr, save_image

EXIT_OK = 0
EXIT_FLOOR_VIOLATED = 1
EXIT_ERROR = 2

# errors reported as a one-line message with EXIT_ERROR
HANDLED_ERRORS = (SceneFormatError, CameraFormatError, DuplicationCapacityError, OSError, ValueError)


def setup_logging() -> None:
    handlers = [logging.StreamHandler()]
    if Config.LOG_PATH:
        handlers.append(RotatingFileHandler(Config.LOG_PATH, maxBytes=10 * 1024 * 1024, backupCount=5))
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )


def fail(message: str) -> None:
    logging.error(message)
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_ERROR)


def _background(ctx, param, value):
    if value is None:
        return None
    try:
        return parse_rgb(value)
    except ValueError as e:
        raise click.BadParameter(str(e))


def frame_options(func):
    """Scene, camera and render flags shared by render and compare"""
    options = [
        click.option('--scene', type=click.Path(dir_okay=False), help='Gaussian scene (.ply)'),
        click.option('--camera', type=click.Path(dir_okay=False), help='Camera description file'),
        click.option('--synthetic', type=click.IntRange(min=0), help='Render N random splats instead of --scene'),
        click.option('--seed', type=int, default=0, show_default=True, help='Seed for --synthetic'),
        click.option('--precision', type=click.Choice(list(PRECISION_MODES)), help='GEMM operand precision'),
        click.option('--tile-size', type=click.IntRange(min=1), help='Tile edge in pixels'),
        click.option('--batch-size', type=click.IntRange(min=1), help='Splats per GEMM batch'),
        click.option('--workers', type=click.IntRange(min=1), help='Tile worker threads'),
        click.option('--background', callback=_background, help='Background color r,g,b in [0,1]'),
        click.option('--res-scale', type=click.IntRange(min=1), default=1, show_default=True,
                     help='Resolution multiplier'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_inputs(scene_path, camera_path, synthetic, seed):
    """Load or generate (name, scene, camera)"""
    if synthetic is not None:
        camera = load_camera(camera_path) if camera_path else default_camera()
        return f"synthetic-{synthetic}", random_scene(synthetic, camera, seed=seed), camera
    if not scene_path:
        raise ValueError("either --scene or --synthetic is required")
    if not camera_path:
        raise ValueError("--camera is required with --scene")
    if not os.path.exists(scene_path):
        raise FileNotFoundError(f"scene not found: {scene_path}")
    if not os.path.exists(camera_path):
        raise FileNotFoundError(f"camera not found: {camera_path}")
    name = os.path.splitext(os.path.basename(scene_path))[0]
    return name, load_scene(scene_path), load_camera(camera_path)


@click.group()
@click.option('--env-file', type=click.Path(dir_okay=False), envvar='GEMM_SPLAT_ENV_FILE',
              default=DEFAULT_ENV_FILE, show_default=True, help='Settings loaded before the environment is read')
def cli(env_file):
    """Tile-based Gaussian splat renderer with a GEMM blending backend."""
    loaded = load_env_file(env_file)
    try:
        Config.load()
    except ValueError as e:
        click.echo(f"error: invalid environment setting: {e}", err=True)
        sys.exit(EXIT_ERROR)
    setup_logging()
    if loaded:
        logging.info(f"Loaded environment variables from {loaded}")
    if not Config.verify_settings():
        sys.exit(EXIT_ERROR)
    Config.log_startup_info(logging.getLogger())


@cli.command('render')
@frame_options
@click.option('--backend', type=click.Choice(list(BACKEND_TYPES)), help='Blending backend')
@click.option('--out', type=click.Path(dir_okay=False), default='frame.ppm', show_default=True,
              help='Output image (.ppm or .png)')
def cmd_render(scene, camera, synthetic, seed, precision, tile_size, batch_size, workers,
               background, res_scale, backend, out):
    """Render one frame and print its stats."""
    try:
        _, gaussians, cam = load_inputs(scene, camera, synthetic, seed)
        if res_scale != 1:
            cam = scale_camera(cam, res_scale)
        config = RenderConfig().with_overrides(
            backend=backend, precision=precision, tile_size=tile_size,
            batch_size=batch_size, workers=workers, background=background,
        )
        frame = render(gaussians, cam, config)
        save_image(frame.color, out)
    except HANDLED_ERRORS as e:
        fail(str(e))

    logging.info(f"Rendered {frame.width}x{frame.height} in {frame.stats.total_ms:.1f} ms")
    click.echo(frame.stats.format_block())
    sys.exit(EXIT_OK)


@cli.command('compare')
@frame_options
@click.option('--backend', type=click.Choice(list(BACKEND_TYPES)), default='gemm', show_default=True,
              help='Backend compared against the reference')
@click.option('--psnr-floor', type=float, help='Minimum PSNR in dB (default from config; none for mixed)')
def cmd_compare(scene, camera, synthetic, seed, precision, tile_size, batch_size, workers,
                background, res_scale, backend, psnr_floor):
    """Render with the reference and another backend and report the difference."""
    try:
        _, gaussians, cam = load_inputs(scene, camera, synthetic, seed)
        if res_scale != 1:
            cam = scale_camera(cam, res_scale)
        base = RenderConfig().with_overrides(
            precision=precision, tile_size=tile_size, batch_size=batch_size,
            workers=workers, background=background,
        )
        expected = render(gaussians, cam, base.with_overrides(backend='reference'))
        candidate_config = base.with_overrides(backend=backend)
        actual = render(gaussians, cam, candidate_config)
    except HANDLED_ERRORS as e:
        fail(str(e))

    if psnr_floor is None and not (backend == 'gemm' and candidate_config.precision == 'mixed'):
        psnr_floor = Config.PSNR_FLOOR

    value = psnr(expected.color, actual.color)
    click.echo(f"psnr_db:       {'inf' if math.isinf(value) else f'{value:.3f}'}")
    click.echo(f"max_abs_error: {max_abs_error(expected.color, actual.color):.6f}")
    click.echo("histogram (max channel error, 8-bit levels):")
    for label, count in error_histogram(expected.color, actual.color).items():
        click.echo(f"  {label:>5}: {count}")

    if psnr_floor is not None and value < psnr_floor:
        logging.warning(f"PSNR {value:.3f} dB below floor {psnr_floor:.3f} dB")
        sys.exit(EXIT_FLOOR_VIOLATED)
    sys.exit(EXIT_OK)


@cli.command('bench')
@click.option('--scene', 'scenes', multiple=True, type=click.Path(dir_okay=False),
              help='Gaussian scene (.ply); repeatable')
@click.option('--camera', type=click.Path(dir_okay=False), help='Camera description file')
@click.option('--synthetic', type=click.IntRange(min=1), help='Benchmark N random splats')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--backend', 'backends', multiple=True, type=click.Choice(list(BACKEND_TYPES)),
              help='Backends to time (default: all)')
@click.option('--precision', type=click.Choice(list(PRECISION_MODES)))
@click.option('--batch-size', 'batch_sizes', multiple=True, type=click.IntRange(min=1),
              help='Batch sizes to sweep (default: 32 64 128 256)')
@click.option('--res-scale', 'res_scales', multiple=True, type=click.IntRange(min=1),
              help='Resolution scales to sweep (default: 1 2 3)')
@click.option('--tile-size', type=click.IntRange(min=1))
@click.option('--workers', type=click.IntRange(min=1))
@click.option('--background', callback=_background)
@click.option('--reps', type=click.IntRange(min=1), help='Timed repetitions (default from config)')
@click.option('--warmup', type=click.IntRange(min=0), help='Untimed warmup renders (default from config)')
@click.option('--out', type=click.Path(dir_okay=False), help='CSV output (default: stdout)')
def cmd_bench(scenes, camera, synthetic, seed, backends, precision, batch_sizes, res_scales,
              tile_size, workers, background, reps, warmup, out):
    """Time renders over backend, batch size and resolution scale; emit CSV."""
    try:
        inputs = []
        if synthetic is not None:
            inputs.append(load_inputs(None, camera, synthetic, seed))
        for path in scenes:
            inputs.append(load_inputs(path, camera, None, seed))
        if not inputs:
            raise ValueError("either --scene or --synthetic is required")

        base = RenderConfig().with_overrides(
            precision=precision, tile_size=tile_size, workers=workers, background=background,
        )
        rows = run_benchmark(
            inputs, base,
            backends=backends or tuple(BACKEND_TYPES),
            batch_sizes=batch_sizes or BATCH_SIZES,
            resolution_scales=res_scales or RESOLUTION_SCALES,
            reps=Config.BENCH_REPS if reps is None else reps,
            warmup=Config.BENCH_WARMUP if warmup is None else warmup,
        )
        if out:
            with open(out, 'w', newline='') as stream:
                write_csv(rows, stream)
            logging.info(f"Wrote {len(rows)} benchmark rows to {out}")
        else:
            buffer = io.StringIO()
            write_csv(rows, buffer)
            click.echo(buffer.getvalue(), nl=False)
    except HANDLED_ERRORS as e:
        fail(str(e))
    sys.exit(EXIT_OK)


if __name__ == '__main__':
    cli()
