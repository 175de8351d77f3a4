"""
Frame orchestration: preprocess, duplicate, sort, blend, assemble
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from backend_config import get_backend_config
from binning import duplicate_and_key, sort_keys, tile_ranges
from blend import GemmBackend, ReferenceBackend, TileWork, build_pixel_matrix, staged_tile_pipeline
from preprocess import TileGrid, project_scene, touched_tiles_batch
from scene.types import Camera, GaussianScene
from utils.timing import StageTimer
from .frame import RenderFrame, RenderStats
from .settings import RenderConfig


def make_backend(config: RenderConfig):
    """Blending backend for a render configuration"""
    if get_backend_config(config.backend)['uses_pixel_matrix']:
        pixel_matrix = build_pixel_matrix(config.tile_size, config.reference_pixel)
        return GemmBackend(pixel_matrix, batch_size=config.batch_size,
                           precision=config.precision, t_min=config.t_min)
    return ReferenceBackend(tile_size=config.tile_size, t_min=config.t_min)


def render(scene: GaussianScene, camera: Camera, config: Optional[RenderConfig] = None) -> RenderFrame:
    """
    Render one frame.

    Tiles are independent work items pulled from a shared queue by the
    worker pool; each writes only its own region of the frame, so the
    result does not depend on the worker count.

    Args:
        scene: Gaussians to render
        camera: Viewing camera
        config: Render settings (environment defaults when None)

    Returns:
        RenderFrame with stats

    Raises:
        DuplicationCapacityError: more (splat, tile) keys than max_duplicates
    """
    config = config or RenderConfig()
    timer = StageTimer()
    stats = RenderStats(gaussians=len(scene))
    ts = config.tile_size
    grid = TileGrid.for_frame(camera.width, camera.height, ts)

    with timer.stage('preprocess'):
        table = project_scene(scene, camera, workers=config.workers)
        rects, counts = touched_tiles_batch(table, grid, config.sigma_extent)
    stats.splats = len(table)

    with timer.stage('duplicate'):
        keys, values = duplicate_and_key(table.depths, rects, counts, grid.tiles_x, config.max_duplicates)
    stats.duplicates = int(keys.shape[0])

    with timer.stage('sort'):
        keys, values = sort_keys(keys, values)
        ranges = tile_ranges(keys, grid.num_tiles)

    with timer.stage('blend'):
        bg = np.asarray(config.background, dtype=np.float32)
        color = np.empty((grid.tiles_y * ts, grid.tiles_x * ts, 3), dtype=np.float32)
        color[...] = bg
        transmittance = np.ones((grid.tiles_y * ts, grid.tiles_x * ts), dtype=np.float32)
        backend = make_backend(config)
        tiles = ranges.non_empty()

        prefetch_pool = ThreadPoolExecutor(max_workers=config.workers) if config.prefetch else None

        def blend_one(tile_id: int) -> tuple:
            start, end = ranges[tile_id]
            x0, y0 = grid.tile_origin(tile_id)
            work = TileWork(tile_id=int(tile_id), origin=(x0, y0), indices=values[start:end])
            result = staged_tile_pipeline(work, table, backend, config.batch_size, prefetch_pool)
            rgb, t = result.finalize(config.background)
            color[y0:y0 + ts, x0:x0 + ts] = rgb
            transmittance[y0:y0 + ts, x0:x0 + ts] = t
            return result.macs, result.pairs, result.padding_macs, result.batches

        try:
            if config.workers == 1:
                outcomes = [blend_one(t) for t in tiles]
            else:
                with ThreadPoolExecutor(max_workers=config.workers) as pool:
                    outcomes = list(pool.map(blend_one, tiles))
        finally:
            if prefetch_pool is not None:
                prefetch_pool.shutdown(wait=True, cancel_futures=True)

    for macs, pairs, padding, batches in outcomes:
        stats.mac_count += macs
        stats.pairs += pairs
        stats.padding_macs += padding
        stats.batches += batches
    stats.tiles_blended = len(tiles)

    with timer.stage('assemble'):
        frame = RenderFrame(
            width=camera.width,
            height=camera.height,
            color=np.ascontiguousarray(color[:camera.height, :camera.width]),
            transmittance=np.ascontiguousarray(transmittance[:camera.height, :camera.width]),
        )

    stats.stage_ms = dict(timer.ms)
    stats.total_ms = timer.total_ms()
    frame.stats = stats
    logging.debug(
        f"Rendered {camera.width}x{camera.height} with {config.backend}: "
        f"{stats.splats} splats, {stats.duplicates} keys, {stats.total_ms:.1f} ms"
    )
    return frame
