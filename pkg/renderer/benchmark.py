"""
Benchmark harness: warmup plus timed repetitions over backend, batch size
and resolution scale; results written as CSV (schema in docs/BENCHMARK_CSV.md).
"""

import csv
import logging
import statistics
from dataclasses import asdict, dataclass, fields
from typing import Dict, Iterable, List, Sequence, TextIO, Tuple

from scene.synthetic import scale_camera
from scene.types import Camera, GaussianScene
from .render import render
from .settings import RenderConfig

RESOLUTION_SCALES = (1, 2, 3)
BATCH_SIZES = (32, 64, 128, 256)


@dataclass
class BenchmarkRow:
    scene: str
    backend: str
    batch_size: int
    resolution_scale: int
    mean_ms: float
    stddev_ms: float
    preprocess_ms: float
    duplicate_ms: float
    sort_ms: float
    blend_ms: float
    mac_count: int
    pair_count: int
    padding_macs: int


CSV_COLUMNS = tuple(f.name for f in fields(BenchmarkRow))


def time_render(name: str, scene: GaussianScene, camera: Camera, config: RenderConfig,
                reps: int = 10, warmup: int = 2, resolution_scale: int = 1) -> BenchmarkRow:
    """Render `warmup` untimed and `reps` timed frames; report mean and per-stage means"""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    for _ in range(max(0, warmup)):
        render(scene, camera, config)

    totals: List[float] = []
    stage_sums: Dict[str, float] = {}
    last = None
    for _ in range(reps):
        stats = render(scene, camera, config).stats
        totals.append(stats.total_ms)
        for stage, ms in stats.stage_ms.items():
            stage_sums[stage] = stage_sums.get(stage, 0.0) + ms
        last = stats

    return BenchmarkRow(
        scene=name,
        backend=config.backend if config.backend == 'reference' else f"gemm-{config.precision}",
        batch_size=config.batch_size,
        resolution_scale=resolution_scale,
        mean_ms=statistics.fmean(totals),
        stddev_ms=statistics.stdev(totals) if len(totals) > 1 else 0.0,
        preprocess_ms=stage_sums.get('preprocess', 0.0) / reps,
        duplicate_ms=stage_sums.get('duplicate', 0.0) / reps,
        sort_ms=stage_sums.get('sort', 0.0) / reps,
        blend_ms=stage_sums.get('blend', 0.0) / reps,
        mac_count=last.mac_count,
        pair_count=last.pairs,
        padding_macs=last.padding_macs,
    )


def run_benchmark(scenes: Sequence[Tuple[str, GaussianScene, Camera]], base_config: RenderConfig,
                  backends: Iterable[str] = ('reference', 'gemm'),
                  batch_sizes: Iterable[int] = BATCH_SIZES,
                  resolution_scales: Iterable[int] = RESOLUTION_SCALES,
                  reps: int = 10, warmup: int = 2) -> List[BenchmarkRow]:
    """
    Sweep every (scene, backend, batch size, resolution scale) combination.

    Returns:
        One BenchmarkRow per combination
    """
    rows = []
    for name, scene, camera in scenes:
        for scale in resolution_scales:
            scaled = scale_camera(camera, scale) if scale != 1 else camera
            for backend in backends:
                for batch_size in batch_sizes:
                    config = base_config.with_overrides(backend=backend, batch_size=batch_size)
                    logging.info(
                        f"Benchmark {name} {backend} b={batch_size} "
                        f"{scaled.width}x{scaled.height} ({reps} reps)"
                    )
                    rows.append(time_render(name, scene, scaled, config, reps, warmup, scale))
    return rows


def write_csv(rows: Sequence[BenchmarkRow], stream: TextIO) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        record = asdict(row)
        for key in ('mean_ms', 'stddev_ms', 'preprocess_ms', 'duplicate_ms', 'sort_ms', 'blend_ms'):
            record[key] = f"{record[key]:.3f}"
        writer.writerow(record)
