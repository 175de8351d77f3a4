"""
Renderer
- Render configuration
- Frame orchestration over the tile worker pool
- Benchmark harness
"""

from .settings import RenderConfig
from .frame import RenderFrame, RenderStats, STAGES
from .render import render, make_backend
from .benchmark import BenchmarkRow, CSV_COLUMNS, run_benchmark, time_render, write_csv

__all__ = [
    'RenderConfig',
    'RenderFrame',
    'RenderStats',
    'STAGES',
    'render',
    'make_backend',
    'BenchmarkRow',
    'CSV_COLUMNS',
    'run_benchmark',
    'time_render',
    'write_csv',
]
