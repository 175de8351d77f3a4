"""
Wall-clock stage timing
"""

import logging
import time
from contextlib import contextmanager
from typing import Dict


class StageTimer:
    """
    Accumulates wall-clock milliseconds per named stage.

    Example:
        timer = StageTimer()
        with timer.stage('sort'):
            sort_keys(keys, values)
        timer.ms['sort']
    """

    def __init__(self):
        self.ms: Dict[str, float] = {}
        self._start = time.perf_counter()

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - start) * 1000.0
            self.ms[name] = self.ms.get(name, 0.0) + elapsed
            logging.debug(f"Stage {name}: {elapsed:.3f} ms")

    def total_ms(self) -> float:
        """Milliseconds since the timer was created"""
        return (time.perf_counter() - self._start) * 1000.0
