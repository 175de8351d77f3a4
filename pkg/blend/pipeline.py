"""
Staged per-tile blending pipeline.

Stage 1 loads a batch's splat indices and features, Stage 2 prepares the
backend operand (M_g for the GEMM path) and Stage 3 computes powers and
composites. Stage 1 of batch n+1 may run on a prefetch executor while
Stages 2-3 of batch n run on the calling thread. Every buffered resource
has exactly two slots, selected by batch parity.
"""

import logging
from concurrent.futures import Executor, Future
from dataclasses import dataclass
from typing import Any, List, Optional

import numpy as np

from scene.types import SplatTable
from .gemm import (
    INNER, ROW_BLOCK, PixelMatrix, POWER_CLAMP,
    round_up, build_gaussian_matrix, composite_powers, gemm_padded, round_operand,
)
from .reference import MACS_PER_PAIR, reference_batch
from .state import DEFAULT_EARLY_STOP_T, PixelState, TileResult


@dataclass(frozen=True, eq=False)
class TileWork:
    """One tile's share of the sorted key array"""

    tile_id: int
    origin: tuple              # (x0, y0) of the top-left pixel
    indices: np.ndarray        # (n,) int32 rows of the SplatTable, front to back

    def num_batches(self, batch_size: int) -> int:
        return -(-len(self.indices) // batch_size)


@dataclass(eq=False)
class BatchRecord:
    """Stage 1 output: the features of one batch gathered into contiguous arrays"""

    batch: int
    indices: np.ndarray
    conics: np.ndarray
    centers: np.ndarray
    opacities: np.ndarray
    colors: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])


def load_batch(table: SplatTable, work: TileWork, batch: int, batch_size: int) -> BatchRecord:
    """Stage 1: fetch indices and features of one batch"""
    idx = work.indices[batch * batch_size:(batch + 1) * batch_size]
    return BatchRecord(
        batch=batch,
        indices=idx,
        conics=np.ascontiguousarray(table.conics[idx]),
        centers=np.ascontiguousarray(table.centers[idx]),
        opacities=np.ascontiguousarray(table.opacities[idx]),
        colors=np.ascontiguousarray(table.colors[idx]),
    )


class DoubleBuffer:
    """
    Two-slot buffer. A slot holds either a value or a pending Future.

    The slot being consumed is marked active; filling it raises so a
    prefetch can never overwrite data still in use.
    """

    SLOTS = 2

    def __init__(self, name: str):
        self.name = name
        self._slots: List[Optional[tuple]] = [None] * self.SLOTS
        self._active: Optional[int] = None
        self.discarded = 0

    @staticmethod
    def slot_of(batch: int) -> int:
        return batch % DoubleBuffer.SLOTS

    def put(self, batch: int, value: Any) -> None:
        slot = self.slot_of(batch)
        if self._active == slot:
            raise RuntimeError(f"{self.name}: slot {slot} is in use")
        self._slots[slot] = (batch, value)

    def take(self, batch: int) -> Any:
        slot = self.slot_of(batch)
        entry = self._slots[slot]
        if entry is None or entry[0] != batch:
            raise RuntimeError(f"{self.name}: batch {batch} was never loaded")
        value = entry[1]
        if isinstance(value, Future):
            value = value.result()
            self._slots[slot] = (batch, value)
        self._active = slot
        return value

    def release(self, batch: int) -> None:
        slot = self.slot_of(batch)
        self._slots[slot] = None
        if self._active == slot:
            self._active = None

    def discard(self) -> None:
        """Drop every buffered entry, cancelling pending loads"""
        for slot, entry in enumerate(self._slots):
            if entry is None:
                continue
            if isinstance(entry[1], Future):
                entry[1].cancel()
            self.discarded += 1
            self._slots[slot] = None
        self._active = None


class ReferenceBackend:
    """Per-pixel direct evaluation; Stage 2 has nothing to build"""

    name = 'reference'

    def __init__(self, tile_size: int = 16, t_min: float = DEFAULT_EARLY_STOP_T):
        self.tile_size = tile_size
        self.t_min = np.float32(t_min)

    def prepare(self, record: BatchRecord, work: TileWork) -> None:
        return None

    def consume(self, operand, record: BatchRecord, work: TileWork, state: PixelState) -> tuple:
        pairs = reference_batch(
            np.int64(work.origin[0]), np.int64(work.origin[1]), np.int64(self.tile_size),
            record.centers, record.conics, record.opacities, record.colors,
            state.transmittance, state.color, state.done, self.t_min,
        )
        return MACS_PER_PAIR * int(pairs), int(pairs), 0


class GemmBackend:
    """Batch power matrix through the blocked micro-kernel"""

    name = 'gemm'

    def __init__(self, pixel_matrix: PixelMatrix, batch_size: int = 256, precision: str = 'full',
                 t_min: float = DEFAULT_EARLY_STOP_T):
        self.pixel_matrix = pixel_matrix
        self.tile_size = pixel_matrix.tile_size
        self.precision = precision
        self.t_min = np.float32(t_min)
        self.rows = round_up(batch_size, ROW_BLOCK)
        self.m_p = np.ascontiguousarray(round_operand(pixel_matrix.padded, precision))

    def prepare(self, record: BatchRecord, work: TileWork) -> np.ndarray:
        """Stage 2: M_g against this tile's reference pixel"""
        ox, oy = self.pixel_matrix.origin_offset
        reference_point = (work.origin[0] + ox, work.origin[1] + oy)
        rows = max(self.rows, round_up(len(record), ROW_BLOCK))
        m_g = build_gaussian_matrix(record.conics, record.centers, reference_point, rows)
        return round_operand(m_g, self.precision)

    def consume(self, m_g: np.ndarray, record: BatchRecord, work: TileWork, state: PixelState) -> tuple:
        """Stage 3: powers and compositing; returns (macs, pairs, padding_macs)"""
        powers = gemm_padded(m_g, self.m_p)
        composite_powers(powers, np.int64(len(record)), record.opacities, record.colors,
                         state.transmittance, state.color, state.done,
                         self.t_min, np.float32(POWER_CLAMP))
        pairs = len(record) * state.pixels
        macs = m_g.shape[0] * self.m_p.shape[1] * INNER
        return macs, pairs, macs - INNER * pairs


def staged_tile_pipeline(work: TileWork, table: SplatTable, backend, batch_size: int = 256,
                         prefetch_executor: Optional[Executor] = None) -> TileResult:
    """
    Run one tile through the three-stage pipeline.

    With a prefetch executor, Stage 1 of the next batch is submitted before
    Stages 2-3 of the current one; without it the stages run sequentially.
    Both produce the same bits. Termination of every pixel is checked at
    batch boundaries and any in-flight prefetch is dropped.

    Args:
        work: Tile id, origin and front-to-back splat indices
        table: Projected splats the indices refer to
        backend: ReferenceBackend or GemmBackend
        batch_size: Splats per batch
        prefetch_executor: Optional executor for Stage 1

    Returns:
        TileResult without background applied
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")

    tile_size = backend.tile_size
    state = PixelState.fresh(tile_size * tile_size)
    result = TileResult(tile_size=tile_size, state=state)
    total = work.num_batches(batch_size)
    if total == 0:
        return result

    features = DoubleBuffer('features')
    operands = DoubleBuffer('operands')

    def fetch(n: int) -> Any:
        if prefetch_executor is None:
            return load_batch(table, work, n, batch_size)
        return prefetch_executor.submit(load_batch, table, work, n, batch_size)

    features.put(0, fetch(0))
    for n in range(total):
        record = features.take(n)
        if n + 1 < total:
            features.put(n + 1, fetch(n + 1))

        operands.put(n, backend.prepare(record, work))
        macs, pairs, padding = backend.consume(operands.take(n), record, work, state)
        operands.release(n)
        features.release(n)

        result.macs += macs
        result.pairs += pairs
        result.padding_macs += padding
        result.batches += 1

        if state.all_done():
            features.discard()
            if n + 1 < total:
                logging.debug(f"Tile {work.tile_id}: all pixels terminated after batch {n + 1}/{total}")
            break

    return result
