"""
Stable least-significant-digit radix sort of 64-bit keys with int32 payloads.
Eight passes over 8-bit digits; a pass whose digits are all equal is a
no-op for a stable sort and is skipped.
"""

import numpy as np
from numba import jit

from utils.jit import JIT_OPTIONS

RADIX_BITS = 8
RADIX = 1 << RADIX_BITS
PASSES = 64 // RADIX_BITS


@jit(**JIT_OPTIONS)
def _radix_sort(keys, values):
    n = keys.shape[0]
    src_k = keys.copy()
    src_v = values.copy()
    dst_k = np.empty_like(src_k)
    dst_v = np.empty_like(src_v)
    counts = np.zeros(RADIX, dtype=np.int64)
    mask = np.uint64(RADIX - 1)

    for p in range(PASSES):
        shift = np.uint64(p * RADIX_BITS)
        counts[:] = 0
        for i in range(n):
            counts[np.int64((src_k[i] >> shift) & mask)] += 1
        if counts.max() == n:
            continue

        total = 0
        for d in range(RADIX):
            c = counts[d]
            counts[d] = total
            total += c

        for i in range(n):
            d = np.int64((src_k[i] >> shift) & mask)
            pos = counts[d]
            dst_k[pos] = src_k[i]
            dst_v[pos] = src_v[i]
            counts[d] = pos + 1

        src_k, dst_k = dst_k, src_k
        src_v, dst_v = dst_v, src_v

    return src_k, src_v


def sort_keys(keys: np.ndarray, values: np.ndarray) -> tuple:
    """
    Sort keys ascending as unsigned 64-bit integers, carrying values along.
    Equal keys keep their input order.

    Args:
        keys: (M,) uint64
        values: (M,) int32 payload (splat index)

    Returns:
        (sorted keys, permuted values) as new arrays
    """
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    values = np.ascontiguousarray(values, dtype=np.int32)
    if keys.shape != values.shape:
        raise ValueError("keys and values must have the same length")
    if keys.size == 0:
        return keys.copy(), values.copy()
    return _radix_sort(keys, values)
