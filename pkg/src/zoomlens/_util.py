"""Small numeric and runtime helpers."""

from __future__ import annotations

import math
import os

import numpy as np

THREADS_ENV_VAR = "ZOOMLENS_THREADS"


def compensated_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sum along ``axis`` with exact compensated (Shewchuk) accumulation.

    The result is correctly rounded, so it is invariant under any permutation
    of the summands. Used wherever the contract demands order-independent
    reductions (mean aggregation, marginal-entropy terms).
    """
    arr = np.asarray(values, dtype=np.float64)
    moved = np.moveaxis(arr, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    out = np.empty(flat.shape[1], dtype=np.float64)
    for j in range(flat.shape[1]):
        out[j] = math.fsum(flat[:, j])
    return out.reshape(moved.shape[1:])


def compensated_mean(values: np.ndarray, axis: int = 0) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    return compensated_sum(arr, axis=axis) / arr.shape[axis]


def worker_count(requested: int | None = None) -> int:
    """Resolve the data-parallel worker count.

    Explicit request wins, then the ZOOMLENS_THREADS environment variable,
    then 1. Values below 1 are clamped to 1.
    """
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV_VAR)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1
