"""Independent reimplementation of the host's seeded mock scorer.

The contract, restated: with mix64 the SplitMix64 finalizer and fnv1a64 the
64-bit FNV-1a hash,

    h = mix64(seed); h = mix64(h ^ fnv1a64(utf8(image_id)));
    h = mix64(h ^ transform_id); logit[c] = mix64((h + c) mod 2^64) / 2^63 - 1

computed in float64 and stored as float32. Matching this bit for bit is the
cross-implementation check of the exchange protocol.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1


def mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _M64
    return h


def mock_logits(seed: int, image_id: str, transform_id: int, class_count: int) -> np.ndarray:
    h = mix64(seed & _M64)
    h = mix64(h ^ fnv1a64(image_id.encode("utf-8")))
    h = mix64(h ^ (transform_id & _M64))
    out = np.empty(class_count, dtype=np.float64)
    for c in range(class_count):
        out[c] = mix64((h + c) & _M64) / float(1 << 63) - 1.0
    return out


def score_job_mock(image_ids: list[str], transform_ids: list[int], seed: int, class_count: int) -> np.ndarray:
    values = np.empty((len(image_ids), len(transform_ids), class_count), dtype=np.float32)
    for i, image_id in enumerate(image_ids):
        for j, tid in enumerate(transform_ids):
            values[i, j] = mock_logits(seed, image_id, tid, class_count)
    return values
