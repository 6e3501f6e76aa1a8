"""Fusing per-crop predictive distributions into a single prediction.

Aggregation operates on softmax probabilities, never raw logits, so the
max mode is not sensitive to scorer-specific logit scales. The mean mode
uses exact compensated summation, making the fused vector independent of
crop order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._util import compensated_mean
from .errors import DataError
from .cover import CoverResult
from .geometry import CropRecipe, TransformGrid, ZoomGroup, five_crop_recipes, ten_crop_recipes
from .store import LogitMatrix

NORMALIZATION_TOL = 1e-6

ZOOM_POLICIES = ("zoom-in", "zoom-out", "zoom-less")
CROP_POLICIES = ("5crop", "10crop")
POLICIES = ZOOM_POLICIES + CROP_POLICIES


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def validate_distributions(dists: np.ndarray) -> np.ndarray:
    arr = np.asarray(dists, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError(f"expected a (K, C) distribution stack, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise DataError("distributions must be finite and non-negative")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > NORMALIZATION_TOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise DataError(f"crop distribution not normalised (off by {worst:.3g})")
    return arr


@dataclass(frozen=True)
class AggregateResult:
    prediction: int
    fused: np.ndarray


def aggregate(dists: np.ndarray, mode: str) -> AggregateResult:
    """Fuse K class distributions by mean or max; argmax ties to lowest index."""
    arr = validate_distributions(dists)
    if mode == "mean":
        fused = compensated_mean(arr, axis=0)
    elif mode == "max":
        fused = np.max(arr, axis=0)
    else:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    return AggregateResult(int(np.argmax(fused)), fused)


def crop_set_for(
    policy: str,
    grid: TransformGrid,
    cover: CoverResult | None = None,
) -> list[int] | list[CropRecipe]:
    """Transform ids (zoom policies) or crop recipes (5/10-crop) for a policy.

    Zoom policies intersect the minimum cover with the group; the classic
    crop policies ignore the cover entirely.
    """
    if policy in CROP_POLICIES:
        recipes = five_crop_recipes(crop_size=grid.crop_size) if policy == "5crop" else ten_crop_recipes(crop_size=grid.crop_size)
        return list(recipes)
    if policy not in ZOOM_POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if cover is None:
        raise DataError(f"policy {policy!r} needs a minimum-cover result")
    group = ZoomGroup(policy)
    ids = [tid for tid in cover.chosen if grid.group_of(tid) is group]
    if not ids:
        raise DataError(f"policy {policy!r}: the cover contains no {group.value} transforms")
    return ids


def aggregate_matrix(
    lm: LogitMatrix,
    transform_ids: Sequence[int],
    mode: str,
) -> list[dict]:
    """Per-image fused predictions over a column subset, as JSONL-ready dicts."""
    cols = [lm.transform_index(t) for t in transform_ids]
    if not cols:
        raise DataError("transform subset is empty")
    out = []
    for i, image_id in enumerate(lm.image_ids):
        dists = softmax(lm.values[i, cols].astype(np.float64))
        result = aggregate(dists, mode)
        out.append(
            {
                "image_id": image_id,
                "class": result.prediction,
                "confidence": float(result.fused[result.prediction]),
            }
        )
    return out


def predictions_to_jsonl(predictions: Iterable[dict]) -> str:
    return "".join(json.dumps(p, sort_keys=True) + "\n" for p in predictions)
