"""Accuracy analytics over correctness matrices.

Everything here is a pure reduction over immutable matrices: single-crop
top-1 accuracy, any-crop upper-bound accuracy, the random baseline, the
per-anchor 3x3 heatmap, the per-zoom-group breakdown, and the center-zoom
sweep curve.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .geometry import CENTER_SWEEP_SCALES, TransformGrid, ZoomGroup
from .store import CorrectnessMatrix


@dataclass(frozen=True)
class EvalReport:
    """One reported fraction plus enough context to reproduce it."""

    dataset_id: str
    n_images: int
    metric: str
    value: float
    subset: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"metric value must be in [0, 1], got {self.value}")

    def as_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "n_images": self.n_images,
            "metric": self.metric,
            "value": self.value,
            "percent": format_percent(self.value),
            "subset": self.subset,
        }


def format_percent(fraction: float) -> str:
    """Two-decimal percent string used in CLI output."""
    return f"{fraction * 100.0:.2f}"


def top1_accuracy(cm: CorrectnessMatrix, transform_id: int) -> float:
    """Mean of one transform's correctness column."""
    if len(cm.image_ids) == 0:
        raise DataError("correctness matrix has no images")
    j = cm.transform_index(transform_id)
    return float(np.mean(cm.bits[:, j]))


def upper_bound_accuracy(cm: CorrectnessMatrix, subset: Iterable[int]) -> float:
    """Fraction of images correct under at least one transform in ``subset``."""
    if len(cm.image_ids) == 0:
        raise DataError("correctness matrix has no images")
    cols = [cm.transform_index(t) for t in subset]
    if not cols:
        raise DataError("transform subset is empty")
    return float(np.mean(np.any(cm.bits[:, cols], axis=1)))


def random_baseline(n_crops: int, class_count: int) -> float:
    """Chance of hitting the right class in ``n_crops`` independent tries."""
    if n_crops < 1 or class_count < 1:
        raise ValueError("n_crops and class_count must be >= 1")
    return min(n_crops / class_count, 1.0)


@dataclass(frozen=True)
class AnchorHeatmap:
    """3x3 per-anchor upper-bound fractions; None marks an empty anchor."""

    values: tuple[tuple[float | None, ...], ...]
    delta_vs_center: tuple[tuple[float | None, ...], ...]
    n_images: int

    def to_csv(self) -> str:
        """Two 3x3 blocks: the per-anchor values, then deltas vs center."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        for row in self.values:
            writer.writerow(["" if v is None else repr(v) for v in row])
        writer.writerow([])
        for row in self.delta_vs_center:
            writer.writerow(["" if v is None else repr(v) for v in row])
        return out.getvalue()


def per_anchor_upper_bound(
    cm: CorrectnessMatrix,
    grid: TransformGrid,
    subset: Iterable[int] | None = None,
) -> AnchorHeatmap:
    """Upper-bound accuracy per anchor, restricted to ``subset`` when given.

    Deltas are each cell minus the center cell. Anchors whose transform set
    does not intersect the subset are reported as absent, not zero.
    """
    chosen = set(subset) if subset is not None else set(cm.transform_ids)
    unknown = chosen - set(grid.ids())
    if unknown:
        raise DataError(f"subset ids {sorted(unknown)} are outside the grid")
    cells: list[list[float | None]] = []
    for row in range(3):
        line: list[float | None] = []
        for col in range(3):
            ids = [t for t in grid.ids_for_anchor(row, col) if t in chosen and t in cm.transform_ids]
            line.append(upper_bound_accuracy(cm, ids) if ids else None)
        cells.append(line)
    center = cells[1][1]
    deltas = tuple(
        tuple(None if (v is None or center is None) else v - center for v in line)
        for line in cells
    )
    return AnchorHeatmap(tuple(tuple(line) for line in cells), deltas, len(cm.image_ids))


@dataclass(frozen=True)
class GroupBreakdown:
    """Per-zoom-group solve rates and exclusive-solve rates."""

    solves: dict[ZoomGroup, float]
    only: dict[ZoomGroup, float]
    n_images: int

    def as_dict(self) -> dict:
        return {
            "n_images": self.n_images,
            "solves": {g.value: v for g, v in self.solves.items()},
            "only": {g.value: v for g, v in self.only.items()},
        }


def zoom_group_breakdown(cm: CorrectnessMatrix, grid: TransformGrid) -> GroupBreakdown:
    """How much each zoom group contributes, overall and exclusively.

    solves(g) is the upper bound over g's columns; only(g) counts images
    solved by g and by neither of the other two groups.
    """
    if len(cm.image_ids) == 0:
        raise DataError("correctness matrix has no images")
    solved_by: dict[ZoomGroup, np.ndarray] = {}
    for group in ZoomGroup:
        cols = [
            cm.transform_index(t)
            for t in grid.ids_for_group(group)
            if t in cm.transform_ids
        ]
        if cols:
            solved_by[group] = np.any(cm.bits[:, cols], axis=1)
        else:
            solved_by[group] = np.zeros(len(cm.image_ids), dtype=bool)
    solves = {g: float(np.mean(v)) for g, v in solved_by.items()}
    only: dict[ZoomGroup, float] = {}
    for group in ZoomGroup:
        others = np.zeros(len(cm.image_ids), dtype=bool)
        for other in ZoomGroup:
            if other is not group:
                others |= solved_by[other]
        only[group] = float(np.mean(solved_by[group] & ~others))
    return GroupBreakdown(solves, only, len(cm.image_ids))


def center_zoom_sweep(
    cm: CorrectnessMatrix, scales: Sequence[int] = CENTER_SWEEP_SCALES
) -> list[tuple[int, float]]:
    """Accuracy per center-zoom scale; columns are tagged with scale values."""
    curve = []
    for s in scales:
        curve.append((int(s), top1_accuracy(cm, s)))
    return curve


def reports_to_json(reports: Iterable[EvalReport]) -> str:
    return json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True)


def reports_to_csv(reports: Iterable[EvalReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["dataset_id", "n_images", "metric", "value", "percent", "subset"])
    for r in reports:
        writer.writerow(
            [r.dataset_id, r.n_images, r.metric, repr(r.value), format_percent(r.value),
             json.dumps(r.subset, sort_keys=True)]
        )
    return out.getvalue()
