"""Greedy minimum set cover over the transform-image coverage graph.

Transforms are one side of a bipartite graph, images the other; an edge
means the transform classifies the image correctly. The greedy pass
repeatedly takes the transform covering the most still-uncovered images
(ties to the lowest transform id) until every coverable image is covered.
Images no transform covers cannot affect the cover and are excluded from
the target set up front. A brute-force oracle over small instances backs
the tests.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .errors import DataError, FormatError
from .geometry import TransformGrid, ZoomGroup
from .store import CorrectnessMatrix


@dataclass(frozen=True)
class CoverInstance:
    """Coverage graph: edges[k] holds image indices transform k solves."""

    transform_ids: tuple[int, ...]
    image_ids: tuple[str, ...]
    edges: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.transform_ids):
            raise ValueError("one edge set required per transform")
        n = len(self.image_ids)
        for edge in self.edges:
            if any(not 0 <= i < n for i in edge):
                raise ValueError("edge references an unknown image index")

    @classmethod
    def from_correctness(cls, cm: CorrectnessMatrix) -> "CoverInstance":
        edges = tuple(
            frozenset(int(i) for i in cm.bits[:, j].nonzero()[0])
            for j in range(len(cm.transform_ids))
        )
        return cls(cm.transform_ids, cm.image_ids, edges)

    @property
    def coverable(self) -> frozenset[int]:
        out: set[int] = set()
        for edge in self.edges:
            out |= edge
        return frozenset(out)


@dataclass(frozen=True)
class CoverResult:
    """Transforms chosen in selection order plus per-step marginal gains."""

    chosen: tuple[int, ...]
    gains: tuple[int, ...]
    covered: int
    coverable: int
    n_images: int

    @property
    def complete(self) -> bool:
        return self.covered == self.coverable

    def to_json_dict(self, grid: TransformGrid | None = None) -> dict:
        doc = {
            "chosen": list(self.chosen),
            "gains": list(self.gains),
            "covered": self.covered,
            "coverable": self.coverable,
            "n_images": self.n_images,
        }
        if grid is not None:
            split = cover_group_split(self, grid)
            doc["group_split"] = {g.value: split[g] for g in ZoomGroup}
        return doc

    def to_json(self, grid: TransformGrid | None = None) -> str:
        return json.dumps(self.to_json_dict(grid), indent=2, sort_keys=True)


def cover_result_from_json(text: str) -> CoverResult:
    try:
        doc = json.loads(text)
        return CoverResult(
            chosen=tuple(int(t) for t in doc["chosen"]),
            gains=tuple(int(g) for g in doc["gains"]),
            covered=int(doc["covered"]),
            coverable=int(doc["coverable"]),
            n_images=int(doc["n_images"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"not a cover result file: {exc}") from exc


def greedy_min_cover(ci: CoverInstance, stop_after: int | None = None) -> CoverResult:
    """Greedy cover of every coverable image; ties go to the lowest id.

    Stops early after ``stop_after`` picks (the top-K prefix) or when no
    remaining transform adds coverage.
    """
    if stop_after is not None and stop_after < 1:
        raise ValueError(f"stop_after must be >= 1, got {stop_after}")
    target = ci.coverable
    covered: set[int] = set()
    remaining = dict(zip(ci.transform_ids, ci.edges))
    order = sorted(remaining)  # ascending ids make the tie-break positional
    chosen: list[int] = []
    gains: list[int] = []
    while covered != target:
        if stop_after is not None and len(chosen) >= stop_after:
            break
        best_id, best_gain = None, 0
        for tid in order:
            if tid in remaining:
                gain = len(remaining[tid] - covered)
                if gain > best_gain:
                    best_id, best_gain = tid, gain
        if best_id is None:
            break
        covered |= remaining.pop(best_id)
        chosen.append(best_id)
        gains.append(best_gain)
    return CoverResult(
        chosen=tuple(chosen),
        gains=tuple(gains),
        covered=len(covered),
        coverable=len(target),
        n_images=len(ci.image_ids),
    )


def brute_force_min_cover(ci: CoverInstance, max_transforms: int = 20) -> int:
    """Exact minimum cover size by subset enumeration. Test oracle only."""
    m = len(ci.transform_ids)
    if m > max_transforms:
        raise DataError(f"brute force refused: {m} transforms exceeds bound {max_transforms}")
    target = ci.coverable
    if not target:
        return 0
    for size in range(1, m + 1):
        for combo in itertools.combinations(range(m), size):
            covered: set[int] = set()
            for k in combo:
                covered |= ci.edges[k]
            if covered >= target:
                return size
    raise AssertionError("full transform set must cover the coverable set")


def cover_group_split(result: CoverResult, grid: TransformGrid) -> dict[ZoomGroup, int]:
    """Zoom-in / zoom-out / zoom-less counts within a chosen cover."""
    split = {g: 0 for g in ZoomGroup}
    for tid in result.chosen:
        split[grid.group_of(tid)] += 1
    return split


def mean_cover_fraction(cover_sizes: list[int] | tuple[int, ...], grid_size: int) -> float:
    """Average fraction of the grid the covers needed."""
    if grid_size < 1:
        raise ValueError(f"grid size must be >= 1, got {grid_size}")
    if not cover_sizes:
        raise DataError("no covers to average")
    return sum(s / grid_size for s in cover_sizes) / len(cover_sizes)
