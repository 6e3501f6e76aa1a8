"""Deterministic stand-in classifier for end-to-end pipeline runs.

Base logits are a pure function of (seed, image_id, transform_id), derived
from a SplitMix64-style mixer so independent implementations can reproduce
them bit for bit:

    h0 = mix64(seed)
    h1 = mix64(h0 XOR fnv1a64(utf8(image_id)))
    h2 = mix64(h1 XOR transform_id)
    logit[c] = mix64((h2 + c) mod 2^64) / 2^63 - 1.0      (float64 -> float32)

where mix64 is the SplitMix64 finalizer. Planted rules then add +10 to a
chosen class's logit on matching transforms, which pins the argmax and makes
every downstream analytic computable by hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TransformGrid, ZoomGroup
from .store import LabelSet, LabelSpace, LogitMatrix

_M64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """SplitMix64 finalizer."""
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _M64
    return h


@dataclass(frozen=True)
class PlantedRule:
    """Force ``class_index`` to win on the transforms matching the predicate.

    A rule with neither groups nor transform ids matches every transform.
    """

    image_id: str
    class_index: int
    groups: frozenset[ZoomGroup] | None = None
    transform_ids: frozenset[int] | None = None

    def matches(self, transform_id: int, group: ZoomGroup) -> bool:
        if self.transform_ids is not None and transform_id not in self.transform_ids:
            return False
        if self.groups is not None and group not in self.groups:
            return False
        return True


@dataclass(frozen=True)
class MockScorerConfig:
    seed: int
    class_count: int
    planted: tuple[PlantedRule, ...] = ()

    def __post_init__(self) -> None:
        if self.class_count < 2:
            raise ValueError(f"class count must be >= 2, got {self.class_count}")
        for rule in self.planted:
            if not 0 <= rule.class_index < self.class_count:
                raise ValueError(
                    f"planted class {rule.class_index} outside 0..{self.class_count - 1}"
                )


def mock_score(
    cfg: MockScorerConfig, image_id: str, transform_id: int, group: ZoomGroup
) -> np.ndarray:
    """Logits for one (image, transform) cell. Pixels never enter the hash."""
    h = mix64(cfg.seed & _M64)
    h = mix64(h ^ fnv1a64(image_id.encode("utf-8")))
    h = mix64(h ^ (transform_id & _M64))
    logits = np.empty(cfg.class_count, dtype=np.float64)
    for c in range(cfg.class_count):
        logits[c] = mix64((h + c) & _M64) / float(1 << 63) - 1.0
    for rule in cfg.planted:
        if rule.image_id == image_id and rule.matches(transform_id, group):
            logits[rule.class_index] += 10.0
    return logits


def mock_logit_matrix(
    cfg: MockScorerConfig,
    image_ids: tuple[str, ...] | list[str],
    grid: TransformGrid,
) -> LogitMatrix:
    """Score the full grid for every image, bypassing pixel decoding."""
    image_ids = tuple(image_ids)
    groups = [grid.group_of(tid) for tid in grid.ids()]
    values = np.empty((len(image_ids), len(grid), cfg.class_count), dtype=np.float32)
    for i, image_id in enumerate(image_ids):
        for j, tid in enumerate(grid.ids()):
            values[i, j] = mock_score(cfg, image_id, tid, groups[j])
    return LogitMatrix(image_ids, tuple(grid.ids()), values, grid.sha256)


def mock_column_matrix(
    cfg: MockScorerConfig,
    image_ids: tuple[str, ...] | list[str],
    column_ids: tuple[int, ...],
) -> LogitMatrix:
    """Score arbitrary column ids (sweep scales, crop indices) with no grid.

    Planted group rules do not apply here; columns are opaque ids.
    """
    image_ids = tuple(image_ids)
    values = np.empty((len(image_ids), len(column_ids), cfg.class_count), dtype=np.float32)
    for i, image_id in enumerate(image_ids):
        for j, cid in enumerate(column_ids):
            values[i, j] = mock_score(cfg, image_id, cid, ZoomGroup.ZOOM_LESS)
    return LogitMatrix(image_ids, column_ids, values)


def demo_fixture(
    seed: int = 7, class_count: int = 10
) -> tuple[MockScorerConfig, dict[str, LabelSet], LabelSpace]:
    """Ten images with planted rules partitioning the grid by zoom group.

    Ground truth per image (class in braces; rules cover every transform, so
    all correctness bits are forced):

      img_000 {3}  zoom-out -> 3, elsewhere -> 5   solvable only by zoom-out
      img_001 {3}  zoom-out -> 3, elsewhere -> 5   solvable only by zoom-out
      img_002 {1}  zoom-in  -> 1, elsewhere -> 0   solvable only by zoom-in
      img_003 {2}  zoom-less-> 2, elsewhere -> 0   solvable only by zoom-less
      img_004 {4}  everywhere -> 4                 solvable by every group
      img_005 {6}  everywhere -> 0                 never solvable
      img_006 {7}  in+less -> 7, zoom-out -> 0     zoom-in and zoom-less
      img_007 {0}  everywhere -> 0                 solvable by every group
      img_008 {5}  zoom-in  -> 5, elsewhere -> 6   solvable only by zoom-in
      img_009 {9}  everywhere -> 1                 never solvable
    """
    out = frozenset({ZoomGroup.ZOOM_OUT})
    less = frozenset({ZoomGroup.ZOOM_LESS})
    zin = frozenset({ZoomGroup.ZOOM_IN})
    not_out = frozenset({ZoomGroup.ZOOM_IN, ZoomGroup.ZOOM_LESS})
    not_in = frozenset({ZoomGroup.ZOOM_OUT, ZoomGroup.ZOOM_LESS})
    not_less = frozenset({ZoomGroup.ZOOM_OUT, ZoomGroup.ZOOM_IN})
    rules = (
        PlantedRule("img_000", 3, groups=out),
        PlantedRule("img_000", 5, groups=not_out),
        PlantedRule("img_001", 3, groups=out),
        PlantedRule("img_001", 5, groups=not_out),
        PlantedRule("img_002", 1, groups=zin),
        PlantedRule("img_002", 0, groups=not_in),
        PlantedRule("img_003", 2, groups=less),
        PlantedRule("img_003", 0, groups=not_less),
        PlantedRule("img_004", 4),
        PlantedRule("img_005", 0),
        PlantedRule("img_006", 7, groups=not_out),
        PlantedRule("img_006", 0, groups=out),
        PlantedRule("img_007", 0),
        PlantedRule("img_008", 5, groups=zin),
        PlantedRule("img_008", 6, groups=not_in),
        PlantedRule("img_009", 1),
    )
    truths = {
        "img_000": 3, "img_001": 3, "img_002": 1, "img_003": 2, "img_004": 4,
        "img_005": 6, "img_006": 7, "img_007": 0, "img_008": 5, "img_009": 9,
    }
    labels = {i: LabelSet(i, frozenset({c})) for i, c in truths.items()}
    cfg = MockScorerConfig(seed=seed, class_count=class_count, planted=rules)
    return cfg, labels, LabelSpace(class_count)


DEMO_IMAGE_IDS: tuple[str, ...] = tuple(f"img_{i:03d}" for i in range(10))
