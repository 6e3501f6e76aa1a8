"""Hard-benchmark construction: filter, human-feedback merge, cleanup.

The pipeline keeps images that no transform in the full grid classifies
correctly, optionally passes flagged images through the annotator-agreement
rule, drops entries whose labels hit the exclusion list, and emits a
deterministic manifest (JSON header line followed by JSONL entries).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, FormatError
from .geometry import TransformGrid
from .store import CorrectnessMatrix, LabelSet, LabelSpace

MANIFEST_FORMAT = "zoomlens-hardset"
MANIFEST_VERSION = 1

# Classes whose images routinely belong to more than one class.
DEFAULT_EXCLUDED_CLASSES: tuple[str, ...] = (
    "sunglass",
    "sunglasses",
    "tub",
    "bathtub",
    "cradle",
    "bassinet",
    "projectile",
    "missile",
)


class Vote(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    NOT_SURE = "not_sure"


@dataclass(frozen=True)
class AnnotationRecord:
    """Votes for one flagged image: exactly 3 from group A, any from group B."""

    image_id: str
    group_a: tuple[Vote, Vote, Vote]
    group_b: tuple[Vote, ...] = ()

    def __post_init__(self) -> None:
        if len(self.group_a) != 3:
            raise ValueError(
                f"group A must have exactly 3 votes for {self.image_id!r}, got {len(self.group_a)}"
            )
        for v in (*self.group_a, *self.group_b):
            if not isinstance(v, Vote):
                raise ValueError(f"malformed vote {v!r} for {self.image_id!r}")


def annotation_merge(rec: AnnotationRecord) -> bool:
    """Keep an image iff 3/3 of group A accept, or 2/3 accept and every
    group-B reviewer (at least one required) accepts. not_sure never counts
    as an accept."""
    a_accepts = sum(1 for v in rec.group_a if v is Vote.ACCEPT)
    if a_accepts == 3:
        return True
    if a_accepts == 2:
        return bool(rec.group_b) and all(v is Vote.ACCEPT for v in rec.group_b)
    return False


def unclassifiable_filter(
    cm: CorrectnessMatrix, grid: TransformGrid | None = None
) -> list[str]:
    """Image ids with no correct bit anywhere in the (full-grid) matrix."""
    if grid is not None and tuple(cm.transform_ids) != tuple(grid.ids()):
        raise DataError(
            f"matrix covers {len(cm.transform_ids)} transforms, grid has {len(grid)}"
        )
    dead = ~np.any(cm.bits, axis=1)
    return [cm.image_ids[i] for i in np.nonzero(dead)[0]]


@dataclass(frozen=True)
class HardSetEntry:
    image_id: str
    source_dataset: str
    labels: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "source_dataset": self.source_dataset,
            "labels": list(self.labels),
        }


def class_exclusion(
    entries: Sequence[HardSetEntry],
    excluded_names: Iterable[str],
    space: LabelSpace,
) -> list[HardSetEntry]:
    """Drop entries whose label set intersects the excluded classes."""
    excluded = frozenset(space.index_of(name) for name in excluded_names)
    return [e for e in entries if not excluded.intersection(e.labels)]


@dataclass(frozen=True)
class SourceInput:
    """Everything one source dataset contributes to the build."""

    name: str
    correctness: CorrectnessMatrix
    labels: Mapping[str, LabelSet]
    flagged: frozenset[str] = frozenset()
    annotations: Mapping[str, AnnotationRecord] = field(default_factory=dict)
    pre_excluded: frozenset[str] = frozenset()


@dataclass(frozen=True)
class HardSetManifest:
    entries: tuple[HardSetEntry, ...]
    source_counts: dict[str, int]
    excluded_classes: tuple[str, ...]
    version: int = MANIFEST_VERSION

    def to_text(self) -> str:
        header = {
            "format": MANIFEST_FORMAT,
            "version": self.version,
            "total": len(self.entries),
            "source_counts": dict(sorted(self.source_counts.items())),
            "excluded_classes": list(self.excluded_classes),
        }
        lines = [json.dumps(header, sort_keys=True)]
        lines.extend(json.dumps(e.as_dict(), sort_keys=True) for e in self.entries)
        return "\n".join(lines) + "\n"


def manifest_from_text(text: str) -> HardSetManifest:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty manifest file")
    header = json.loads(lines[0])
    if header.get("format") != MANIFEST_FORMAT:
        raise FormatError("not a zoomlens hardset manifest")
    if header.get("version") != MANIFEST_VERSION:
        raise FormatError(f"unsupported manifest version {header.get('version')}")
    entries = tuple(
        HardSetEntry(d["image_id"], d["source_dataset"], tuple(d["labels"]))
        for d in map(json.loads, lines[1:])
    )
    if len(entries) != header.get("total"):
        raise FormatError(
            f"manifest header claims {header.get('total')} entries, found {len(entries)}"
        )
    return HardSetManifest(entries, dict(header["source_counts"]), tuple(header["excluded_classes"]))


def build_manifest(
    sources: Sequence[SourceInput],
    space: LabelSpace,
    excluded_classes: Iterable[str] = DEFAULT_EXCLUDED_CLASSES,
    grid: TransformGrid | None = None,
) -> HardSetManifest:
    """Run the full pipeline over every source, deterministically.

    Per source: unclassifiable filter, manual pre-exclusions, the
    annotator-agreement merge on flagged ids, then the class exclusion over
    the pooled entries. Ids must be unique across sources.
    """
    excluded_classes = tuple(excluded_classes)
    pooled: list[HardSetEntry] = []
    seen: dict[str, str] = {}
    for source in sources:
        candidates = unclassifiable_filter(source.correctness, grid)
        for image_id in candidates:
            if image_id in source.pre_excluded:
                continue
            if image_id in source.flagged:
                rec = source.annotations.get(image_id)
                if rec is None:
                    raise DataError(
                        f"image {image_id!r} is flagged but has no annotation record"
                    )
                if not annotation_merge(rec):
                    continue
            labels = source.labels.get(image_id)
            if labels is None:
                raise DataError(f"no label set for hard-set candidate {image_id!r}")
            if image_id in seen:
                raise DataError(
                    f"image id {image_id!r} appears in both {seen[image_id]!r} and {source.name!r}"
                )
            seen[image_id] = source.name
            pooled.append(HardSetEntry(image_id, source.name, tuple(sorted(labels.labels))))
    kept = class_exclusion(pooled, excluded_classes, space)
    kept.sort(key=lambda e: e.image_id)
    counts: dict[str, int] = {s.name: 0 for s in sources}
    for entry in kept:
        counts[entry.source_dataset] += 1
    return HardSetManifest(tuple(kept), counts, excluded_classes)


# ---------------------------------------------------------------------------
# Annotation CSV parsing
# ---------------------------------------------------------------------------

def parse_annotations_csv(text: str) -> dict[str, AnnotationRecord]:
    """Read (image_id, annotator_group, annotator_id, vote) rows into records."""
    reader = csv.DictReader(io.StringIO(text))
    required = {"image_id", "annotator_group", "annotator_id", "vote"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise FormatError(
            f"annotations CSV must have columns {sorted(required)}, got {reader.fieldnames}"
        )
    a_votes: dict[str, list[Vote]] = {}
    b_votes: dict[str, list[Vote]] = {}
    for line, row in enumerate(reader, start=2):
        image_id = row["image_id"].strip()
        group = row["annotator_group"].strip().upper()
        try:
            vote = Vote(row["vote"].strip().lower())
        except ValueError:
            raise FormatError(f"line {line}: malformed vote {row['vote']!r}") from None
        if group == "A":
            a_votes.setdefault(image_id, []).append(vote)
        elif group == "B":
            b_votes.setdefault(image_id, []).append(vote)
        else:
            raise FormatError(f"line {line}: annotator group must be A or B, got {group!r}")
    records = {}
    for image_id in sorted(set(a_votes) | set(b_votes)):
        votes_a = a_votes.get(image_id, [])
        if len(votes_a) != 3:
            raise DataError(
                f"image {image_id!r} has {len(votes_a)} group-A votes, expected exactly 3"
            )
        records[image_id] = AnnotationRecord(
            image_id, tuple(votes_a), tuple(b_votes.get(image_id, []))
        )
    return records


def parse_exclusion_list(text: str) -> tuple[str, ...]:
    """One class name per line; blank lines and # comments are skipped."""
    names = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.append(line)
    return tuple(names)
