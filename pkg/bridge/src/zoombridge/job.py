"""Job-file parsing for the scorer exchange protocol."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import JobError

JOB_FORMAT = "zoomlens-job"
JOB_VERSION = 1


@dataclass(frozen=True)
class BridgeJob:
    grid_path: str
    images: tuple[tuple[str, str | None], ...]  # (id, optional path)
    output_path: str
    model: str
    device: str = "cpu"
    batch_size: int = 16
    options: dict = field(default_factory=dict)

    @property
    def image_ids(self) -> list[str]:
        return [i for i, _ in self.images]


def load_job(path: str | Path) -> BridgeJob:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise JobError(f"cannot read job file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise JobError(f"job file is not valid JSON: {exc}") from exc
    if doc.get("format") != JOB_FORMAT:
        raise JobError("not a zoomlens job file")
    if doc.get("version") != JOB_VERSION:
        raise JobError(f"unsupported job version {doc.get('version')}")
    for key in ("grid", "images", "output", "model"):
        if key not in doc:
            raise JobError(f"job file missing {key!r}")
    images = []
    for item in doc["images"]:
        if not isinstance(item, dict) or "id" not in item:
            raise JobError(f"bad image entry {item!r}")
        images.append((str(item["id"]), item.get("path")))
    if not images:
        raise JobError("job contains no images")
    ids = [i for i, _ in images]
    if len(set(ids)) != len(ids):
        raise JobError("job image ids contain duplicates")
    return BridgeJob(
        grid_path=str(doc["grid"]),
        images=tuple(images),
        output_path=str(doc["output"]),
        model=str(doc["model"]),
        device=str(doc.get("device", "cpu")),
        batch_size=int(doc.get("batch_size", 16)),
        options=dict(doc.get("options") or {}),
    )
