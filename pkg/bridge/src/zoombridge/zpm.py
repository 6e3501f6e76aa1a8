"""ZPM1 logit files, written byte-for-byte in the canonical layout.

Layout: magic "ZPM1", u32 little-endian manifest length, canonical JSON
manifest (sorted keys, no spaces), then float32 little-endian logits in
[image][transform][class] order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import JobError

MAGIC = b"ZPM1"
VERSION = 1


def logits_to_bytes(
    image_ids: list[str],
    transform_ids: list[int],
    values: np.ndarray,
    grid_sha256: str | None,
) -> bytes:
    values = np.ascontiguousarray(values, dtype="<f4")
    n, m, c = values.shape
    if n != len(image_ids) or m != len(transform_ids):
        raise JobError(
            f"logit block {values.shape} does not match {len(image_ids)} images "
            f"x {len(transform_ids)} transforms"
        )
    manifest = {
        "version": VERSION,
        "kind": "logits",
        "dtype": "float32-le",
        "image_ids": list(image_ids),
        "transform_ids": [int(t) for t in transform_ids],
        "class_count": c,
        "grid_sha256": grid_sha256,
    }
    payload = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<I", len(payload)) + payload + values.tobytes()


def write_logits(
    path: str | Path,
    image_ids: list[str],
    transform_ids: list[int],
    values: np.ndarray,
    grid_sha256: str | None = None,
) -> None:
    Path(path).write_bytes(logits_to_bytes(image_ids, transform_ids, values, grid_sha256))


def read_logits(path: str | Path) -> tuple[list[str], list[int], np.ndarray, str | None]:
    """Parse a ZPM1 logits file (used by the bridge's own tests)."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise JobError(f"bad ZPM1 magic in {path}")
    (length,) = struct.unpack_from("<I", data, 4)
    manifest = json.loads(data[8 : 8 + length].decode("utf-8"))
    if manifest.get("version") != VERSION or manifest.get("kind") != "logits":
        raise JobError(f"unsupported ZPM1 content in {path}")
    image_ids = list(manifest["image_ids"])
    transform_ids = [int(t) for t in manifest["transform_ids"]]
    c = int(manifest["class_count"])
    blob = data[8 + length :]
    expected = len(image_ids) * len(transform_ids) * c * 4
    if len(blob) != expected:
        raise JobError(f"ZPM1 payload is {len(blob)} bytes, expected {expected}")
    values = np.frombuffer(blob, dtype="<f4").reshape(len(image_ids), len(transform_ids), c)
    return image_ids, transform_ids, values, manifest.get("grid_sha256")
