"""Canonical storage of classifier outputs and ground-truth label sets.

Matrices are immutable after load. The ZPM1 on-disk format is a single
file: magic "ZPM1", a u32 little-endian manifest length, the UTF-8 JSON
manifest, then the binary blob. Logits are little-endian float32 in
[image][transform][class] order; correctness bits are packed row-major,
LSB-first. The manifest's grid_sha256 field ties a matrix to the exact
grid JSON that produced it.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DataError, FormatError

ZPM_MAGIC = b"ZPM1"
ZPM_VERSION = 1


@dataclass(frozen=True)
class LabelSpace:
    """The class universe: a count and optional unique names."""

    class_count: int
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.class_count < 2:
            raise ValueError(f"class count must be >= 2, got {self.class_count}")
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != self.class_count:
                raise ValueError(
                    f"{len(names)} names for {self.class_count} classes"
                )
            if len(set(names)) != len(names):
                raise ValueError("class names must be unique")
            object.__setattr__(self, "names", names)

    def index_of(self, name: str) -> int:
        if self.names is None:
            raise DataError("label space has no class names")
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown class name {name!r}") from None


@dataclass(frozen=True)
class LabelSet:
    """Ground-truth class indices for one image (union over label sources)."""

    image_id: str
    labels: frozenset[int]

    def __post_init__(self) -> None:
        labels = frozenset(int(x) for x in self.labels)
        if not labels:
            raise ValueError(f"label set for {self.image_id!r} is empty")
        if any(x < 0 for x in labels):
            raise ValueError(f"negative class index in label set for {self.image_id!r}")
        object.__setattr__(self, "labels", labels)


def merge_label_sets(*sources: Mapping[str, LabelSet]) -> dict[str, LabelSet]:
    """Union per-image labels across sources (e.g. original + relabeled)."""
    merged: dict[str, frozenset[int]] = {}
    for source in sources:
        for image_id, ls in source.items():
            merged[image_id] = merged.get(image_id, frozenset()) | ls.labels
    return {i: LabelSet(i, labels) for i, labels in merged.items()}


def _check_ids(image_ids: tuple[str, ...], transform_ids: tuple[int, ...]) -> None:
    if len(set(image_ids)) != len(image_ids):
        raise ValueError("image ids contain duplicates")
    if len(set(transform_ids)) != len(transform_ids):
        raise ValueError("transform ids contain duplicates")


@dataclass(frozen=True, eq=False)
class LogitMatrix:
    """Per-(image, transform) class scores, shape (n, m, C) float32."""

    image_ids: tuple[str, ...]
    transform_ids: tuple[int, ...]
    values: np.ndarray
    grid_sha256: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "image_ids", tuple(self.image_ids))
        object.__setattr__(self, "transform_ids", tuple(int(t) for t in self.transform_ids))
        _check_ids(self.image_ids, self.transform_ids)
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 3:
            raise ValueError(f"logit values must be 3-d, got {values.ndim}-d")
        n, m, _ = values.shape
        if n != len(self.image_ids) or m != len(self.transform_ids):
            raise ValueError(
                f"value shape {values.shape} does not match "
                f"{len(self.image_ids)} images x {len(self.transform_ids)} transforms"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("logits must be finite")
        values = np.ascontiguousarray(values)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def class_count(self) -> int:
        return self.values.shape[2]

    def transform_index(self, transform_id: int) -> int:
        try:
            return self.transform_ids.index(transform_id)
        except ValueError:
            raise DataError(f"unknown transform id {transform_id}") from None


@dataclass(frozen=True, eq=False)
class CorrectnessMatrix:
    """Per-(image, transform) top-1 correctness bits, shape (n, m) bool."""

    image_ids: tuple[str, ...]
    transform_ids: tuple[int, ...]
    bits: np.ndarray
    grid_sha256: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "image_ids", tuple(self.image_ids))
        object.__setattr__(self, "transform_ids", tuple(int(t) for t in self.transform_ids))
        _check_ids(self.image_ids, self.transform_ids)
        bits = np.asarray(self.bits)
        if bits.dtype != np.bool_:
            raise ValueError(f"bits must be boolean, got dtype {bits.dtype}")
        if bits.shape != (len(self.image_ids), len(self.transform_ids)):
            raise ValueError(
                f"bit shape {bits.shape} does not match "
                f"{len(self.image_ids)} images x {len(self.transform_ids)} transforms"
            )
        bits = np.ascontiguousarray(bits)
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def transform_index(self, transform_id: int) -> int:
        try:
            return self.transform_ids.index(transform_id)
        except ValueError:
            raise DataError(f"unknown transform id {transform_id}") from None

    def row(self, image_id: str) -> np.ndarray:
        try:
            return self.bits[self.image_ids.index(image_id)]
        except ValueError:
            raise DataError(f"unknown image id {image_id!r}") from None


def correctness_from_logits(
    lm: LogitMatrix, label_sets: Mapping[str, LabelSet]
) -> CorrectnessMatrix:
    """bit[i][j] = (argmax of logits[i][j] is in image i's label set).

    Argmax ties break toward the lowest class index.
    """
    for image_id in lm.image_ids:
        if image_id not in label_sets:
            raise DataError(f"no label set for image {image_id!r}")
    predictions = np.argmax(lm.values, axis=2)  # first occurrence wins ties
    bits = np.zeros(predictions.shape, dtype=bool)
    for i, image_id in enumerate(lm.image_ids):
        labels = label_sets[image_id].labels
        if any(c >= lm.class_count for c in labels):
            raise DataError(
                f"label set for {image_id!r} exceeds class count {lm.class_count}"
            )
        bits[i] = np.isin(predictions[i], np.fromiter(labels, dtype=np.int64))
    return CorrectnessMatrix(lm.image_ids, lm.transform_ids, bits, lm.grid_sha256)


# ---------------------------------------------------------------------------
# ZPM1 i/o
# ---------------------------------------------------------------------------

def _pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(bits.reshape(-1), bitorder="little").tobytes()


def _unpack_bits(blob: bytes, n: int, m: int) -> np.ndarray:
    flat = np.unpackbits(np.frombuffer(blob, dtype=np.uint8), count=n * m, bitorder="little")
    return flat.astype(bool).reshape(n, m)


def matrix_to_bytes(matrix: LogitMatrix | CorrectnessMatrix) -> bytes:
    if isinstance(matrix, LogitMatrix):
        kind = "logits"
        dtype = "float32-le"
        class_count: int | None = matrix.class_count
        blob = matrix.values.astype("<f4").tobytes()
    else:
        kind = "correctness"
        dtype = "bitpack-lsb"
        class_count = None
        blob = _pack_bits(matrix.bits)
    manifest = {
        "version": ZPM_VERSION,
        "kind": kind,
        "dtype": dtype,
        "image_ids": list(matrix.image_ids),
        "transform_ids": list(matrix.transform_ids),
        "class_count": class_count,
        "grid_sha256": matrix.grid_sha256,
    }
    payload = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return ZPM_MAGIC + struct.pack("<I", len(payload)) + payload + blob


def matrix_from_bytes(data: bytes) -> LogitMatrix | CorrectnessMatrix:
    if len(data) < 8:
        raise FormatError("truncated ZPM1 header")
    if data[:4] != ZPM_MAGIC:
        raise FormatError(f"bad ZPM1 magic {data[:4]!r}")
    (manifest_len,) = struct.unpack_from("<I", data, 4)
    manifest_end = 8 + manifest_len
    if len(data) < manifest_end:
        raise FormatError("truncated ZPM1 manifest")
    try:
        manifest = json.loads(data[8:manifest_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"corrupt ZPM1 manifest: {exc}") from exc
    if manifest.get("version") != ZPM_VERSION:
        raise FormatError(f"unsupported ZPM1 version {manifest.get('version')}")
    image_ids = tuple(manifest["image_ids"])
    transform_ids = tuple(int(t) for t in manifest["transform_ids"])
    grid_sha256 = manifest.get("grid_sha256")
    blob = data[manifest_end:]
    n, m = len(image_ids), len(transform_ids)
    kind = manifest.get("kind")
    if kind == "logits":
        if manifest.get("dtype") != "float32-le":
            raise FormatError(f"unsupported logits dtype {manifest.get('dtype')!r}")
        c = int(manifest["class_count"])
        expected = n * m * c * 4
        if len(blob) != expected:
            raise FormatError(f"logit blob is {len(blob)} bytes, expected {expected}")
        values = np.frombuffer(blob, dtype="<f4").reshape(n, m, c)
        return LogitMatrix(image_ids, transform_ids, values, grid_sha256)
    if kind == "correctness":
        if manifest.get("dtype") != "bitpack-lsb":
            raise FormatError(f"unsupported correctness dtype {manifest.get('dtype')!r}")
        expected = (n * m + 7) // 8
        if len(blob) != expected:
            raise FormatError(f"bit blob is {len(blob)} bytes, expected {expected}")
        return CorrectnessMatrix(image_ids, transform_ids, _unpack_bits(blob, n, m), grid_sha256)
    raise FormatError(f"unknown ZPM1 kind {kind!r}")


def save_matrix(path: str | Path, matrix: LogitMatrix | CorrectnessMatrix) -> None:
    Path(path).write_bytes(matrix_to_bytes(matrix))


def load_matrix(path: str | Path) -> LogitMatrix | CorrectnessMatrix:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read matrix {path}: {exc}") from exc
    return matrix_from_bytes(data)


def load_correctness(path: str | Path) -> CorrectnessMatrix:
    matrix = load_matrix(path)
    if not isinstance(matrix, CorrectnessMatrix):
        raise DataError(f"{path} holds logits, expected a correctness matrix")
    return matrix


def load_logits(path: str | Path) -> LogitMatrix:
    matrix = load_matrix(path)
    if not isinstance(matrix, LogitMatrix):
        raise DataError(f"{path} holds correctness bits, expected a logit matrix")
    return matrix


# ---------------------------------------------------------------------------
# Label-set files
# ---------------------------------------------------------------------------

def label_sets_to_json(label_sets: Mapping[str, LabelSet]) -> str:
    doc = {i: sorted(ls.labels) for i, ls in sorted(label_sets.items())}
    return json.dumps(doc, sort_keys=True, indent=0)


def label_sets_from_json(text: str) -> dict[str, LabelSet]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"label file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("label file must be a JSON object of image_id -> indices")
    return {i: LabelSet(i, frozenset(v)) for i, v in doc.items()}
