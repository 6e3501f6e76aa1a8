"""Grid JSON parsing and the zoom-window arithmetic, reimplemented.

The formulas are deliberately restated here rather than imported: the bridge
must agree with its host through the documented file formats alone. All
divisions are floor divisions; the resized larger edge rounds half away
from zero.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import JobError

GRID_FORMAT = "zoomlens-grid"
GRID_VERSION = 1


@dataclass(frozen=True)
class Grid:
    scales: tuple[int, ...]
    crop_size: int
    sha256: str

    def __len__(self) -> int:
        return len(self.scales) * 9

    def transform(self, transform_id: int) -> tuple[int, int, int]:
        """(scale, anchor_row, anchor_col) for a stable transform id."""
        if not 0 <= transform_id < len(self):
            raise JobError(f"transform id {transform_id} outside grid of size {len(self)}")
        scale_index, rest = divmod(transform_id, 9)
        row, col = divmod(rest, 3)
        return self.scales[scale_index], row, col

    def group(self, transform_id: int) -> str:
        scale, _, _ = self.transform(transform_id)
        if scale < self.crop_size:
            return "zoom-out"
        if scale == self.crop_size:
            return "zoom-less"
        return "zoom-in"


def load_grid(path: str | Path) -> Grid:
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise JobError(f"grid file is not valid JSON: {exc}") from exc
    if doc.get("format") != GRID_FORMAT or doc.get("version") != GRID_VERSION:
        raise JobError(f"unsupported grid file {path}")
    if doc.get("anchors") != "3x3":
        raise JobError(f"unsupported anchor layout {doc.get('anchors')!r}")
    return Grid(
        scales=tuple(int(s) for s in doc["scales"]),
        crop_size=int(doc["crop_size"]),
        sha256=hashlib.sha256(raw).hexdigest(),
    )


def resized_dims(width: int, height: int, scale: int) -> tuple[int, int]:
    """Dimensions after resizing the smaller edge to ``scale``."""
    if width <= height:
        return scale, max(1, (2 * height * scale + width) // (2 * width))
    return max(1, (2 * width * scale + height) // (2 * height)), scale


def anchor_center(img_w: int, img_h: int, row: int, col: int) -> tuple[int, int]:
    tile_w = img_w // 3
    tile_h = img_h // 3
    return col * tile_w + tile_w // 2, row * tile_h + tile_h // 2


def crop_window(resized_w: int, resized_h: int, row: int, col: int, crop_size: int) -> tuple[int, int]:
    """(top, left) of the crop on the resized image; may extend outside."""
    x, y = anchor_center(resized_w, resized_h, row, col)
    return y - crop_size // 2, x - crop_size // 2


def window_for(grid: Grid, transform_id: int, width: int, height: int) -> tuple[int, int, int, int]:
    """(resized_w, resized_h, top, left) for one transform on a raw image."""
    scale, row, col = grid.transform(transform_id)
    rw, rh = resized_dims(width, height, scale)
    top, left = crop_window(rw, rh, row, col, grid.crop_size)
    return rw, rh, top, left
