"""The zoom-transform grid and every crop recipe built from it.

A zoom transform resizes the smaller image edge to a target scale, then
takes a fixed-size crop centered on one of the 9 cell centers of a 3x3
grid, zero-padding whatever falls outside the image. All anchor and window
arithmetic uses floor division so independent implementations agree bit
for bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .buffer import ImageBuffer, crop_zero_pad, hflip, resize_smaller_edge, resize_to
from .errors import DataError, FormatError

# The 36 stock target scales for the smaller image edge.
DEFAULT_SCALES: tuple[int, ...] = (
    10, 16, 32, 48, 64, 96, 122, 128, 192, 224, 235, 240, 256, 288, 320, 348,
    384, 448, 460, 512, 573, 576, 640, 664, 672, 680, 686, 690, 700, 720, 768,
    798, 832, 896, 911, 1024,
)

# The 11 scales of the center-zoom sweep (step 32).
CENTER_SWEEP_SCALES: tuple[int, ...] = tuple(range(128, 449, 32))

DEFAULT_CROP_SIZE = 224

GRID_FORMAT = "zoomlens-grid"
GRID_VERSION = 1


class ZoomGroup(str, Enum):
    ZOOM_OUT = "zoom-out"
    ZOOM_LESS = "zoom-less"
    ZOOM_IN = "zoom-in"


@dataclass(frozen=True)
class ZoomTransform:
    """One (scale, anchor) crop recipe."""

    scale: int
    anchor_row: int
    anchor_col: int
    crop_size: int = DEFAULT_CROP_SIZE

    def __post_init__(self) -> None:
        if self.scale < 1:
            raise ValueError(f"scale must be >= 1, got {self.scale}")
        if self.anchor_row not in (0, 1, 2) or self.anchor_col not in (0, 1, 2):
            raise ValueError(
                f"anchor indices must be in 0..2, got ({self.anchor_row}, {self.anchor_col})"
            )
        if self.crop_size < 1:
            raise ValueError(f"crop size must be >= 1, got {self.crop_size}")

    @property
    def group(self) -> ZoomGroup:
        return zoom_group_of(self)


def zoom_group_of(t: ZoomTransform) -> ZoomGroup:
    if t.scale < t.crop_size:
        return ZoomGroup.ZOOM_OUT
    if t.scale == t.crop_size:
        return ZoomGroup.ZOOM_LESS
    return ZoomGroup.ZOOM_IN


ANCHORS: tuple[tuple[int, int], ...] = tuple((r, c) for r in range(3) for c in range(3))


@dataclass(frozen=True)
class TransformGrid:
    """All scale x anchor combinations, with stable transform ids.

    id = scale_index * 9 + anchor_row * 3 + anchor_col.
    """

    scales: tuple[int, ...] = DEFAULT_SCALES
    crop_size: int = DEFAULT_CROP_SIZE

    def __post_init__(self) -> None:
        scales = tuple(int(s) for s in self.scales)
        if not scales:
            raise ValueError("scale list must be non-empty")
        if any(s < 1 for s in scales):
            raise ValueError("all scales must be >= 1")
        if len(set(scales)) != len(scales):
            raise ValueError("scale list contains duplicates")
        object.__setattr__(self, "scales", scales)

    def __len__(self) -> int:
        return len(self.scales) * 9

    @property
    def anchors(self) -> tuple[tuple[int, int], ...]:
        return ANCHORS

    def transform(self, transform_id: int) -> ZoomTransform:
        if not 0 <= transform_id < len(self):
            raise DataError(f"transform id {transform_id} outside grid of size {len(self)}")
        scale_index, rest = divmod(transform_id, 9)
        row, col = divmod(rest, 3)
        return ZoomTransform(self.scales[scale_index], row, col, self.crop_size)

    def id_of(self, t: ZoomTransform) -> int:
        try:
            scale_index = self.scales.index(t.scale)
        except ValueError:
            raise DataError(f"scale {t.scale} not in grid") from None
        if t.crop_size != self.crop_size:
            raise DataError(f"crop size {t.crop_size} does not match grid ({self.crop_size})")
        return scale_index * 9 + t.anchor_row * 3 + t.anchor_col

    def transforms(self):
        """All transforms in id order (scale-major, then row-major anchors)."""
        for tid in range(len(self)):
            yield self.transform(tid)

    def ids(self) -> range:
        return range(len(self))

    def group_of(self, transform_id: int) -> ZoomGroup:
        return zoom_group_of(self.transform(transform_id))

    def ids_for_group(self, group: ZoomGroup) -> tuple[int, ...]:
        return tuple(tid for tid in self.ids() if self.group_of(tid) is group)

    def ids_for_anchor(self, row: int, col: int) -> tuple[int, ...]:
        if row not in (0, 1, 2) or col not in (0, 1, 2):
            raise ValueError(f"anchor indices must be in 0..2, got ({row}, {col})")
        return tuple(s * 9 + row * 3 + col for s in range(len(self.scales)))

    def ref_of(self, transform_id: int) -> dict:
        """Wire reference {scale_index, row, col} for one transform."""
        self.transform(transform_id)  # bounds check
        scale_index, rest = divmod(transform_id, 9)
        row, col = divmod(rest, 3)
        return {"scale_index": scale_index, "row": row, "col": col}

    def id_from_ref(self, ref: dict) -> int:
        scale_index, row, col = int(ref["scale_index"]), int(ref["row"]), int(ref["col"])
        if not 0 <= scale_index < len(self.scales):
            raise DataError(f"scale index {scale_index} outside grid")
        if row not in (0, 1, 2) or col not in (0, 1, 2):
            raise DataError(f"anchor ({row}, {col}) outside the 3x3 layout")
        return scale_index * 9 + row * 3 + col

    # -- serialization -----------------------------------------------------

    def to_json_bytes(self) -> bytes:
        doc = {
            "format": GRID_FORMAT,
            "version": GRID_VERSION,
            "crop_size": self.crop_size,
            "scales": list(self.scales),
            "anchors": "3x3",
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("ascii")

    @classmethod
    def from_json_bytes(cls, data: bytes) -> "TransformGrid":
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise FormatError(f"grid file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != GRID_FORMAT:
            raise FormatError("not a zoomlens grid file")
        if doc.get("version") != GRID_VERSION:
            raise FormatError(f"unsupported grid version {doc.get('version')}")
        if doc.get("anchors") != "3x3":
            raise FormatError(f"unsupported anchor layout {doc.get('anchors')!r}")
        return cls(scales=tuple(doc["scales"]), crop_size=int(doc["crop_size"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_json_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "TransformGrid":
        return cls.from_json_bytes(Path(path).read_bytes())

    @property
    def sha256(self) -> str:
        """Hash of the canonical JSON form; ties matrices to their grid."""
        return hashlib.sha256(self.to_json_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# Anchor and window arithmetic
# ---------------------------------------------------------------------------

def anchor_center(img_w: int, img_h: int, row: int, col: int) -> tuple[int, int]:
    """Center (x, y) of the 3x3 grid cell at (row, col).

    Dimensions below 3 degenerate to tile size 0, collapsing anchors onto
    the origin column/row; this is permitted.
    """
    tile_w = img_w // 3
    tile_h = img_h // 3
    x = col * tile_w + tile_w // 2
    y = row * tile_h + tile_h // 2
    return x, y


def zoom_window(resized_w: int, resized_h: int, t: ZoomTransform) -> tuple[int, int]:
    """(top, left) of the crop window on the already-resized image."""
    x, y = anchor_center(resized_w, resized_h, t.anchor_row, t.anchor_col)
    return y - t.crop_size // 2, x - t.crop_size // 2


def center_window(resized_w: int, resized_h: int, crop_size: int) -> tuple[int, int]:
    """(top, left) of a crop centered on the image center."""
    return resized_h // 2 - crop_size // 2, resized_w // 2 - crop_size // 2


# ---------------------------------------------------------------------------
# Applying transforms
# ---------------------------------------------------------------------------

def apply_zoom(img: ImageBuffer, t: ZoomTransform) -> ImageBuffer:
    """Resize the smaller edge to t.scale, then crop at the anchor center."""
    resized = resize_smaller_edge(img, t.scale)
    top, left = zoom_window(resized.width, resized.height, t)
    return crop_zero_pad(resized, top, left, t.crop_size)


def apply_grid(img: ImageBuffer, grid: TransformGrid):
    """Yield (transform_id, crop) for every transform, in id order."""
    for tid in grid.ids():
        yield tid, apply_zoom(img, grid.transform(tid))


def center_zoom(img: ImageBuffer, s: int, crop_size: int = DEFAULT_CROP_SIZE) -> ImageBuffer:
    """Resize the smaller edge to ``s`` and crop at the image center.

    Not identical to the center-anchor zoom transform: the 3x3 cell center
    and the image center can differ by a pixel when dimensions are not
    divisible by 3.
    """
    resized = resize_smaller_edge(img, s)
    top, left = center_window(resized.width, resized.height, crop_size)
    return crop_zero_pad(resized, top, left, crop_size)


FIVE_CROP_POSITIONS: tuple[str, ...] = ("tl", "tr", "bl", "br", "center")


@dataclass(frozen=True)
class CropRecipe:
    """One crop of the classic 5/10-crop evaluation schemes."""

    position: str
    hflip: bool = False
    base_scale: int = 256
    crop_size: int = DEFAULT_CROP_SIZE


def five_crop_recipes(base_scale: int = 256, crop_size: int = DEFAULT_CROP_SIZE) -> tuple[CropRecipe, ...]:
    return tuple(CropRecipe(p, False, base_scale, crop_size) for p in FIVE_CROP_POSITIONS)


def ten_crop_recipes(base_scale: int = 256, crop_size: int = DEFAULT_CROP_SIZE) -> tuple[CropRecipe, ...]:
    plain = five_crop_recipes(base_scale, crop_size)
    return plain + tuple(CropRecipe(r.position, True, base_scale, crop_size) for r in plain)


def _five_crop_origins(w: int, h: int, crop: int) -> tuple[tuple[int, int], ...]:
    return (
        (0, 0),
        (0, w - crop),
        (h - crop, 0),
        (h - crop, w - crop),
        ((h - crop) // 2, (w - crop) // 2),
    )


def five_crop(img: ImageBuffer, base_scale: int = 256, crop: int = DEFAULT_CROP_SIZE) -> tuple[ImageBuffer, ...]:
    """Corner and center crops after resizing the smaller edge to base_scale.

    This classic scheme never pads, so the crop must fit the resized image.
    """
    resized = resize_smaller_edge(img, base_scale)
    if crop > resized.width or crop > resized.height:
        raise DataError(
            f"crop {crop} exceeds resized dimensions {resized.width}x{resized.height}"
        )
    px = resized.pixels
    return tuple(
        ImageBuffer(px[top : top + crop, left : left + crop])
        for top, left in _five_crop_origins(resized.width, resized.height, crop)
    )


def ten_crop(img: ImageBuffer, base_scale: int = 256, crop: int = DEFAULT_CROP_SIZE) -> tuple[ImageBuffer, ...]:
    """five_crop plus the horizontal reflection of each crop, same order."""
    plain = five_crop(img, base_scale, crop)
    return plain + tuple(hflip(c) for c in plain)


# ---------------------------------------------------------------------------
# Random resized crop
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RrcParams:
    """Random-resized-crop sampling ranges (a randomized zoom-in)."""

    area_range: tuple[float, float] = (0.08, 1.0)
    aspect_range: tuple[float, float] = (3.0 / 4.0, 4.0 / 3.0)
    out_size: int = DEFAULT_CROP_SIZE
    attempts: int = 10

    def __post_init__(self) -> None:
        lo, hi = self.area_range
        if not (0.0 < lo <= hi <= 1.0):
            raise ValueError(f"area range must satisfy 0 < lo <= hi <= 1, got {self.area_range}")
        alo, ahi = self.aspect_range
        if not (0.0 < alo <= ahi):
            raise ValueError(f"aspect bounds must be positive, got {self.aspect_range}")
        if self.out_size < 1:
            raise ValueError(f"output size must be >= 1, got {self.out_size}")


def rrc_sample(img: ImageBuffer, params: RrcParams, rng: np.random.Generator) -> ImageBuffer:
    """Draw one random crop (uniform area fraction, log-uniform aspect).

    Falls back to the maximal centered square if no feasible window is found
    within ``params.attempts`` draws. Deterministic given the generator state.
    """
    w, h = img.width, img.height
    area = float(w * h)
    log_lo, log_hi = np.log(params.aspect_range[0]), np.log(params.aspect_range[1])
    for _ in range(params.attempts):
        target_area = rng.uniform(*params.area_range) * area
        aspect = float(np.exp(rng.uniform(log_lo, log_hi)))
        cw = int(round(np.sqrt(target_area * aspect)))
        ch = int(round(np.sqrt(target_area / aspect)))
        if 0 < cw <= w and 0 < ch <= h:
            top = int(rng.integers(0, h - ch + 1))
            left = int(rng.integers(0, w - cw + 1))
            window = ImageBuffer(img.pixels[top : top + ch, left : left + cw])
            return resize_to(window, params.out_size, params.out_size)
    side = min(w, h)
    top, left = (h - side) // 2, (w - side) // 2
    window = ImageBuffer(img.pixels[top : top + side, left : left + side])
    return resize_to(window, params.out_size, params.out_size)


def rrc_batch(img: ImageBuffer, params: RrcParams, seed: int, k: int) -> list[ImageBuffer]:
    """K independent crops from per-crop substreams of one seed."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    streams = np.random.SeedSequence(seed).spawn(k)
    return [rrc_sample(img, params, np.random.Generator(np.random.PCG64(s))) for s in streams]
