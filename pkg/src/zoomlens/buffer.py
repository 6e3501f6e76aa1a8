"""Image buffers and the resampling primitives every transform builds on.

Samples are floating values in [0, 1], row-major and channel-interleaved.
Resampling is cubic convolution with a = -0.75, clamp-to-edge indexing,
antialiasing on downsampling only (kernel support widened by the downscale
factor). All operations are pure; buffers are immutable and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

KERNEL_A = -0.75


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Immutable height x width x channels image with samples in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3:
            raise ValueError(f"expected a 2-d or 3-d sample array, got {px.ndim}-d")
        h, w, c = px.shape
        if h < 1 or w < 1:
            raise ValueError(f"image dimensions must be >= 1, got {w}x{h}")
        if c not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {c}")
        if not np.all(np.isfinite(px)):
            raise DataError("image samples must all be finite")
        lo, hi = float(px.min()), float(px.max())
        if lo < 0.0 or hi > 1.0:
            raise DataError(f"image samples must lie in [0, 1], got range [{lo}, {hi}]")
        px = np.ascontiguousarray(px)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def data(self) -> np.ndarray:
        """Flat row-major, channel-interleaved sample view."""
        return self.pixels.reshape(-1)

    @classmethod
    def filled(cls, width: int, height: int, value: float, channels: int = 3) -> "ImageBuffer":
        return cls(np.full((height, width, channels), value, dtype=np.float64))


def _cubic(x: np.ndarray) -> np.ndarray:
    """Keys cubic-convolution kernel with a = KERNEL_A, support 2."""
    a = KERNEL_A
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    inner = (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0
    outer = a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a
    return np.where(ax <= 1.0, inner, np.where(ax < 2.0, outer, 0.0))


def _axis_weights(in_size: int, out_size: int) -> np.ndarray | None:
    """Dense out x in resampling matrix for one axis, or None for identity.

    Source pixel centers sit at integer coordinates; output center i maps to
    (i + 0.5) * in/out - 0.5. Out-of-range taps are clamped to the edge, and
    each row is normalised to sum to 1.
    """
    if in_size == out_size:
        return None
    scale = in_size / out_size
    fscale = scale if scale > 1.0 else 1.0  # antialias only when shrinking
    support = 2.0 * fscale
    weights = np.zeros((out_size, in_size), dtype=np.float64)
    for i in range(out_size):
        center = (i + 0.5) * scale - 0.5
        lo = int(np.ceil(center - support))
        hi = int(np.floor(center + support))
        taps = np.arange(lo, hi + 1)
        w = _cubic((taps - center) / fscale)
        w /= w.sum()
        np.add.at(weights[i], np.clip(taps, 0, in_size - 1), w)
    return weights


def resize_to(img: ImageBuffer, width: int, height: int) -> ImageBuffer:
    """Resample to an exact width x height (aspect ratio not preserved)."""
    if width < 1 or height < 1:
        raise ValueError(f"target dimensions must be >= 1, got {width}x{height}")
    wr = _axis_weights(img.height, height)
    wc = _axis_weights(img.width, width)
    if wr is None and wc is None:
        return img
    px = img.pixels
    if wr is not None:
        px = np.tensordot(wr, px, axes=(1, 0))
    if wc is not None:
        px = np.tensordot(wc, px, axes=(1, 1)).transpose(1, 0, 2)
    return ImageBuffer(np.clip(px, 0.0, 1.0))


def _scaled_edge(longer: int, shorter: int, s: int) -> int:
    # round(longer * s / shorter) with halves away from zero, in exact ints
    return max(1, (2 * longer * s + shorter) // (2 * shorter))


def resized_dims(width: int, height: int, s: int) -> tuple[int, int]:
    """(width, height) after resizing the smaller edge to ``s``."""
    if s < 1:
        raise ValueError(f"target scale must be >= 1, got {s}")
    if width <= height:
        return s, _scaled_edge(height, width, s)
    return _scaled_edge(width, height, s), s


def resize_smaller_edge(img: ImageBuffer, s: int) -> ImageBuffer:
    """Resize so the smaller dimension equals ``s``, preserving aspect ratio.

    The larger dimension is rounded half away from zero.
    """
    return resize_to(img, *resized_dims(img.width, img.height, s))


def crop_zero_pad(img: ImageBuffer, top: int, left: int, size: int) -> ImageBuffer:
    """Extract a size x size window at (top, left); out-of-bounds reads are 0.

    Every window position is legal, including fully outside the image.
    """
    if size < 1:
        raise ValueError(f"crop size must be >= 1, got {size}")
    out = np.zeros((size, size, img.channels), dtype=np.float64)
    r0, r1 = max(top, 0), min(top + size, img.height)
    c0, c1 = max(left, 0), min(left + size, img.width)
    if r0 < r1 and c0 < c1:
        out[r0 - top : r1 - top, c0 - left : c1 - left] = img.pixels[r0:r1, c0:c1]
    return ImageBuffer(out)


def hflip(img: ImageBuffer) -> ImageBuffer:
    """Mirror horizontally. An exact involution."""
    return ImageBuffer(img.pixels[:, ::-1, :])
