"""Decoding and encoding of image files.

Supported inputs: binary PPM (P6, maxval 255), non-interlaced 8-bit PNG
(gray, RGB, palette, and their alpha variants; alpha is dropped), and the
raw ZIB1 tensor dump. 8-bit samples are divided by 255 at decode. PPM is
the only raster encoder, meant for debugging dumps.

ZIB1 layout: 16-byte header (magic "ZIB1", u32 width, u32 height,
u32 channels, all little-endian) followed by float32 row-major,
channel-interleaved samples.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .buffer import ImageBuffer
from .errors import DataError, FormatError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
ZIB_MAGIC = b"ZIB1"
_ZIB_HEADER = struct.Struct("<4sIII")


# ---------------------------------------------------------------------------
# PPM (P6)
# ---------------------------------------------------------------------------

def decode_ppm(data: bytes) -> ImageBuffer:
    """Parse a binary P6 PPM with maxval 255."""
    fields: list[int] = []
    pos = 2
    if data[:2] != b"P6":
        raise FormatError("not a P6 PPM file")
    while len(fields) < 3:
        if pos >= len(data):
            raise FormatError("truncated PPM header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        elif ch.isdigit():
            end = pos
            while end < len(data) and data[end : end + 1].isdigit():
                end += 1
            fields.append(int(data[pos:end]))
            pos = end
        else:
            raise FormatError(f"unexpected byte {ch!r} in PPM header")
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"only maxval 255 PPM is supported, got {maxval}")
    expected = width * height * 3
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise FormatError("truncated PPM raster")
    px = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return ImageBuffer(px.astype(np.float64) / 255.0)


def encode_ppm(img: ImageBuffer) -> bytes:
    """Encode as binary P6. Single-channel buffers are replicated to RGB."""
    px = img.pixels
    if img.channels == 1:
        px = np.repeat(px, 3, axis=2)
    raster = np.floor(px * 255.0 + 0.5).astype(np.uint8)
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + raster.tobytes()


# ---------------------------------------------------------------------------
# PNG (8-bit, non-interlaced)
# ---------------------------------------------------------------------------

def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(raw: bytes, height: int, stride: int, bpp: int) -> np.ndarray:
    if len(raw) != height * (stride + 1):
        raise FormatError("PNG raster length does not match dimensions")
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(height, stride + 1)
    out = np.zeros((height, stride), dtype=np.uint8)
    zero_row = np.zeros(stride, dtype=np.uint8)
    for row in range(height):
        ftype = int(rows[row, 0])
        line = rows[row, 1:].copy()
        prev = out[row - 1] if row > 0 else zero_row
        if ftype == 0:
            pass
        elif ftype == 1:  # Sub: per-lane cumulative sum mod 256
            for lane in range(bpp):
                line[lane::bpp] = np.cumsum(line[lane::bpp], dtype=np.int64) & 0xFF
        elif ftype == 2:  # Up
            line += prev
        elif ftype == 3:  # Average: sequential in the left operand
            for i in range(stride):
                left = int(line[i - bpp]) if i >= bpp else 0
                line[i] = (int(line[i]) + ((left + int(prev[i])) >> 1)) & 0xFF
        elif ftype == 4:  # Paeth: sequential in the left operand
            for i in range(stride):
                left = int(line[i - bpp]) if i >= bpp else 0
                ul = int(prev[i - bpp]) if i >= bpp else 0
                line[i] = (int(line[i]) + _paeth(left, int(prev[i]), ul)) & 0xFF
        else:
            raise FormatError(f"unknown PNG filter type {ftype}")
        out[row] = line
    return out


def decode_png(data: bytes) -> ImageBuffer:
    """Decode an 8-bit non-interlaced PNG; alpha channels are dropped."""
    if data[:8] != _PNG_SIGNATURE:
        raise FormatError("not a PNG file")
    pos = 8
    ihdr: tuple[int, ...] | None = None
    palette: np.ndarray | None = None
    idat = bytearray()
    while pos + 8 <= len(data):
        length, ctype = struct.unpack(">I4s", data[pos : pos + 8])
        body = data[pos + 8 : pos + 8 + length]
        if len(body) != length:
            raise FormatError("truncated PNG chunk")
        pos += 12 + length  # length + type + body + crc
        if ctype == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", body)
        elif ctype == b"PLTE":
            palette = np.frombuffer(body, dtype=np.uint8).reshape(-1, 3)
        elif ctype == b"IDAT":
            idat.extend(body)
        elif ctype == b"IEND":
            break
    else:
        raise FormatError("PNG missing IEND chunk")
    if ihdr is None:
        raise FormatError("PNG missing IHDR chunk")
    width, height, depth, color, compression, filt, interlace = ihdr
    if depth != 8:
        raise FormatError(f"only 8-bit PNG is supported, got bit depth {depth}")
    if interlace != 0:
        raise FormatError("interlaced PNG is not supported")
    if compression != 0 or filt != 0:
        raise FormatError("unsupported PNG compression or filter method")
    samples = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}.get(color)
    if samples is None:
        raise FormatError(f"unsupported PNG color type {color}")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise FormatError(f"corrupt PNG pixel stream: {exc}") from exc
    stride = width * samples
    px = _unfilter(raw, height, stride, samples).reshape(height, width, samples)
    if color == 3:
        if palette is None:
            raise FormatError("palette PNG missing PLTE chunk")
        if int(px.max()) >= palette.shape[0]:
            raise FormatError("PNG palette index out of range")
        px = palette[px[:, :, 0]]
    elif color == 4:
        px = px[:, :, :1]
    elif color == 6:
        px = px[:, :, :3]
    return ImageBuffer(px.astype(np.float64) / 255.0)


# ---------------------------------------------------------------------------
# ZIB1 raw tensor
# ---------------------------------------------------------------------------

def encode_zib(img: ImageBuffer) -> bytes:
    header = _ZIB_HEADER.pack(ZIB_MAGIC, img.width, img.height, img.channels)
    return header + img.pixels.astype("<f4").tobytes()


def decode_zib(data: bytes) -> ImageBuffer:
    if len(data) < _ZIB_HEADER.size:
        raise FormatError("truncated ZIB1 header")
    magic, width, height, channels = _ZIB_HEADER.unpack_from(data)
    if magic != ZIB_MAGIC:
        raise FormatError(f"bad ZIB1 magic {magic!r}")
    if channels not in (1, 3):
        raise FormatError(f"ZIB1 channel count must be 1 or 3, got {channels}")
    expected = width * height * channels * 4
    blob = data[_ZIB_HEADER.size :]
    if len(blob) != expected:
        raise FormatError(f"ZIB1 payload is {len(blob)} bytes, expected {expected}")
    px = np.frombuffer(blob, dtype="<f4").reshape(height, width, channels)
    return ImageBuffer(px.astype(np.float64))


# ---------------------------------------------------------------------------
# Sniffing loaders
# ---------------------------------------------------------------------------

def decode_image(data: bytes) -> ImageBuffer:
    """Decode by sniffing the magic bytes (PNG, P6 PPM, or ZIB1)."""
    if data[:8] == _PNG_SIGNATURE:
        return decode_png(data)
    if data[:2] == b"P6":
        return decode_ppm(data)
    if data[:4] == ZIB_MAGIC:
        return decode_zib(data)
    raise FormatError("unrecognised image format (expected PNG, P6 PPM, or ZIB1)")


def load_image(path: str | Path) -> ImageBuffer:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    return decode_image(data)


def save_ppm(path: str | Path, img: ImageBuffer) -> None:
    Path(path).write_bytes(encode_ppm(img))


def save_zib(path: str | Path, img: ImageBuffer) -> None:
    Path(path).write_bytes(encode_zib(img))
