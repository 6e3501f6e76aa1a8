from __future__ import annotations

import io
import struct
import zlib

import numpy as np
import pytest

from zoomlens import codecs
from zoomlens.buffer import ImageBuffer
from zoomlens.errors import DataError, FormatError

from conftest import random_image

PIL_Image = pytest.importorskip("PIL.Image")


def u8_image(width, height, seed, channels=3):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(height, width, channels), dtype=np.uint8)


def png_bytes(array, mode):
    img = PIL_Image.fromarray(array, mode=mode)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def chunk(ctype: bytes, body: bytes) -> bytes:
    return struct.pack(">I", len(body)) + ctype + body + struct.pack(">I", zlib.crc32(ctype + body))


class TestPpm:
    def test_round_trip(self):
        raw = u8_image(9, 7, seed=1)
        img = codecs.decode_ppm(codecs.encode_ppm(ImageBuffer(raw / 255.0)))
        assert np.array_equal((img.pixels * 255.0).round().astype(np.uint8), raw)

    def test_header_comments(self):
        data = b"P6\n# a comment\n2 1\n# another\n255\n" + bytes([0, 0, 0, 255, 255, 255])
        img = codecs.decode_ppm(data)
        assert (img.width, img.height) == (2, 1)
        assert img.pixels[0, 1, 0] == 1.0

    def test_rejects_wrong_maxval(self):
        with pytest.raises(FormatError):
            codecs.decode_ppm(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")

    def test_rejects_truncated_raster(self):
        with pytest.raises(FormatError):
            codecs.decode_ppm(b"P6\n2 2\n255\n\x00\x00\x00")

    def test_gray_encodes_as_rgb(self):
        gray = ImageBuffer(np.full((2, 2, 1), 0.5))
        out = codecs.decode_ppm(codecs.encode_ppm(gray))
        assert out.channels == 3
        assert np.unique((out.pixels * 255).round()).tolist() == [128.0]


class TestPng:
    @pytest.mark.parametrize("channels,mode", [(3, "RGB"), (1, "L")])
    def test_decodes_plain_modes(self, channels, mode):
        raw = u8_image(21, 13, seed=2, channels=channels)
        arr = raw if channels == 3 else raw[:, :, 0]
        img = codecs.decode_png(png_bytes(arr, mode))
        assert np.array_equal((img.pixels * 255.0).round().astype(np.uint8), raw)

    def test_drops_alpha(self):
        raw = u8_image(8, 8, seed=3, channels=3)
        rgba = np.dstack([raw, np.full((8, 8), 200, dtype=np.uint8)])
        img = codecs.decode_png(png_bytes(rgba, "RGBA"))
        assert img.channels == 3
        assert np.array_equal((img.pixels * 255.0).round().astype(np.uint8), raw)

    def test_gray_alpha(self):
        gray = u8_image(6, 4, seed=4, channels=1)[:, :, 0]
        la = np.dstack([gray, np.full_like(gray, 10)])
        img = codecs.decode_png(png_bytes(la, "LA"))
        assert img.channels == 1
        assert np.array_equal((img.pixels[:, :, 0] * 255.0).round().astype(np.uint8), gray)

    def test_palette(self):
        raw = u8_image(16, 16, seed=5, channels=3)
        pal = PIL_Image.fromarray(raw, "RGB").convert("P", palette=PIL_Image.ADAPTIVE)
        buf = io.BytesIO()
        pal.save(buf, format="PNG")
        expected = np.asarray(pal.convert("RGB"))
        img = codecs.decode_png(buf.getvalue())
        assert np.array_equal((img.pixels * 255.0).round().astype(np.uint8), expected)

    def test_large_image_exercises_filters(self):
        # a smooth gradient makes the encoder pick sub/up/average/paeth filters
        y, x = np.mgrid[0:90, 0:70]
        arr = ((x * 2 + y * 3) % 256).astype(np.uint8)
        img = codecs.decode_png(png_bytes(arr, "L"))
        assert np.array_equal((img.pixels[:, :, 0] * 255.0).round().astype(np.uint8), arr)

    def test_every_filter_type_reconstructs(self):
        # craft one PNG per filter type and check against a reference recon
        rng = np.random.default_rng(10)
        width, height, bpp = 9, 6, 3
        raw = rng.integers(0, 256, size=(height, width * bpp), dtype=np.uint8)

        def reference_recon(filtered, ftype):
            recon = np.zeros_like(filtered)
            for r in range(filtered.shape[0]):
                for i in range(filtered.shape[1]):
                    left = int(recon[r, i - bpp]) if i >= bpp else 0
                    up = int(recon[r - 1, i]) if r > 0 else 0
                    ul = int(recon[r - 1, i - bpp]) if (r > 0 and i >= bpp) else 0
                    if ftype == 0:
                        pred = 0
                    elif ftype == 1:
                        pred = left
                    elif ftype == 2:
                        pred = up
                    elif ftype == 3:
                        pred = (left + up) >> 1
                    else:
                        pred = codecs._paeth(left, up, ul)
                    recon[r, i] = (int(filtered[r, i]) + pred) & 0xFF
            return recon

        for ftype in range(5):
            scanlines = b"".join(bytes([ftype]) + raw[r].tobytes() for r in range(height))
            ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
            data = (
                codecs._PNG_SIGNATURE
                + chunk(b"IHDR", ihdr)
                + chunk(b"IDAT", zlib.compress(scanlines))
                + chunk(b"IEND", b"")
            )
            img = codecs.decode_png(data)
            expected = reference_recon(raw, ftype).reshape(height, width, bpp)
            got = (img.pixels * 255.0).round().astype(np.uint8)
            assert np.array_equal(got, expected), f"filter {ftype}"

    def test_rejects_bad_signature(self):
        with pytest.raises(FormatError):
            codecs.decode_png(b"not a png at all----")

    def test_rejects_16_bit(self):
        ihdr = struct.pack(">IIBBBBB", 2, 2, 16, 0, 0, 0, 0)
        data = codecs._PNG_SIGNATURE + chunk(b"IHDR", ihdr) + chunk(b"IEND", b"")
        with pytest.raises(FormatError, match="bit depth"):
            codecs.decode_png(data)

    def test_rejects_interlaced(self):
        ihdr = struct.pack(">IIBBBBB", 2, 2, 8, 0, 0, 0, 1)
        data = codecs._PNG_SIGNATURE + chunk(b"IHDR", ihdr) + chunk(b"IEND", b"")
        with pytest.raises(FormatError, match="interlaced"):
            codecs.decode_png(data)

    def test_rejects_truncated_stream(self):
        good = png_bytes(u8_image(12, 12, seed=6), "RGB")
        with pytest.raises(FormatError):
            codecs.decode_png(good[: len(good) // 2])


class TestZib:
    def test_round_trip(self):
        img = random_image(5, 4, seed=7)
        out = codecs.decode_zib(codecs.encode_zib(img))
        assert np.array_equal(out.pixels, img.pixels.astype(np.float32).astype(np.float64))

    def test_rejects_bad_magic(self):
        with pytest.raises(FormatError):
            codecs.decode_zib(b"NOPE" + b"\x00" * 12)

    def test_rejects_truncated(self):
        data = codecs.encode_zib(random_image(4, 4, seed=8))
        with pytest.raises(FormatError):
            codecs.decode_zib(data[:-3])

    def test_rejects_bad_channels(self):
        header = struct.pack("<4sIII", b"ZIB1", 1, 1, 2)
        with pytest.raises(FormatError):
            codecs.decode_zib(header + b"\x00" * 8)

    def test_rejects_out_of_range_samples(self):
        header = struct.pack("<4sIII", b"ZIB1", 1, 1, 1)
        blob = np.array([2.5], dtype="<f4").tobytes()
        with pytest.raises(DataError):
            codecs.decode_zib(header + blob)


class TestSniffing:
    def test_sniffs_all_formats(self, tmp_path):
        img = random_image(6, 6, seed=9)
        ppm = tmp_path / "x.ppm"
        zib = tmp_path / "x.zib"
        codecs.save_ppm(ppm, img)
        codecs.save_zib(zib, img)
        png = tmp_path / "x.png"
        png.write_bytes(png_bytes(u8_image(6, 6, seed=9), "RGB"))
        for path in (ppm, zib, png):
            loaded = codecs.load_image(path)
            assert (loaded.width, loaded.height) == (6, 6)

    def test_unknown_format(self):
        with pytest.raises(FormatError):
            codecs.decode_image(b"GIF89a....")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            codecs.load_image(tmp_path / "absent.png")
