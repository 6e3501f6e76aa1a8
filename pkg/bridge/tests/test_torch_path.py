"""The torch scoring path, exercised with a stub network (no weight files)."""

from __future__ import annotations

import json

import numpy as np
import pytest

torch = pytest.importorskip("torch")
pytest.importorskip("torchvision")
PIL_Image = pytest.importorskip("PIL.Image")

from zoombridge import torchmodels
from zoombridge.errors import ModelError
from zoombridge.gridio import load_grid
from zoombridge.torchmodels import _crop_with_zero_pad, score_job_torch


class StubNet(torch.nn.Module):
    """Deterministic linear head over pooled pixels; stands in for a classifier."""

    def __init__(self, classes: int = 4):
        super().__init__()
        self.pool = torch.nn.AdaptiveAvgPool2d(4)
        self.head = torch.nn.Linear(3 * 16, classes)
        with torch.no_grad():
            self.head.weight.copy_(
                torch.linspace(-1.0, 1.0, self.head.weight.numel()).reshape(self.head.weight.shape)
            )
            self.head.bias.zero_()

    def forward(self, x):
        return self.head(self.pool(x).flatten(1))


@pytest.fixture()
def grid_file(tmp_path):
    doc = {
        "format": "zoomlens-grid",
        "version": 1,
        "crop_size": 224,
        "scales": [64, 224, 448],
        "anchors": "3x3",
    }
    path = tmp_path / "grid.json"
    path.write_bytes(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode())
    return path


@pytest.fixture()
def image_file(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.integers(0, 256, size=(96, 128, 3), dtype=np.uint8)
    path = tmp_path / "img.png"
    PIL_Image.fromarray(arr, "RGB").save(path)
    return path


class TestCropWithZeroPad:
    def test_padding_matches_window(self):
        tensor = torch.ones(3, 10, 10)
        out = _crop_with_zero_pad(tensor, -2, 4, 8)
        assert out.shape == (3, 8, 8)
        assert out[:, :2].sum() == 0  # two padded rows above
        assert out[:, 2:, : 10 - 4].sum() == 3 * 6 * 6

    def test_fully_outside(self):
        out = _crop_with_zero_pad(torch.ones(3, 5, 5), 50, 50, 4)
        assert out.sum() == 0


class TestScoreJobTorch:
    def test_stub_model_shapes_and_determinism(self, tmp_path, grid_file, image_file, monkeypatch):
        monkeypatch.setattr(
            torchmodels, "load_torchvision_model", lambda name, device: StubNet()
        )
        grid = load_grid(grid_file)
        images = (("a", str(image_file)),)
        first = score_job_torch(images, grid, "stub", "cpu", batch_size=8)
        second = score_job_torch(images, grid, "stub", "cpu", batch_size=5)
        assert first.shape == (1, 27, 4)
        assert np.allclose(first, second, atol=1e-5)  # batch split must not matter

    def test_missing_path_rejected(self, grid_file, monkeypatch):
        monkeypatch.setattr(
            torchmodels, "load_torchvision_model", lambda name, device: StubNet()
        )
        grid = load_grid(grid_file)
        with pytest.raises(ModelError, match="path"):
            score_job_torch((("a", None),), grid, "stub", "cpu", 8)

    def test_unknown_model_name(self):
        with pytest.raises(ModelError, match="no model"):
            torchmodels.load_torchvision_model("definitely_not_a_model", "cpu")
