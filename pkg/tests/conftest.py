from __future__ import annotations

import numpy as np
import pytest

from zoomlens.buffer import ImageBuffer
from zoomlens.geometry import TransformGrid
from zoomlens.mock import DEMO_IMAGE_IDS, demo_fixture, mock_logit_matrix
from zoomlens.store import correctness_from_logits


def ramp_image(width: int, height: int, channels: int = 3) -> ImageBuffer:
    """Deterministic ramp; every pixel value is unique per channel."""
    idx = np.arange(height * width * channels, dtype=np.float64)
    px = (idx / max(idx.size - 1, 1)).reshape(height, width, channels)
    return ImageBuffer(px)


def random_image(width: int, height: int, seed: int, channels: int = 3) -> ImageBuffer:
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.uniform(size=(height, width, channels)))


@pytest.fixture(scope="session")
def default_grid() -> TransformGrid:
    return TransformGrid()


@pytest.fixture(scope="session")
def demo_data(default_grid):
    """Planted-rule mock matrices whose analytics are all hand-computable."""
    cfg, labels, space = demo_fixture()
    lm = mock_logit_matrix(cfg, DEMO_IMAGE_IDS, default_grid)
    cm = correctness_from_logits(lm, labels)
    return {"cfg": cfg, "labels": labels, "space": space, "logits": lm, "bits": cm}
