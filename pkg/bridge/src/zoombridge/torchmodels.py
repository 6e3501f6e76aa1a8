"""Real pretrained classifiers behind the job protocol.

Model ids take the form "torchvision:<name>" (e.g. torchvision:resnet50).
torch, torchvision, and pillow are imported lazily so the rest of the
bridge works without them. Crop windows come from the documented integer
formulas in gridio; only the resampling itself is delegated to torchvision
(sample-level kernel parity is explicitly not part of the contract).
"""

from __future__ import annotations

import numpy as np

from .errors import ModelError
from .gridio import Grid, window_for

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


def _import_stack():
    try:
        import torch
        import torchvision
        from PIL import Image
    except ImportError as exc:
        raise ModelError(
            f"real-model scoring needs the [models] extra (torch/torchvision/pillow): {exc}"
        ) from exc
    return torch, torchvision, Image


def load_torchvision_model(name: str, device: str):
    torch, torchvision, _ = _import_stack()
    factory = getattr(torchvision.models, name, None)
    if factory is None:
        raise ModelError(f"torchvision has no model named {name!r}")
    model = factory(weights="DEFAULT")
    model.eval()
    return model.to(device)


def _crop_with_zero_pad(tensor, top: int, left: int, size: int):
    """size x size window at (top, left) of a CHW tensor, zero-padded."""
    torch, _, _ = _import_stack()
    c, h, w = tensor.shape
    out = torch.zeros((c, size, size), dtype=tensor.dtype)
    r0, r1 = max(top, 0), min(top + size, h)
    c0, c1 = max(left, 0), min(left + size, w)
    if r0 < r1 and c0 < c1:
        out[:, r0 - top : r1 - top, c0 - left : c1 - left] = tensor[:, r0:r1, c0:c1]
    return out


def score_job_torch(
    job_images: tuple[tuple[str, str | None], ...],
    grid: Grid,
    model_name: str,
    device: str,
    batch_size: int,
) -> np.ndarray:
    torch, torchvision, Image = _import_stack()
    from torchvision.transforms import functional as tf

    model = load_torchvision_model(model_name, device)
    mean = torch.tensor(IMAGENET_MEAN).view(3, 1, 1)
    std = torch.tensor(IMAGENET_STD).view(3, 1, 1)

    values: list[np.ndarray] = []
    with torch.no_grad():
        for image_id, path in job_images:
            if path is None:
                raise ModelError(f"image {image_id!r} has no path; real models need pixels")
            pil = Image.open(path).convert("RGB")
            width, height = pil.size
            crops = []
            resized_cache: dict[int, object] = {}
            for tid in range(len(grid)):
                scale, _, _ = grid.transform(tid)
                rw, rh, top, left = window_for(grid, tid, width, height)
                if scale not in resized_cache:
                    resized = tf.resize(
                        pil, [rh, rw], interpolation=tf.InterpolationMode.BICUBIC, antialias=True
                    )
                    resized_cache[scale] = tf.to_tensor(resized)
                crop = _crop_with_zero_pad(resized_cache[scale], top, left, grid.crop_size)
                crops.append((crop - mean) / std)
            logits = []
            for start in range(0, len(crops), batch_size):
                batch = torch.stack(crops[start : start + batch_size]).to(device)
                logits.append(model(batch).cpu())
            values.append(torch.cat(logits).numpy().astype(np.float32))
    return np.stack(values)
