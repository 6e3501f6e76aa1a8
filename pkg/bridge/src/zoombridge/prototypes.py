"""Zero-shot scoring from class text prototypes.

Each class is represented by the mean of its template embeddings; an image
(crop) embedding is scored by cosine similarity against every prototype.
Templates and embeddings are user-supplied .npz files, so the path runs
without any encoder in the loop: class embeddings are keyed by class name
(each an array of shape (templates, dim)), image embeddings by
"<image_id>|<transform_id>".
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import JobError, ModelError


def class_prototypes(class_embeddings: dict[str, np.ndarray], class_order: list[str]) -> np.ndarray:
    """Mean template embedding per class, stacked in the given order."""
    rows = []
    for name in class_order:
        if name not in class_embeddings:
            raise ModelError(f"no template embeddings for class {name!r}")
        templates = np.asarray(class_embeddings[name], dtype=np.float64)
        if templates.ndim != 2 or templates.shape[0] < 1:
            raise ModelError(f"class {name!r} embeddings must be (templates, dim)")
        rows.append(templates.mean(axis=0))
    return np.stack(rows)


def cosine_scores(embedding: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """Cosine similarity of one embedding against every class prototype."""
    emb = np.asarray(embedding, dtype=np.float64)
    norm = float(np.linalg.norm(emb))
    proto_norms = np.linalg.norm(prototypes, axis=1)
    if norm == 0.0 or np.any(proto_norms == 0.0):
        raise ModelError("zero-norm embedding cannot be scored by cosine similarity")
    return (prototypes @ emb) / (proto_norms * norm)


def score_job_prototype(
    image_ids: list[str],
    transform_ids: list[int],
    options: dict,
) -> np.ndarray:
    class_path = options.get("class_embeddings")
    image_path = options.get("image_embeddings")
    class_order = options.get("class_order")
    if not class_path or not image_path or not class_order:
        raise JobError(
            "prototype model needs options class_embeddings, image_embeddings, class_order"
        )
    with np.load(Path(class_path)) as npz:
        class_embeddings = {k: npz[k] for k in npz.files}
    prototypes = class_prototypes(class_embeddings, list(class_order))
    values = np.empty(
        (len(image_ids), len(transform_ids), prototypes.shape[0]), dtype=np.float32
    )
    with np.load(Path(image_path)) as npz:
        for i, image_id in enumerate(image_ids):
            for j, tid in enumerate(transform_ids):
                key = f"{image_id}|{tid}"
                if key not in npz.files:
                    raise JobError(f"image embeddings missing key {key!r}")
                values[i, j] = cosine_scores(npz[key], prototypes)
    return values
