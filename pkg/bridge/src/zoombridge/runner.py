"""Dispatch a parsed job to the right scorer and emit the ZPM1 file."""

from __future__ import annotations

from .errors import JobError
from .gridio import load_grid
from .job import BridgeJob, load_job
from .mockmodel import score_job_mock
from .prototypes import score_job_prototype
from .zpm import write_logits


def run_job(job: BridgeJob) -> None:
    grid = load_grid(job.grid_path)
    transform_ids = list(range(len(grid)))
    if job.model == "mock":
        values = score_job_mock(
            job.image_ids,
            transform_ids,
            seed=int(job.options.get("seed", 0)),
            class_count=int(job.options.get("classes", 10)),
        )
    elif job.model == "prototype":
        values = score_job_prototype(job.image_ids, transform_ids, job.options)
    elif job.model.startswith("torchvision:"):
        from .torchmodels import score_job_torch

        values = score_job_torch(
            job.images, grid, job.model.split(":", 1)[1], job.device, job.batch_size
        )
    else:
        raise JobError(f"unknown model identifier {job.model!r}")
    if values.shape[:2] != (len(job.image_ids), len(transform_ids)):
        raise JobError(
            f"scorer produced {values.shape}, job expects "
            f"({len(job.image_ids)}, {len(transform_ids)}, C)"
        )
    write_logits(job.output_path, job.image_ids, transform_ids, values, grid.sha256)


def run_job_file(path: str) -> None:
    run_job(load_job(path))
