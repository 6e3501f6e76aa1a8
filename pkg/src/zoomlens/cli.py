"""Operator command-line surface.

Exit codes: 0 ok, 2 usage, 3 malformed or version-mismatched file,
4 inconsistent data. Every command is a pure function of its flags, input
files, and seed; the worker count for data-parallel stages comes from
--threads or the ZOOMLENS_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import shlex
import subprocess
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import aggregation, codecs, cover, evaluation, hardset, memo, mock, store
from ._util import worker_count
from .buffer import ImageBuffer
from .errors import DataError, FormatError, ZoomlensError
from .geometry import (
    CENTER_SWEEP_SCALES,
    DEFAULT_CROP_SIZE,
    DEFAULT_SCALES,
    TransformGrid,
    ZoomGroup,
    apply_zoom,
)

JOB_FORMAT = "zoomlens-job"
JOB_VERSION = 1


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text)


def _parse_scales(raw: str | None) -> tuple[int, ...]:
    if raw is None:
        return DEFAULT_SCALES
    try:
        return tuple(int(x) for x in raw.replace(",", " ").split())
    except ValueError as exc:
        raise DataError(f"bad scale list {raw!r}: {exc}") from exc


def _load_ids(path: str) -> tuple[str, ...]:
    lines = Path(path).read_text().splitlines()
    return tuple(ln.strip() for ln in lines if ln.strip())


def _load_image_list(path: str) -> list[dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"image list is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise FormatError("image list must be a JSON array of {id, path} objects")
    out = []
    for item in doc:
        if not isinstance(item, dict) or "id" not in item:
            raise FormatError(f"bad image list entry: {item!r}")
        out.append({"id": str(item["id"]), "path": item.get("path")})
    return out


def _load_planted(path: str | None) -> tuple[mock.PlantedRule, ...]:
    if path is None:
        return ()
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"planted-rule file is not valid JSON: {exc}") from exc
    rules = []
    for item in doc:
        groups = item.get("groups")
        tids = item.get("transform_ids")
        rules.append(
            mock.PlantedRule(
                image_id=str(item["image_id"]),
                class_index=int(item["class_index"]),
                groups=frozenset(ZoomGroup(g) for g in groups) if groups else None,
                transform_ids=frozenset(int(t) for t in tids) if tids else None,
            )
        )
    return tuple(rules)


def _load_subset(path: str | None) -> list[int] | None:
    """A subset file is either a cover JSON or a JSON array of ids."""
    if path is None:
        return None
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"subset file is not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "chosen" in doc:
        return [int(t) for t in doc["chosen"]]
    if isinstance(doc, list):
        return [int(t) for t in doc]
    raise FormatError(f"{path} is neither a cover result nor an id array")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_grid_gen(args: argparse.Namespace) -> int:
    grid = TransformGrid(scales=_parse_scales(args.scales), crop_size=args.crop_size)
    grid.save(args.out)
    print(f"wrote grid with {len(grid)} transforms ({len(grid.scales)} scales) to {args.out}")
    return 0


def cmd_crops_apply(args: argparse.Namespace) -> int:
    grid = TransformGrid.load(args.grid)
    img = codecs.load_image(args.image)
    if args.sheet:
        codecs.save_ppm(args.sheet, _contact_sheet(img, grid, args.thumb_size))
        print(f"wrote contact sheet for {len(grid)} crops to {args.sheet}")
        return 0
    if not args.out_dir:
        raise DataError("either --out-dir or --sheet is required")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = args.format
    save = codecs.save_ppm if ext == "ppm" else codecs.save_zib

    def one(tid: int) -> str:
        crop = apply_zoom(img, grid.transform(tid))
        name = f"crop_{tid:04d}.{ext}"
        save(out_dir / name, crop)
        return name

    workers = worker_count(args.threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            names = list(pool.map(one, grid.ids()))
    else:
        names = [one(tid) for tid in grid.ids()]
    print(f"wrote {len(names)} crops to {out_dir}")
    return 0


def _contact_sheet(img: ImageBuffer, grid: TransformGrid, thumb: int) -> ImageBuffer:
    """One tiled image: a row of 9 anchor thumbnails per scale."""
    from .buffer import resize_to

    rows = len(grid.scales)
    sheet = np.zeros((rows * thumb, 9 * thumb, img.channels), dtype=np.float64)
    for tid in grid.ids():
        small = resize_to(apply_zoom(img, grid.transform(tid)), thumb, thumb)
        r, c = divmod(tid, 9)
        sheet[r * thumb : (r + 1) * thumb, c * thumb : (c + 1) * thumb] = small.pixels
    return ImageBuffer(sheet)


def cmd_score_mock(args: argparse.Namespace) -> int:
    cfg = mock.MockScorerConfig(
        seed=args.seed, class_count=args.classes, planted=_load_planted(args.planted)
    )
    image_ids = _load_ids(args.ids_file)
    if args.columns == "grid":
        grid = TransformGrid.load(args.grid)
        matrix = _mock_grid_matrix(cfg, image_ids, grid, worker_count(args.threads))
    elif args.columns == "sweep":
        matrix = mock.mock_column_matrix(cfg, image_ids, CENTER_SWEEP_SCALES)
    elif args.columns == "five":
        matrix = mock.mock_column_matrix(cfg, image_ids, tuple(range(5)))
    else:  # ten
        matrix = mock.mock_column_matrix(cfg, image_ids, tuple(range(10)))
    store.save_matrix(args.out, matrix)
    print(f"wrote {len(matrix.image_ids)}x{len(matrix.transform_ids)}x{matrix.class_count} logits to {args.out}")
    return 0


def _mock_grid_matrix(
    cfg: mock.MockScorerConfig,
    image_ids: tuple[str, ...],
    grid: TransformGrid,
    workers: int,
) -> store.LogitMatrix:
    if workers <= 1:
        return mock.mock_logit_matrix(cfg, image_ids, grid)
    groups = [grid.group_of(tid) for tid in grid.ids()]

    def row(image_id: str) -> np.ndarray:
        return np.stack(
            [mock.mock_score(cfg, image_id, tid, groups[j]) for j, tid in enumerate(grid.ids())]
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(row, image_ids))
    values = np.stack(rows).astype(np.float32)
    return store.LogitMatrix(image_ids, tuple(grid.ids()), values, grid.sha256)


def write_job_file(
    path: str | Path,
    grid_path: str,
    images: list[dict],
    output_path: str,
    model: str,
    device: str = "cpu",
    batch_size: int = 16,
    options: dict | None = None,
) -> None:
    doc = {
        "format": JOB_FORMAT,
        "version": JOB_VERSION,
        "grid": str(grid_path),
        "images": images,
        "output": str(output_path),
        "model": model,
        "device": device,
        "batch_size": batch_size,
        "options": options or {},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True))


def cmd_score_bridge(args: argparse.Namespace) -> int:
    images = _load_image_list(args.images)
    grid = TransformGrid.load(args.grid)  # validate before handing off
    options = {}
    if args.classes is not None:
        options["classes"] = args.classes
    if args.seed is not None:
        options["seed"] = args.seed
    job_path = args.job or str(Path(tempfile.mkdtemp(prefix="zoomlens-")) / "job.json")
    write_job_file(
        job_path, args.grid, images, args.out, args.model,
        device=args.device, batch_size=args.batch_size, options=options,
    )
    proc = subprocess.run([*shlex.split(args.scorer_cmd), job_path])
    if proc.returncode != 0:
        raise DataError(f"external scorer exited with status {proc.returncode}")
    matrix = store.load_matrix(args.out)
    n, m = len(matrix.image_ids), len(matrix.transform_ids)
    if n != len(images) or m != len(grid):
        raise DataError(
            f"scorer wrote a {n}x{m} matrix, job asked for {len(images)}x{len(grid)}"
        )
    print(f"scorer wrote {args.out} ({n}x{m})")
    return 0


def _load_correctness_arg(path: str) -> store.CorrectnessMatrix:
    matrix = store.load_matrix(path)
    if isinstance(matrix, store.LogitMatrix):
        raise DataError(f"{path} holds logits; run correctness conversion first")
    return matrix


def cmd_correctness(args: argparse.Namespace) -> int:
    lm = store.load_logits(args.logits)
    labels = store.label_sets_from_json(Path(args.labels).read_text())
    cm = store.correctness_from_logits(lm, labels)
    store.save_matrix(args.out, cm)
    print(f"wrote {len(cm.image_ids)}x{len(cm.transform_ids)} correctness bits to {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    if args.eval_cmd == "random-baseline":
        value = evaluation.random_baseline(args.crops, args.classes)
        print(evaluation.format_percent(value))
        return 0

    cm = _load_correctness_arg(args.matrix)
    dataset = args.dataset or Path(args.matrix).stem
    if args.eval_cmd == "top1":
        value = evaluation.top1_accuracy(cm, args.transform_id)
        report = evaluation.EvalReport(
            dataset, len(cm.image_ids), "top1", value, {"transform_id": args.transform_id}
        )
        _write_text(args.out, evaluation.reports_to_json([report]))
    elif args.eval_cmd == "upper-bound":
        subset = _load_subset(args.subset) or list(cm.transform_ids)
        value = evaluation.upper_bound_accuracy(cm, subset)
        report = evaluation.EvalReport(
            dataset, len(cm.image_ids), "upper_bound", value, {"n_transforms": len(subset)}
        )
        _write_text(args.out, evaluation.reports_to_json([report]))
    elif args.eval_cmd == "anchors":
        grid = TransformGrid.load(args.grid)
        subset = _load_subset(args.subset)
        if subset is None:
            # default to the minimum-cover subset, the standard analysis basis
            instance = cover.CoverInstance.from_correctness(cm)
            subset = list(cover.greedy_min_cover(instance).chosen)
        heat = evaluation.per_anchor_upper_bound(cm, grid, subset)
        _write_text(args.out, heat.to_csv())
    elif args.eval_cmd == "groups":
        grid = TransformGrid.load(args.grid)
        breakdown = evaluation.zoom_group_breakdown(cm, grid)
        _write_text(args.out, json.dumps(breakdown.as_dict(), indent=2, sort_keys=True))
    elif args.eval_cmd == "sweep":
        curve = evaluation.center_zoom_sweep(cm)
        _write_text(
            args.out,
            "\n".join(f"{s},{evaluation.format_percent(a)}" for s, a in curve) + "\n",
        )
    else:  # pragma: no cover - argparse restricts choices
        raise AssertionError(args.eval_cmd)
    return 0


def cmd_cover(args: argparse.Namespace) -> int:
    cm = _load_correctness_arg(args.matrix)
    instance = cover.CoverInstance.from_correctness(cm)
    if args.cover_cmd == "greedy":
        result = cover.greedy_min_cover(instance, stop_after=args.stop_after)
        grid = TransformGrid.load(args.grid) if args.grid else None
        _write_text(args.out, result.to_json(grid))
    else:  # oracle
        size = cover.brute_force_min_cover(instance)
        _write_text(args.out, json.dumps({"minimum_cover_size": size}))
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    lm = store.load_logits(args.matrix)
    if args.policy in aggregation.ZOOM_POLICIES:
        grid = TransformGrid.load(args.grid)
        if args.cover is None:
            raise DataError(f"policy {args.policy!r} needs --cover")
        result = cover.cover_result_from_json(Path(args.cover).read_text())
        ids = aggregation.crop_set_for(args.policy, grid, result)
    else:
        expected = 5 if args.policy == "5crop" else 10
        if len(lm.transform_ids) != expected:
            raise DataError(
                f"policy {args.policy!r} expects a matrix with {expected} columns, "
                f"got {len(lm.transform_ids)}"
            )
        ids = list(lm.transform_ids)
    predictions = aggregation.aggregate_matrix(lm, ids, args.mode)
    _write_text(args.out, aggregation.predictions_to_jsonl(predictions))
    return 0


def cmd_memo(args: argparse.Namespace) -> int:
    img = codecs.load_image(args.image)
    scorer = memo.ToyLinearSoftmax(class_count=args.classes)
    theta0 = scorer.init_theta(args.theta_seed)
    cfg = memo.MemoConfig(k=args.k, steps=args.steps, lr=args.lr, seed=args.seed)
    result = memo.memo_adapt(scorer, theta0, img, cfg)
    _write_text(args.out, json.dumps(result.as_dict(), indent=2, sort_keys=True))
    return 0


def _per_source(pairs: list[str] | None) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs or []:
        name, _, path = pair.partition("=")
        if not name or not path:
            raise DataError(f"expected NAME=PATH, got {pair!r}")
        out[name] = path
    return out


def cmd_hardset_build(args: argparse.Namespace) -> int:
    space_doc = json.loads(Path(args.space).read_text())
    space = store.LabelSpace(
        int(space_doc["class_count"]),
        tuple(space_doc["names"]) if space_doc.get("names") else None,
    )
    labels_by = _per_source(args.labels)
    flagged_by = _per_source(args.flagged)
    ann_by = _per_source(args.annotations)
    pre_by = _per_source(args.pre_excluded)
    sources = []
    for pair in args.source:
        name, _, path = pair.partition("=")
        if not name or not path:
            raise DataError(f"--source expects NAME=PATH, got {pair!r}")
        if name not in labels_by:
            raise DataError(f"source {name!r} has no --labels entry")
        sources.append(
            hardset.SourceInput(
                name=name,
                correctness=_load_correctness_arg(path),
                labels=store.label_sets_from_json(Path(labels_by[name]).read_text()),
                flagged=frozenset(_load_ids(flagged_by[name])) if name in flagged_by else frozenset(),
                annotations=hardset.parse_annotations_csv(Path(ann_by[name]).read_text())
                if name in ann_by
                else {},
                pre_excluded=frozenset(_load_ids(pre_by[name])) if name in pre_by else frozenset(),
            )
        )
    excluded = (
        hardset.parse_exclusion_list(Path(args.exclude).read_text())
        if args.exclude
        else hardset.DEFAULT_EXCLUDED_CLASSES
    )
    grid = TransformGrid.load(args.grid) if args.grid else None
    manifest = hardset.build_manifest(sources, space, excluded, grid)
    _write_text(args.out, manifest.to_text())
    return 0


def cmd_demo(args: argparse.Namespace) -> int:
    """Full mock pipeline: grid -> score -> eval -> cover -> aggregate -> hardset."""
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = TransformGrid()
    grid.save(out / "grid.json")

    cfg, labels, _ = mock.demo_fixture(seed=args.seed)
    lm = mock.mock_logit_matrix(cfg, mock.DEMO_IMAGE_IDS, grid)
    store.save_matrix(out / "logits.zpm", lm)
    (out / "labels.json").write_text(store.label_sets_to_json(labels))
    cm = store.correctness_from_logits(lm, labels)
    store.save_matrix(out / "correctness.zpm", cm)

    reports = [
        evaluation.EvalReport(
            "demo", len(cm.image_ids), "upper_bound",
            evaluation.upper_bound_accuracy(cm, cm.transform_ids),
            {"n_transforms": len(cm.transform_ids)},
        ),
        evaluation.EvalReport(
            "demo", len(cm.image_ids), "random_baseline",
            evaluation.random_baseline(len(grid), cfg.class_count),
            {"n_crops": len(grid), "classes": cfg.class_count},
        ),
    ]
    (out / "eval.json").write_text(evaluation.reports_to_json(reports))
    heat = evaluation.per_anchor_upper_bound(cm, grid)
    (out / "anchors.csv").write_text(heat.to_csv())
    breakdown = evaluation.zoom_group_breakdown(cm, grid)
    (out / "groups.json").write_text(json.dumps(breakdown.as_dict(), indent=2, sort_keys=True))

    instance = cover.CoverInstance.from_correctness(cm)
    full = cover.greedy_min_cover(instance)
    (out / "cover.json").write_text(full.to_json(grid))
    top36 = cover.greedy_min_cover(instance, stop_after=36)
    (out / "cover36.json").write_text(top36.to_json(grid))

    ids = aggregation.crop_set_for("zoom-in", grid, full)
    predictions = aggregation.aggregate_matrix(lm, ids, "mean")
    (out / "predictions.jsonl").write_text(aggregation.predictions_to_jsonl(predictions))

    # img_005 is flagged and unanimously accepted; index 9 is excluded by name.
    names = tuple(f"class_{c}" for c in range(9)) + ("bathtub",)
    space = store.LabelSpace(cfg.class_count, names)
    source = hardset.SourceInput(
        name="demo",
        correctness=cm,
        labels=labels,
        flagged=frozenset({"img_005"}),
        annotations={
            "img_005": hardset.AnnotationRecord(
                "img_005", (hardset.Vote.ACCEPT,) * 3
            )
        },
    )
    manifest = hardset.build_manifest([source], space, ("bathtub",), grid)
    (out / "manifest.jsonl").write_text(manifest.to_text())
    print(f"demo pipeline wrote {len(list(out.iterdir()))} files to {out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zoomlens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid", help="transform grid files")
    gsub = p.add_subparsers(dest="grid_cmd", required=True)
    g = gsub.add_parser("gen", help="write a grid JSON")
    g.add_argument("--out", required=True)
    g.add_argument("--scales", help="comma-separated scale list (default: the 36 stock scales)")
    g.add_argument("--crop-size", type=int, default=DEFAULT_CROP_SIZE)
    g.set_defaults(func=cmd_grid_gen)

    p = sub.add_parser("crops", help="apply transforms to an image")
    csub = p.add_subparsers(dest="crops_cmd", required=True)
    c = csub.add_parser("apply", help="write every grid crop of one image")
    c.add_argument("--image", required=True)
    c.add_argument("--grid", required=True)
    c.add_argument("--out-dir", help="directory for per-crop files")
    c.add_argument("--format", choices=("ppm", "zib"), default="ppm")
    c.add_argument("--sheet", help="write one tiled contact-sheet PPM instead")
    c.add_argument("--thumb-size", type=int, default=64)
    c.add_argument("--threads", type=int)
    c.set_defaults(func=cmd_crops_apply)

    p = sub.add_parser("score", help="produce logit matrices")
    ssub = p.add_subparsers(dest="score_cmd", required=True)
    s = ssub.add_parser("mock", help="deterministic in-process mock scorer")
    s.add_argument("--ids-file", required=True, help="one image id per line")
    s.add_argument("--out", required=True)
    s.add_argument("--classes", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--grid", help="grid JSON (required for --columns grid)")
    s.add_argument("--columns", choices=("grid", "sweep", "five", "ten"), default="grid")
    s.add_argument("--planted", help="JSON file of planted rules")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_score_mock)
    b = ssub.add_parser("bridge", help="delegate scoring to an external process")
    b.add_argument("--grid", required=True)
    b.add_argument("--images", required=True, help="JSON array of {id, path}")
    b.add_argument("--out", required=True)
    b.add_argument("--scorer-cmd", required=True, help="command invoked as: CMD <job.json>")
    b.add_argument("--model", default="mock")
    b.add_argument("--device", default="cpu")
    b.add_argument("--batch-size", type=int, default=16)
    b.add_argument("--classes", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--job", help="where to write the job file (default: temp dir)")
    b.set_defaults(func=cmd_score_bridge)

    p = sub.add_parser("correctness", help="turn logits + labels into correctness bits")
    p.add_argument("--logits", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correctness)

    p = sub.add_parser("eval", help="accuracy analytics")
    esub = p.add_subparsers(dest="eval_cmd", required=True)
    for name in ("top1", "upper-bound", "anchors", "groups", "sweep"):
        e = esub.add_parser(name)
        e.add_argument("--matrix", required=True)
        e.add_argument("--dataset")
        e.add_argument("--out")
        if name == "top1":
            e.add_argument("--transform-id", type=int, required=True)
        if name in ("upper-bound", "anchors"):
            e.add_argument("--subset", help="cover JSON or JSON id array")
        if name in ("anchors", "groups"):
            e.add_argument("--grid", required=True)
        e.set_defaults(func=cmd_eval)
    e = esub.add_parser("random-baseline")
    e.add_argument("--crops", type=int, required=True)
    e.add_argument("--classes", type=int, required=True)
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("cover", help="transform minimum set cover")
    vsub = p.add_subparsers(dest="cover_cmd", required=True)
    v = vsub.add_parser("greedy")
    v.add_argument("--matrix", required=True)
    v.add_argument("--grid", help="include zoom-group split in the output")
    v.add_argument("--stop-after", type=int)
    v.add_argument("--out")
    v.set_defaults(func=cmd_cover)
    v = vsub.add_parser("oracle", help="exact minimum size, small instances only")
    v.add_argument("--matrix", required=True)
    v.add_argument("--out")
    v.set_defaults(func=cmd_cover)

    p = sub.add_parser("aggregate", help="fuse per-crop predictions")
    p.add_argument("--matrix", required=True, help="ZPM1 logits")
    p.add_argument("--policy", choices=aggregation.POLICIES, required=True)
    p.add_argument("--mode", choices=("mean", "max"), required=True)
    p.add_argument("--grid")
    p.add_argument("--cover", help="cover JSON (required for zoom policies)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("memo", help="entropy-minimisation adaptation on the toy scorer")
    p.add_argument("--image", required=True)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta-seed", type=int, default=0)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_memo)

    p = sub.add_parser("hardset", help="hard-benchmark manifest construction")
    hsub = p.add_subparsers(dest="hardset_cmd", required=True)
    h = hsub.add_parser("build")
    h.add_argument("--source", action="append", required=True, metavar="NAME=CM.ZPM")
    h.add_argument("--labels", action="append", required=True, metavar="NAME=LABELS.JSON")
    h.add_argument("--space", required=True, help="JSON {class_count, names}")
    h.add_argument("--flagged", action="append", metavar="NAME=IDS.TXT")
    h.add_argument("--annotations", action="append", metavar="NAME=VOTES.CSV")
    h.add_argument("--pre-excluded", action="append", metavar="NAME=IDS.TXT")
    h.add_argument("--exclude", help="class-name exclusion list (default: the stock 8)")
    h.add_argument("--grid", help="require matrices to cover this grid exactly")
    h.add_argument("--out")
    h.set_defaults(func=cmd_hardset_build)

    p = sub.add_parser("demo", help="run the whole mock pipeline deterministically")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ZoomlensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
