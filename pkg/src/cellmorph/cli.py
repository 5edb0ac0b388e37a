"""Command-line interface.

Subcommands: analyze, evaluate, preprocess, augment, synth, bench.
Inputs ending in .json are treated as polygon annotation files, anything
else as 16-bit label maps. Every run is deterministic given its seed:
identical invocations produce byte-identical outputs (timing values
excepted). Exit codes: 0 success, 1 partial (some images failed),
2 invalid usage or unreadable/malformed input.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import report
from .errors import CellmorphError, FrameMismatchError
from .evaluation import EvalReport, evaluate_sets
from .geometry import ScaleConfig, analyze_set, summarize
from .ingest import InstanceSet, load_coco, load_label_map, write_label_map
from .preprocess import ClaheParams, GrayImage, augment, clahe, load_gray_image, save_gray_image
from .synth import generate_scene

THREADS_ENV = "CELLMORPH_THREADS"


def _parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise CellmorphError(f"expected WxH, got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise CellmorphError(f"expected integers in WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise CellmorphError(f"grid values must be >= 1, got {text!r}")
    return w, h


def _parse_float_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise CellmorphError(f"expected LO,HI, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise CellmorphError(f"expected numbers in LO,HI, got {text!r}") from None


def _thread_count(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else None


def _load_sets(path: str) -> dict[int, InstanceSet]:
    """Label map -> single image id 1; annotation JSON -> per image id."""
    if path.endswith(".json"):
        return load_coco(path)
    return {1: load_label_map(path)}


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(path)


def cmd_analyze(args) -> int:
    scale = ScaleConfig(microns_per_pixel=args.scale)
    sets = _load_sets(args.input)
    pairs = []
    for image_id in sorted(sets):
        pairs.extend((inst.instance_id, inst.mask) for inst in sets[image_id].instances)
    props = analyze_set(pairs, scale, threads=_thread_count(args))
    prefix = args.output if args.output else str(Path(args.input).with_suffix(""))
    if args.format in ("csv", "both"):
        _write(Path(prefix + ".cells.csv"), report.cells_to_csv(props))
    if args.format in ("json", "both"):
        summary = summarize(props) if props else None
        _write(Path(prefix + ".summary.json"), report.summary_to_json(summary))
    return 0


def _empty_like(other: InstanceSet) -> InstanceSet:
    return InstanceSet(other.frame_width, other.frame_height, ())


def _macro_stats(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    return {
        "mean_pct": f"{100.0 * arr.mean():.2f}",
        "std_pct": f"{100.0 * arr.std():.2f}",
    }


def _overall(rows: list[tuple[str, EvalReport]]) -> dict:
    tp = sum(r.tp for _, r in rows)
    fp = sum(r.fp for _, r in rows)
    fn = sum(r.fn for _, r in rows)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
    overall = {
        "micro": {
            "tp": tp,
            "fp": fp,
            "fn": fn,
            "precision_pct": f"{100.0 * precision:.2f}",
            "recall_pct": f"{100.0 * recall:.2f}",
            "f1_pct": f"{100.0 * f1:.2f}",
        },
        "macro": {
            "images": len(rows),
            "precision": _macro_stats([r.precision for _, r in rows]),
            "recall": _macro_stats([r.recall for _, r in rows]),
            "f1": _macro_stats([r.f1 for _, r in rows]),
            "dice": _macro_stats([r.dice for _, r in rows]),
        },
    }
    scored = [r.ap for _, r in rows if r.ap is not None]
    if scored:
        overall["macro"]["ap"] = _macro_stats(scored)
    return overall


def cmd_evaluate(args) -> int:
    if not (0.0 < args.iou_thr < 1.0):
        raise CellmorphError(f"--iou-thr must lie in (0, 1), got {args.iou_thr}")
    pred_sets = _load_sets(args.pred)
    gt_sets = _load_sets(args.gt)
    image_ids = sorted(set(pred_sets) | set(gt_sets))
    rows: list[tuple[str, EvalReport]] = []
    skipped: list[dict] = []
    for image_id in image_ids:
        pred = pred_sets.get(image_id)
        gt = gt_sets.get(image_id)
        if pred is None:
            pred = _empty_like(gt)
        if gt is None:
            gt = _empty_like(pred)
        try:
            rows.append((str(image_id), evaluate_sets(pred, gt, args.iou_thr)))
        except FrameMismatchError as exc:
            skipped.append({"image_id": str(image_id), "error": str(exc)})
            print(f"warning: image {image_id} skipped: {exc}", file=sys.stderr)
    if image_ids and not rows:
        print("error: every image failed to evaluate", file=sys.stderr)
        return 2
    overall = _overall(rows)
    prefix = args.output if args.output else str(Path(args.gt).with_suffix(""))
    if args.format in ("csv", "both"):
        _write(Path(prefix + ".eval.csv"), report.eval_rows_to_csv(rows))
    if args.format in ("json", "both"):
        _write(Path(prefix + ".eval.json"), report.eval_to_json(rows, overall, skipped))
    return 1 if skipped else 0


def cmd_preprocess(args) -> int:
    tiles_x, tiles_y = _parse_grid(args.tiles)
    params = ClaheParams(tiles_x=tiles_x, tiles_y=tiles_y, clip_limit=args.clip_limit)
    img = load_gray_image(args.input)
    out = clahe(img, params)
    out_path = Path(
        args.output if args.output else str(Path(args.input).with_suffix("")) + ".clahe.png"
    )
    save_gray_image(out, out_path)
    print(out_path)
    return 0


def cmd_augment(args) -> int:
    img = load_gray_image(args.image)
    masks = (
        load_label_map(args.labels)
        if args.labels
        else InstanceSet(img.width, img.height, ())
    )
    kwargs = {}
    if args.op == "crop":
        if args.rect:
            parts = args.rect.split(",")
            if len(parts) != 4:
                raise CellmorphError(f"--rect expects X,Y,W,H, got {args.rect!r}")
            kwargs["rect"] = tuple(int(p) for p in parts)
        elif args.crop_size:
            kwargs["crop_size"] = _parse_grid(args.crop_size)
        else:
            raise CellmorphError("crop needs --rect X,Y,W,H or --crop-size WxH")
    if args.op == "scale":
        if args.factor is None:
            raise CellmorphError("scale needs --factor")
        kwargs["factor"] = args.factor
    out_img, out_set = augment(img, masks, args.op, seed=args.seed, **kwargs)
    prefix = (
        args.output if args.output else str(Path(args.image).with_suffix("")) + f".{args.op}"
    )
    img_path = Path(prefix + ".png")
    save_gray_image(out_img, img_path)
    print(img_path)
    if args.labels:
        labels_path = Path(prefix + ".labels.png")
        write_label_map(out_set, labels_path)
        print(labels_path)
    return 0


def cmd_synth(args) -> int:
    frame_w, frame_h = _parse_grid(args.frame)
    scene = generate_scene(
        n_cells=args.cells,
        a_range=_parse_float_pair(args.a_range),
        b_range=_parse_float_pair(args.b_range),
        frame_width=frame_w,
        frame_height=frame_h,
        noise_level=args.noise,
        seed=args.seed,
    )
    img_path = Path(args.output + ".png")
    save_gray_image(scene.image, img_path)
    print(img_path)
    labels_path = Path(args.output + ".labels.png")
    write_label_map(scene.truth, labels_path)
    print(labels_path)
    _write(Path(args.output + ".truth.csv"), report.truth_to_csv(list(scene.params)))
    return 0


def cmd_bench(args) -> int:
    if args.reps < 3:
        raise CellmorphError(f"--reps must be >= 3, got {args.reps}")
    scale = ScaleConfig(microns_per_pixel=args.scale)
    reports = {
        "serial": bench_mod.time_pipeline(
            args.input, scale, args.reps, parallel=False, label="geometry-path serial"
        )
    }
    if args.parallel:
        reports["parallel"] = bench_mod.time_pipeline(
            args.input,
            scale,
            args.reps,
            parallel=True,
            threads=_thread_count(args),
            label="geometry-path parallel",
        )
    out_path = Path(
        args.output if args.output else str(Path(args.input).with_suffix("")) + ".timing.json"
    )
    _write(out_path, report.timing_to_json(reports))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellmorph",
        description="Per-cell morphometry from instance-segmentation masks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="measure every instance and summarize")
    p.add_argument("input", help="label map PNG or annotation JSON")
    p.add_argument("--scale", type=float, required=True, metavar="UM_PER_PX")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("-o", "--output", default=None, metavar="PREFIX")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--pred", required=True, help="label map PNG or annotation JSON")
    p.add_argument("--gt", required=True, help="label map PNG or annotation JSON")
    p.add_argument("--iou-thr", type=float, default=0.5)
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("-o", "--output", default=None, metavar="PREFIX")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("preprocess", help="contrast-limited adaptive equalization")
    p.add_argument("input", help="image file")
    p.add_argument("--tiles", default="8x8", metavar="NxM")
    p.add_argument("--clip-limit", type=float, default=0.01)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_preprocess)

    p = sub.add_parser("augment", help="geometric transforms of image plus masks")
    p.add_argument("--image", required=True)
    p.add_argument("--labels", default=None, help="label map to transform alongside")
    p.add_argument("--op", required=True, choices=("rot90", "rot180", "hflip", "vflip", "crop", "scale"))
    p.add_argument("--rect", default=None, metavar="X,Y,W,H")
    p.add_argument("--crop-size", default=None, metavar="WxH")
    p.add_argument("--factor", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, metavar="PREFIX")
    p.set_defaults(handler=cmd_augment)

    p = sub.add_parser("synth", help="generate a synthetic scene with ground truth")
    p.add_argument("--cells", type=int, default=50)
    p.add_argument("--frame", default="512x512", metavar="WxH")
    p.add_argument("--a-range", default="8,20", metavar="LO,HI")
    p.add_argument("--b-range", default="4,8", metavar="LO,HI")
    p.add_argument("--noise", type=float, default=8.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="scene", metavar="PREFIX")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("bench", help="time the analyze pipeline")
    p.add_argument("input", help="label map PNG")
    p.add_argument("--scale", type=float, default=1.0, metavar="UM_PER_PX")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (CellmorphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
