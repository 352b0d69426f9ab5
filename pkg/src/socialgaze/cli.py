"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 schema mismatch. Relative
output paths are resolved under ``$SOCIALGAZE_HOME`` when it is set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import SchemaError, ValidationError

HOME_ENV = "SOCIALGAZE_HOME"


def out_path(p) -> Path:
    p = Path(p)
    home = os.environ.get(HOME_ENV)
    if home and not p.is_absolute():
        return Path(home) / p
    return p


def _config(args):
    from .config import RunConfig, toy_config

    if args.config:
        cfg = RunConfig.load(args.config)
    elif args.preset == "toy":
        cfg = toy_config()
    else:
        cfg = RunConfig()
    cfg.apply_overrides(args.set or [])
    if getattr(args, "static", False):
        cfg.ablation.static = True
        cfg.temporal.window = 1
    return cfg.validate()


def _add_config_args(p):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--preset", choices=("full", "toy"), default="full")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override (repeatable)")


def _data_paths(args):
    root = Path(args.data) if args.data else None
    ann = Path(args.annotations) if args.annotations else (root / "annotations.jsonl" if root else None)
    frames = Path(args.frames) if args.frames else (root / "frames" if root else None)
    if ann is None or frames is None:
        raise ValidationError("give --data DIR or both --annotations and --frames")
    return ann, frames


def _add_data_args(p):
    p.add_argument("--data", help="directory with annotations.jsonl and frames/")
    p.add_argument("--annotations")
    p.add_argument("--frames")


def cmd_build_annotations(args):
    from .annotations import build_annotations, emit_statistics, format_statistics, read_source, read_tracks, write_records

    sources = []
    for path in args.input:
        sources.extend(read_source(path, args.source))
    tracks = read_tracks(args.tracks) if args.tracks else None
    records = build_annotations(sources, tracks, args.iou)
    out = out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_records(records, out)
    stats = emit_statistics(records)
    if args.stats:
        Path(out_path(args.stats)).write_text(json.dumps(stats, indent=2, sort_keys=True))
    print(format_statistics(stats))
    return 0


def cmd_synth_data(args):
    from .synth import synth_generate

    ds = synth_generate(args.seed, args.clips, args.persons, args.frames, image_size=args.image_size)
    out = ds.write(out_path(args.out))
    print(f"wrote {len(ds.records)} frame records to {out}")
    return 0


def cmd_train(args):
    from .annotations import read_records
    from .data import DirectoryFrameStore
    from .engine import train

    cfg = _config(args)
    ann, frames = _data_paths(args)
    records = read_records(ann)
    stage = None if args.stage == "single" else int(args.stage)
    out = out_path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = train(cfg, records, DirectoryFrameStore(frames), stage=stage, init_checkpoint=args.init,
                out_dir=out, log_path=out / f"train_stage{stage or 0}.jsonl")
    (out / "config.txt").write_text(res.cfg.dumps())
    last = res.history[-1]
    print(f"stage {stage or 0}: {len(res.history)} steps, final loss {last['loss']:.4f}, "
          f"config {res.cfg.config_hash()}, checkpoint {res.checkpoint}")
    return 0


def cmd_infer(args):
    from .annotations import read_records
    from .data import DirectoryFrameStore
    from .engine import infer, model_from_checkpoint
    from .predictions import write_predictions

    model, cfg = model_from_checkpoint(args.checkpoint)
    ann, frames = _data_paths(args)
    records = read_records(ann)
    preds = infer(model, cfg, records, DirectoryFrameStore(frames), with_heatmaps=args.heatmaps)
    out = out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_predictions(preds, out)
    Path(str(out) + ".meta.json").write_text(
        json.dumps({"config_hash": cfg.config_hash(), "checkpoint": str(args.checkpoint)}, indent=2)
    )
    print(f"wrote {len(preds)} frame predictions to {out}")
    return 0


def cmd_evaluate(args):
    from .annotations import read_records
    from .metrics.report import evaluate
    from .predictions import read_predictions

    cfg = _config(args)
    preds = read_predictions(args.pred)
    gt = read_records(args.gt)
    report = evaluate(preds, gt, cfg.eval.sa_threshold, cfg.eval.decoder_threshold, cfg.eval.laeo_keep,
                      post_process=args.post_process, auc_grid=cfg.eval.auc_grid)
    print(report.format_table())
    if args.report:
        path = out_path(args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        body = json.loads(report.dumps())
        path.write_text(json.dumps({"config_hash": cfg.config_hash(), "post_process": args.post_process,
                                    "metrics": body,
                                    "table": report.format_table()}, indent=2))
    return 0


def cmd_render(args):
    from .annotations import read_records
    from .data import DirectoryFrameStore
    from .predictions import read_predictions
    from .render import render_predictions

    preds = read_predictions(args.pred)
    gt = read_records(args.gt)
    written = render_predictions(preds, gt, DirectoryFrameStore(args.frames), out_path(args.out),
                                 args.threshold, scale=args.scale)
    print(f"wrote {len(written)} images to {out_path(args.out)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="socialgaze", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-annotations", help="unify source annotations")
    p.add_argument("--source", required=True, help="dataset id of the input files")
    p.add_argument("--input", required=True, action="append", help="source JSONL (repeatable)")
    p.add_argument("--tracks", help="head-track JSONL to merge")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.add_argument("--stats", help="write statistics JSON here")
    p.set_defaults(func=cmd_build_annotations)

    p = sub.add_parser("synth-data", help="generate a synthetic dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clips", type=int, default=32)
    p.add_argument("--persons", type=int, default=3)
    p.add_argument("--frames", type=int, default=5)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("train", help="run a training stage")
    _add_config_args(p)
    _add_data_args(p)
    p.add_argument("--stage", choices=("1", "2", "single"), default="single")
    p.add_argument("--init", help="stage-1 checkpoint (stage 2)")
    p.add_argument("--static", action="store_true", help="static model with T=1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="write predictions for annotated frames")
    p.add_argument("--checkpoint", required=True)
    _add_data_args(p)
    p.add_argument("--heatmaps", action="store_true", help="include full heatmaps")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="score predictions")
    _add_config_args(p)
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--post-process", action="store_true", help="social labels from gaze points")
    p.add_argument("--report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="draw prediction overlays")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--frames", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
