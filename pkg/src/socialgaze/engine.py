"""Training stages, checkpoints and inference."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import ClipBatcher, build_windows
from .errors import ValidationError
from .metrics.gaze import heatmap_argmax_point
from .model.network import build_model
from .predictions import PredictionRecord
from .training.losses import TERMS, loss_total
from .training.schedule import warmup_cosine


class CheckpointError(ValidationError):
    """Checkpoint missing or incompatible with the requested run."""


def stage_config(cfg, stage: int):
    """Stage 1 is the static single-frame model; stage 2 the temporal one.

    ``stage=None`` keeps the configuration as given (single-stage training).
    """
    out = copy.deepcopy(cfg)
    if stage == 1:
        out.ablation.static = True
        out.temporal.window = 1
        out.temporal.stride = 1
    elif stage not in (None, 2):
        raise ValidationError(f"unknown training stage {stage}")
    return out.validate()


def save_checkpoint(model, cfg, path, stage: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "params": {k: v.detach().clone() for k, v in model.state_dict().items()},
            "config": cfg.to_flat(),
            "stage": stage,
            "config_hash": cfg.config_hash(),
        },
        path,
    )
    return path


def load_checkpoint(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        ckpt = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:  # torch raises several unrelated types for corrupt files
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(ckpt, dict) or "params" not in ckpt or "config" not in ckpt:
        raise CheckpointError(f"{path} is not a checkpoint")
    return ckpt


def model_from_checkpoint(path, cfg=None):
    from .config import RunConfig

    ckpt = load_checkpoint(path)
    cfg = cfg or RunConfig.from_flat(ckpt["config"])
    model = build_model(cfg)
    model.load_state_dict(ckpt["params"])
    return model, cfg


@dataclass
class TrainResult:
    model: torch.nn.Module
    cfg: object
    history: list = field(default_factory=list)
    checkpoint: Path | None = None


def total_steps(cfg, n_windows: int) -> int:
    if cfg.optim.steps > 0:
        return cfg.optim.steps
    return cfg.optim.epochs * max(math.ceil(n_windows / cfg.optim.batch_size), 1)


def train(cfg, records, frame_store, stage: int | None = 1, init_checkpoint=None, out_dir=None,
          log_path=None) -> TrainResult:
    """Run one training stage and return the trained model plus its loss history.

    Stage 2 must start from a stage-1 checkpoint; its ViT (patch embedding,
    position table and transformer layers) is frozen.
    """
    cfg = stage_config(cfg, stage)
    dtype = torch.float64 if cfg.dtype == "float64" else torch.float32
    model = build_model(cfg)
    if stage == 2:
        if init_checkpoint is None:
            raise CheckpointError("stage 2 needs a stage-1 checkpoint")
        ckpt = load_checkpoint(init_checkpoint)
        model.load_state_dict(ckpt["params"])
        model.to(dtype)
        for p in model.vit_parameters():
            p.requires_grad_(False)
    params = [p for p in model.parameters() if p.requires_grad]
    lr = cfg.optim.lr_stage2 if stage == 2 else cfg.optim.lr
    opt = torch.optim.AdamW(params, lr=lr, weight_decay=cfg.optim.weight_decay)

    windows = build_windows(records, cfg.temporal.window, cfg.temporal.stride)
    if not windows:
        raise ValidationError("no training frames")
    steps = total_steps(cfg, len(windows))
    sched = torch.optim.lr_scheduler.LambdaLR(
        opt, lambda s: warmup_cosine(s, steps, cfg.optim.warmup_frac, cfg.optim.min_lr_frac)
    )
    batcher = ClipBatcher(cfg, frame_store, dtype)
    rng = np.random.default_rng(cfg.seed)
    log = open(log_path, "a", encoding="utf-8") if log_path else None
    if log:
        log.write(json.dumps({"stage": stage or 0, "steps": steps, "config_hash": cfg.config_hash(),
                              "config": cfg.to_flat()}) + "\n")
    history = []
    order, pos = [], 0
    model.train()
    try:
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(cfg.seed)
            for step in range(steps):
                if pos >= len(order):
                    order, pos = rng.permutation(len(windows)).tolist(), 0
                chunk = [windows[k] for k in order[pos : pos + cfg.optim.batch_size]]
                pos += cfg.optim.batch_size
                batch = batcher.make_batch(chunk, rng, train=True)
                out = model(**batch.inputs())
                total, terms = loss_total(out, batch.targets, cfg.loss, cfg.ablation)
                opt.zero_grad(set_to_none=True)
                total.backward()
                if cfg.optim.grad_clip > 0:
                    torch.nn.utils.clip_grad_norm_(params, cfg.optim.grad_clip)
                cur_lr = opt.param_groups[0]["lr"]
                opt.step()
                sched.step()
                entry = {"step": step, "stage": stage or 0, "lr": cur_lr, "loss": float(total.detach())}
                entry.update({k: float(terms[k].detach()) for k in TERMS})
                history.append(entry)
                if log:
                    log.write(json.dumps(entry) + "\n")
    finally:
        if log:
            log.close()
    model.eval()
    ckpt_path = None
    if out_dir is not None:
        ckpt_path = save_checkpoint(model, cfg, Path(out_dir) / f"stage{stage or 0}.pt", stage or 0)
    return TrainResult(model, cfg, history, ckpt_path)


@torch.no_grad()
def infer(model, cfg, records, frame_store, with_heatmaps: bool = False, batch_size: int | None = None):
    """Predict every annotated frame with all persons kept (no sampling cap)."""
    dtype = next(model.parameters()).dtype
    was_training = model.training
    model.eval()
    windows = build_windows(records, cfg.temporal.window, cfg.temporal.stride)
    batcher = ClipBatcher(cfg, frame_store, dtype)
    bs = batch_size or cfg.optim.batch_size
    preds = {}
    for start in range(0, len(windows), bs):
        chunk = windows[start : start + bs]
        batch = batcher.make_batch(chunk, train=False)
        out = model(**batch.inputs())
        for bi, w in enumerate(chunk):
            slot_of = {pid: k for k, pid in enumerate(batch.slots[bi]) if pid is not None}
            for ti, rec in enumerate(w.records):
                if not w.emit[ti]:
                    continue
                idx = [slot_of[pid] for pid in rec.person_ids]
                hm = out.heatmaps[bi, idx, ti].double().numpy()
                ix = np.ix_(idx, idx)
                preds[rec.key] = PredictionRecord(
                    rec.dataset, rec.clip_id, rec.frame_idx, list(rec.person_ids),
                    np.array([heatmap_argmax_point(h) for h in hm]).reshape(-1, 2),
                    out.inout[bi, idx, ti].double().numpy(),
                    out.lah[bi, :, :, ti].double().numpy()[ix],
                    out.laeo[bi, :, :, ti].double().numpy()[ix],
                    out.sa[bi, :, :, ti].double().numpy()[ix],
                    hm if with_heatmaps else None,
                )
    model.train(was_training)
    return [preds[r.key] for r in records if r.key in preds]
