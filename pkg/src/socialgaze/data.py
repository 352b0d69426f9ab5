"""Frame storage, clip windowing and batch assembly."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .errors import ValidationError
from .training.sampling import sample_people
from .training.targets import TrainingTargets, empty_targets, fill_frame_targets


def frame_path(root, dataset: str, clip_id: str, frame_idx: int) -> Path:
    return Path(root) / dataset / clip_id / f"{frame_idx:06d}.png"


class DirectoryFrameStore:
    """Frames as ``<root>/<dataset>/<clip_id>/<frame_idx:06d>.png``."""

    def __init__(self, root):
        self.root = Path(root)

    def get(self, dataset, clip_id, frame_idx) -> np.ndarray:
        path = frame_path(self.root, dataset, clip_id, frame_idx)
        if not path.exists():
            raise ValidationError(f"missing frame {path}")
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"))


class MemoryFrameStore:
    def __init__(self, frames: dict):
        self.frames = frames

    def get(self, dataset, clip_id, frame_idx) -> np.ndarray:
        return self.frames[(dataset, clip_id, frame_idx)]


def save_frames(frames: dict, root) -> None:
    for (ds, clip, idx), arr in frames.items():
        path = frame_path(root, ds, clip, idx)
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(arr).save(path)


@dataclass
class ClipWindow:
    """``T`` frame records of one clip; ``emit[t]`` is False for repeated filler frames."""

    dataset: str
    clip_id: str
    records: list
    emit: list

    @property
    def person_ids(self) -> list:
        seen = []
        for r in self.records:
            for pid in r.person_ids:
                if pid not in seen:
                    seen.append(pid)
        return seen


def build_windows(records, window: int, stride: int = 1) -> list[ClipWindow]:
    """Tile every clip into windows of ``window`` frames spaced ``stride`` apart.

    Each frame lands in exactly one window; the last window of a phase is
    filled up by repeating its final frame.
    """
    clips = defaultdict(list)
    for r in records:
        clips[(r.dataset, r.clip_id)].append(r)
    out = []
    for (ds, clip), recs in sorted(clips.items()):
        recs = sorted(recs, key=lambda r: r.frame_idx)
        for phase in range(stride):
            seq = recs[phase::stride]
            for start in range(0, len(seq), window):
                chunk = seq[start : start + window]
                emit = [True] * len(chunk) + [False] * (window - len(chunk))
                chunk = chunk + [chunk[-1]] * (window - len(chunk))
                out.append(ClipWindow(ds, clip, chunk, emit))
    return out


@dataclass
class Batch:
    frames: torch.Tensor  # [B, T, 3, S, S]
    crops: torch.Tensor  # [B, N, T, 3, Hc, Wc]
    boxes: torch.Tensor  # [B, N, T, 4]
    mask: torch.Tensor  # [B, N, T]
    speaking: torch.Tensor | None
    targets: TrainingTargets
    slots: list  # per window, person id per slot (None = pad)
    windows: list

    def inputs(self):
        return dict(frames=self.frames, crops=self.crops, boxes=self.boxes, mask=self.mask,
                    speaking=self.speaking)


def _to_tensor(arr: np.ndarray, dtype) -> torch.Tensor:
    return torch.from_numpy(np.array(arr, copy=True)).permute(2, 0, 1).to(dtype) / 255.0


def crop_box(frame: torch.Tensor, box, size: int) -> torch.Tensor:
    """Crop a normalised box from ``[3, H, W]`` and resize it to ``size x size``."""
    _, h, w = frame.shape
    x0 = min(max(int(math.floor(box[0] * w)), 0), w - 1)
    y0 = min(max(int(math.floor(box[1] * h)), 0), h - 1)
    x1 = max(min(int(math.ceil(box[2] * w)), w), x0 + 1)
    y1 = max(min(int(math.ceil(box[3] * h)), h), y0 + 1)
    patch = frame[:, y0:y1, x0:x1][None]
    return F.interpolate(patch, size=(size, size), mode="bilinear", align_corners=False)[0]


class ClipBatcher:
    """Turns clip windows into model-ready tensors, caching decoded frames and crops."""

    def __init__(self, cfg, frame_store, dtype=None):
        self.cfg = cfg
        self.store = frame_store
        self.dtype = dtype or (torch.float64 if cfg.dtype == "float64" else torch.float32)
        self._frames: dict = {}
        self._crops: dict = {}

    def frame(self, rec) -> torch.Tensor:
        key = rec.key
        if key not in self._frames:
            arr = self.store.get(*key)
            t = _to_tensor(arr, self.dtype)
            s = self.cfg.model.image_size
            resized = F.interpolate(t[None], size=(s, s), mode="bilinear", align_corners=False)[0]
            self._frames[key] = (t, resized)
        return self._frames[key]

    def crop(self, rec, person) -> torch.Tensor:
        key = (rec.key, person.person_id)
        if key not in self._crops:
            full, _ = self.frame(rec)
            self._crops[key] = crop_box(full, person.head_box, self.cfg.model.crop_size)
        return self._crops[key]

    def make_batch(self, windows, rng=None, train: bool = True) -> Batch:
        m = self.cfg.model
        cap = self.cfg.sampling.max_people
        t = len(windows[0].records)
        slots = [sample_people(w.person_ids, cap, rng, train) for w in windows]
        n = max(len(s) for s in slots)
        slots = [s + [None] * (n - len(s)) for s in slots]
        b = len(windows)
        c = m.crop_size
        frames = torch.zeros(b, t, 3, m.image_size, m.image_size, dtype=self.dtype)
        crops = torch.zeros(b, n, t, 3, c, c, dtype=self.dtype)
        boxes = torch.zeros(b, n, t, 4, dtype=self.dtype)
        mask = torch.zeros(b, n, t, dtype=torch.bool)
        speaking = torch.zeros(b, n, t, dtype=self.dtype) if self.cfg.ablation.speaking else None
        targets = empty_targets(b, n, t, m.heatmap_size, self.dtype)
        for bi, (w, sl) in enumerate(zip(windows, slots)):
            if len(w.records) != t:
                raise ValidationError("all windows in a batch need the same length")
            for ti, rec in enumerate(w.records):
                frames[bi, ti] = self.frame(rec)[1]
                present = {p.person_id: p for p in rec.persons}
                for k, pid in enumerate(sl):
                    if pid is None or pid not in present:
                        continue
                    p = present[pid]
                    crops[bi, k, ti] = self.crop(rec, p)
                    boxes[bi, k, ti] = torch.tensor(p.head_box, dtype=self.dtype)
                    mask[bi, k, ti] = True
                    if speaking is not None and p.speaking is not None:
                        speaking[bi, k, ti] = float(p.speaking)
                fill_frame_targets(targets, bi, ti, rec, sl, self.cfg.loss.heatmap_sigma)
        return Batch(frames, crops, boxes, mask, speaking, targets, slots, list(windows))
