"""Ground-truth tensors for the loss: heatmaps, gaze vectors and label maps."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
import torch

from ..errors import ValidationError

# LAH target codes stored in TrainingTargets.lah
LAH_NEGATIVE = -1
LAH_UNKNOWN = -2


def synth_gt_heatmap(point, size=(64, 64), sigma: float = 3.0) -> np.ndarray:
    """Peak-normalised isotropic Gaussian centred on the point's grid cell."""
    x, y = float(point[0]), float(point[1])
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValidationError(f"gaze point {point} outside the unit square")
    h, w = size
    cx = min(int(x * w), w - 1)
    cy = min(int(y * h), h - 1)
    rows = np.arange(h)[:, None] - cy
    cols = np.arange(w)[None, :] - cx
    return np.exp(-(rows**2 + cols**2) / (2.0 * sigma**2))


def synth_gt_vector(head_box, gaze_point, eps: float = 1e-6):
    """Unit vector from the head-box center to the gaze point, or None if degenerate.

    Image coordinates: y grows downwards.
    """
    cx = 0.5 * (head_box[0] + head_box[2])
    cy = 0.5 * (head_box[1] + head_box[3])
    v = np.array([gaze_point[0] - cx, gaze_point[1] - cy], dtype=np.float64)
    n = float(np.hypot(*v))
    if n < eps:
        return None
    return v / n


@dataclass
class TrainingTargets:
    heatmaps: torch.Tensor  # [B, N, T, Hh, Wh]
    heatmap_valid: torch.Tensor  # [B, N, T] bool
    vectors: torch.Tensor  # [B, N, T, 2]
    vector_valid: torch.Tensor  # [B, N, T] bool
    inout: torch.Tensor  # [B, N, T] float, 1 = in
    inout_valid: torch.Tensor  # [B, N, T] bool
    lah: torch.Tensor  # [B, N, T] long: target slot, LAH_NEGATIVE or LAH_UNKNOWN
    sa: torch.Tensor  # [B, N, N, T] long: 1, 0, -1 unknown
    laeo: torch.Tensor  # [B, N, N, T] long: 1, 0, -1 unknown (evaluation only)

    def to(self, dtype=None) -> "TrainingTargets":
        vals = []
        for f in fields(self):
            v = getattr(self, f.name)
            vals.append(v.to(dtype) if dtype is not None and v.is_floating_point() else v)
        return TrainingTargets(*vals)

    def select(self, index) -> "TrainingTargets":
        return TrainingTargets(*(getattr(self, f.name)[index] for f in fields(self)))


def empty_targets(b, n, t, heatmap_size, dtype=torch.float32) -> TrainingTargets:
    h, w = heatmap_size
    return TrainingTargets(
        torch.zeros(b, n, t, h, w, dtype=dtype),
        torch.zeros(b, n, t, dtype=torch.bool),
        torch.zeros(b, n, t, 2, dtype=dtype),
        torch.zeros(b, n, t, dtype=torch.bool),
        torch.zeros(b, n, t, dtype=dtype),
        torch.zeros(b, n, t, dtype=torch.bool),
        torch.full((b, n, t), LAH_UNKNOWN, dtype=torch.long),
        torch.full((b, n, n, t), -1, dtype=torch.long),
        torch.full((b, n, n, t), -1, dtype=torch.long),
    )


def fill_frame_targets(targets: TrainingTargets, b: int, t: int, rec, slots: list, sigma: float) -> None:
    """Write one unified frame record into batch row ``b``, time ``t``.

    ``slots[k]`` is the person id in slot k (or None for padding). A LAH
    target whose person was not sampled makes that looker unknown.
    """
    hm_size = tuple(targets.heatmaps.shape[-2:])
    slot_of = {pid: k for k, pid in enumerate(slots) if pid is not None}
    present = set(rec.person_ids)
    for k, pid in enumerate(slots):
        if pid is None or pid not in present:
            continue
        p = rec.person(pid)
        if p.gaze_point is not None and p.inout != "out":
            targets.heatmaps[b, k, t] = torch.from_numpy(synth_gt_heatmap(p.gaze_point, hm_size, sigma))
            targets.heatmap_valid[b, k, t] = True
            v = synth_gt_vector(p.head_box, p.gaze_point)
            if v is not None:
                targets.vectors[b, k, t] = torch.from_numpy(v)
                targets.vector_valid[b, k, t] = True
        if p.inout in ("in", "out"):
            targets.inout[b, k, t] = 1.0 if p.inout == "in" else 0.0
            targets.inout_valid[b, k, t] = True
        label = rec.lah_label(pid)
        if label is None:
            targets.lah[b, k, t] = LAH_NEGATIVE
        elif label != "unknown" and label in slot_of:
            targets.lah[b, k, t] = slot_of[label]
    for a, pa in enumerate(slots):
        for c, pc in enumerate(slots):
            if a == c or pa is None or pc is None or pa not in present or pc not in present:
                continue
            v = rec.sa_label(pa, pc)
            targets.sa[b, a, c, t] = -1 if v is None else v
            v = rec.laeo_label(pa, pc)
            targets.laeo[b, a, c, t] = -1 if v is None else v
