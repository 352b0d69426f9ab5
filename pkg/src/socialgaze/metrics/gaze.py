"""Gaze-following metrics: L2 distance and heatmap AUC."""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn.functional as F

from .. import kernels
from ..errors import ValidationError


def heatmap_argmax_point(heatmap) -> tuple[float, float]:
    """Cell-center coordinates (unit square) of the heatmap maximum.

    Ties go to the lowest linear index.
    """
    hm = np.asarray(heatmap)
    h, w = hm.shape
    idx = int(np.argmax(hm))
    r, c = divmod(idx, w)
    return ((c + 0.5) / w, (r + 0.5) / h)


def dist(pred, gt_points) -> dict:
    """Distance of a predicted point (or heatmap) to one or more GT points.

    Returns ``dist`` (to the mean GT point), ``min_dist`` and ``avg_dist``.
    """
    pts = np.asarray(gt_points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise ValidationError("dist needs at least one ground-truth point")
    p = np.asarray(pred, dtype=np.float64)
    if p.ndim == 2 and p.shape != (1, 2):
        p = np.asarray(heatmap_argmax_point(p))
    p = p.reshape(2)
    d = np.sqrt(((pts - p) ** 2).sum(axis=1))
    return {
        "dist": float(math.hypot(*(pts.mean(axis=0) - p))),
        "min_dist": float(d.min()),
        "avg_dist": float(d.mean()),
    }


def gt_binary_map(gt_points, shape) -> np.ndarray:
    h, w = shape
    out = np.zeros((h, w), dtype=np.int8)
    for x, y in np.asarray(gt_points, dtype=np.float64).reshape(-1, 2):
        out[min(int(y * h), h - 1), min(int(x * w), w - 1)] = 1
    return out


def resize_heatmap(heatmap, shape) -> np.ndarray:
    hm = np.asarray(heatmap, dtype=np.float64)
    if hm.shape == tuple(shape):
        return hm
    t = torch.from_numpy(hm)[None, None]
    return F.interpolate(t, size=tuple(shape), mode="bilinear", align_corners=False)[0, 0].numpy()


def auc(heatmap, gt_points, shape=None) -> float:
    """ROC AUC of heatmap cells against a binary map of the annotated cells."""
    shape = tuple(shape) if shape is not None else np.asarray(heatmap).shape
    hm = resize_heatmap(heatmap, shape)
    labels = gt_binary_map(gt_points, shape)
    return kernels.roc_auc(hm.ravel(), labels.ravel())
