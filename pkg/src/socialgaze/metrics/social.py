"""Post-processing social gaze from gaze points, and F1 scoring."""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from .ap import argmax_partners, zero_non_argmax


def pp_social(points, boxes, sa_threshold: float = 0.10, valid=None) -> dict:
    """Social labels read off predicted gaze points and head boxes.

    Returns ``lah`` (target index per person, -1 for none), boolean ``laeo``
    and ``sa`` matrices and the pairwise gaze-point ``sa_distance``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    bxs = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    n = len(pts)
    valid = np.ones(n, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    # invalid persons can neither look nor be looked at
    far = np.where(valid[:, None], bxs, np.array([2.0, 2.0, 3.0, 3.0]))
    lah = kernels.containing_box(pts, far, np.arange(n))
    lah[~valid] = -1
    laeo = np.zeros((n, n), dtype=bool)
    for i in range(n):
        j = lah[i]
        if j >= 0 and lah[j] == i:
            laeo[i, j] = laeo[j, i] = True
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    pair_ok = valid[:, None] & valid[None] & ~np.eye(n, dtype=bool)
    sa = (d <= sa_threshold) & pair_ok
    return {"lah": lah, "laeo": laeo, "sa": sa, "sa_distance": d}


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    if tp + fp + fn == 0:
        return math.nan
    return 2.0 * tp / (2.0 * tp + fp + fn)


def f1(pred, gt) -> float:
    """F1 for binary predictions; entries with ``gt < 0`` are unknown and dropped."""
    p = np.asarray(pred).astype(bool).ravel()
    g = np.asarray(gt).astype(np.int64).ravel()
    keep = g >= 0
    p, g = p[keep], g[keep] == 1
    return f1_from_counts(int((p & g).sum()), int((p & ~g).sum()), int((~p & g).sum()))


def lah_counts(pred_targets, gt_targets):
    """TP/FP/FN where a hit needs the right target identity.

    Targets are ints or ``None``; ``"unknown"`` ground truth is skipped. A
    positive prediction at the wrong target is both a FP and a FN.
    """
    tp = fp = fn = 0
    for p, g in zip(pred_targets, gt_targets):
        if isinstance(g, str):
            continue
        if p is not None and p == g:
            tp += 1
            continue
        if p is not None:
            fp += 1
        if g is not None:
            fn += 1
    return tp, fp, fn


def f1_lah(pred_targets, gt_targets) -> float:
    return f1_from_counts(*lah_counts(pred_targets, gt_targets))


def decoder_lah_targets(scores, valid=None, threshold: float = 0.5):
    """Argmax partner per person, kept only when its score reaches ``threshold``."""
    s = np.asarray(scores, dtype=np.float64)
    best = argmax_partners(s, valid)
    out = []
    for i, j in enumerate(best):
        out.append(int(j) if j >= 0 and s[i, j] >= threshold else None)
    return out


def decoder_laeo_binary(scores, valid=None, threshold: float = 0.5, keep: str = "one"):
    return zero_non_argmax(scores, valid, keep) >= threshold
