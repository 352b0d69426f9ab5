"""Average precision, including the argmax-assignment protocols for LAH and LAEO."""

from __future__ import annotations

import math

import numpy as np

from .. import kernels


def ap_binary(scores, labels) -> float:
    """All-points AP; tied scores share one operating point. NaN without positives.

    ``labels`` entries < 0 (unknown) are dropped.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    l = np.asarray(labels).ravel().astype(np.int64)
    keep = l >= 0
    s, l = s[keep], l[keep]
    return kernels.ap_sweep(s, l, int((l == 1).sum()))


def lah_detections(candidate_scores, gt_targets):
    """One detection per looker from the argmax-assignment rule.

    ``candidate_scores[k]`` holds sample k's scores over its candidate
    targets; ``gt_targets[k]`` is the index of the true target, ``None`` for
    a negative, or ``"unknown"`` (skipped). Returns ``(scores, is_tp, n_pos)``;
    positives whose argmax is wrong never become detections (they stay false
    negatives at every threshold).
    """
    scores, tps = [], []
    n_pos = 0
    for cand, gt in zip(candidate_scores, gt_targets):
        if isinstance(gt, str):
            continue
        cand = np.asarray(cand, dtype=np.float64).ravel()
        if gt is not None:
            n_pos += 1
        if cand.size == 0:
            continue
        j = int(np.argmax(cand))
        if gt is None:
            scores.append(cand[j])
            tps.append(0)
        elif j == gt:
            scores.append(cand[j])
            tps.append(1)
    return np.asarray(scores, dtype=np.float64), np.asarray(tps, dtype=np.int8), n_pos


def ap_lah(candidate_scores, gt_targets) -> float:
    s, tp, n_pos = lah_detections(candidate_scores, gt_targets)
    return kernels.ap_sweep(s, tp, n_pos) if n_pos else math.nan


def argmax_partners(scores, valid=None) -> np.ndarray:
    """Per person, the index of the highest-scoring other valid person (or -1)."""
    s = np.asarray(scores, dtype=np.float64)
    n = s.shape[0]
    valid = np.ones(n, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    out = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        if not valid[i]:
            continue
        cand = np.where(valid & (np.arange(n) != i), s[i], -np.inf)
        if np.isfinite(cand).any():
            out[i] = int(np.argmax(cand))
    return out


def zero_non_argmax(scores, valid=None, keep: str = "one") -> np.ndarray:
    """Zero every pair score that is not an endpoint's argmax partner.

    ``keep="one"`` retains a pair when it is the argmax of either endpoint,
    ``keep="both"`` only when it is the argmax of both.
    """
    s = np.asarray(scores, dtype=np.float64)
    best = argmax_partners(s, valid)
    n = s.shape[0]
    idx = np.arange(n)
    hit = np.zeros((n, n), dtype=bool)
    ok = best >= 0
    hit[idx[ok], best[ok]] = True
    kept = (hit | hit.T) if keep == "one" else (hit & hit.T)
    return np.where(kept, s, 0.0)


def laeo_pairs(scores, labels, valid=None, keep: str = "one"):
    """Unordered-pair scores after zeroing, with their labels (unknown dropped)."""
    z = zero_non_argmax(scores, valid, keep)
    lab = np.asarray(labels)
    n = z.shape[0]
    valid = np.ones(n, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    iu, ju = np.triu_indices(n, 1)
    sel = valid[iu] & valid[ju] & (lab[iu, ju] >= 0)
    return z[iu, ju][sel], lab[iu, ju][sel].astype(np.int64)


def ap_laeo(frames, keep: str = "one") -> float:
    """AP over LAEO pairs pooled across frames.

    ``frames`` is a list of ``(scores [N, N], labels [N, N])`` or
    ``(scores, labels, valid)`` tuples; a bare pair of arrays is one frame.
    """
    if isinstance(frames, tuple) and len(frames) in (2, 3) and np.ndim(frames[0]) == 2:
        frames = [frames]
    all_s, all_l = [], []
    for fr in frames:
        s, l = laeo_pairs(*fr[:2], fr[2] if len(fr) > 2 else None, keep=keep)
        all_s.append(s)
        all_l.append(l)
    if not all_s:
        return math.nan
    return ap_binary(np.concatenate(all_s), np.concatenate(all_l))
