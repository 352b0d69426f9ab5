"""Pure-Python reference versions of the compiled kernels.

Inputs are pre-sorted / pre-validated by :mod:`socialgaze.kernels`; these
functions only loop.
"""

import math

import numpy as np


def ap_sweep(scores, labels, n_pos):
    if n_pos <= 0:
        return math.nan
    scores = scores.tolist()
    labels = labels.tolist()
    n = len(scores)
    tp = fp = 0.0
    prev_recall = ap = 0.0
    i = 0
    while i < n:
        s = scores[i]
        while i < n and scores[i] == s:
            if labels[i]:
                tp += 1.0
            else:
                fp += 1.0
            i += 1
        recall = tp / n_pos
        ap += (recall - prev_recall) * (tp / (tp + fp))
        prev_recall = recall
    return ap


def roc_auc_sweep(scores, labels):
    scores = scores.tolist()
    labels = labels.tolist()
    n_pos = float(sum(1 for v in labels if v))
    n_neg = float(len(labels)) - n_pos
    if n_pos == 0.0 or n_neg == 0.0:
        return math.nan
    n = len(scores)
    tp = fp = tp_prev = fp_prev = area = 0.0
    i = 0
    while i < n:
        s = scores[i]
        while i < n and scores[i] == s:
            if labels[i]:
                tp += 1.0
            else:
                fp += 1.0
            i += 1
        area += (fp - fp_prev) * (tp + tp_prev) * 0.5
        tp_prev, fp_prev = tp, fp
    return area / (n_pos * n_neg)


def containing_box(points, boxes, exclude):
    boxes_l = boxes.tolist()
    out = np.full(len(points), -1, dtype=np.int64)
    for i, (px, py) in enumerate(points.tolist()):
        best, best_d = -1, 0.0
        skip = int(exclude[i])
        for j, (x0, y0, x1, y1) in enumerate(boxes_l):
            if j == skip:
                continue
            if px < x0 or px > x1 or py < y0 or py > y1:
                continue
            cx = 0.5 * (x0 + x1) - px
            cy = 0.5 * (y0 + y1) - py
            d = cx * cx + cy * cy
            if best < 0 or d < best_d:
                best, best_d = j, d
        out[i] = best
    return out


def iou_matrix(a, b):
    out = np.zeros((len(a), len(b)), dtype=np.float64)
    b_l = b.tolist()
    for i, (ax0, ay0, ax1, ay1) in enumerate(a.tolist()):
        area_a = (ax1 - ax0) * (ay1 - ay0)
        for j, (bx0, by0, bx1, by1) in enumerate(b_l):
            iw = min(ax1, bx1) - max(ax0, bx0)
            ih = min(ay1, by1) - max(ay0, by0)
            if iw <= 0.0 or ih <= 0.0:
                continue
            inter = iw * ih
            union = area_a + (bx1 - bx0) * (by1 - by0) - inter
            if union > 0.0:
                out[i, j] = inter / union
    return out
