# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels. Mirrors ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport NAN

cnp.import_array()


def ap_sweep(const double[::1] scores, const cnp.int8_t[::1] labels, long n_pos):
    cdef Py_ssize_t n = scores.shape[0]
    cdef Py_ssize_t i = 0
    cdef double tp = 0.0, fp = 0.0, prev_recall = 0.0, ap = 0.0
    cdef double s, recall
    if n_pos <= 0:
        return NAN
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


def roc_auc_sweep(const double[::1] scores, const cnp.int8_t[::1] labels):
    cdef Py_ssize_t n = scores.shape[0]
    cdef Py_ssize_t i = 0
    cdef double n_pos = 0.0, n_neg = 0.0
    cdef double tp = 0.0, fp = 0.0, tp_prev = 0.0, fp_prev = 0.0, area = 0.0
    cdef double s
    for i in range(n):
        if labels[i]:
            n_pos += 1.0
        else:
            n_neg += 1.0
    if n_pos == 0.0 or n_neg == 0.0:
        return NAN
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
        tp_prev = tp
        fp_prev = fp
    return area / (n_pos * n_neg)


def containing_box(const double[:, ::1] points, const double[:, ::1] boxes,
                   const long[::1] exclude):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t m = boxes.shape[0]
    cdef Py_ssize_t i, j
    cdef long best
    cdef double px, py, cx, cy, d, best_d
    out = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] res = out
    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        best = -1
        best_d = 0.0
        for j in range(m):
            if j == exclude[i]:
                continue
            if px < boxes[j, 0] or px > boxes[j, 2] or py < boxes[j, 1] or py > boxes[j, 3]:
                continue
            cx = 0.5 * (boxes[j, 0] + boxes[j, 2]) - px
            cy = 0.5 * (boxes[j, 1] + boxes[j, 3]) - py
            d = cx * cx + cy * cy
            if best < 0 or d < best_d:
                best = j
                best_d = d
        res[i] = best
    return out


def iou_matrix(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i, j
    cdef double iw, ih, inter, ua
    out = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] res = out
    for i in range(n):
        for j in range(m):
            iw = min(a[i, 2], b[j, 2]) - max(a[i, 0], b[j, 0])
            ih = min(a[i, 3], b[j, 3]) - max(a[i, 1], b[j, 1])
            if iw <= 0.0 or ih <= 0.0:
                continue
            inter = iw * ih
            ua = ((a[i, 2] - a[i, 0]) * (a[i, 3] - a[i, 1])
                  + (b[j, 2] - b[j, 0]) * (b[j, 3] - b[j, 1]) - inter)
            if ua > 0.0:
                res[i, j] = inter / ua
    return out
