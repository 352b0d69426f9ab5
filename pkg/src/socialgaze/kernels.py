"""Backend selection for the scalar kernels.

The compiled extension is used when it imports; set
``SOCIALGAZE_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

import os

import numpy as np

from . import _pykernels

if os.environ.get("SOCIALGAZE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

_BACKENDS = {"python": _pykernels}
if BACKEND == "cython":
    _BACKENDS["cython"] = _impl


def available_backends():
    return tuple(_BACKENDS)


def _get(backend):
    return _impl if backend is None else _BACKENDS[backend]


def sort_desc(scores, labels):
    """Stable descending sort, returned as contiguous float64 / int8 arrays."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel().astype(np.int8)
    order = np.argsort(-scores, kind="stable")
    return np.ascontiguousarray(scores[order]), np.ascontiguousarray(labels[order])


def ap_sweep(scores, labels, n_pos, backend=None):
    """All-points AP over detections ``(scores, labels)`` against ``n_pos`` positives.

    Tied scores form a single operating point.
    """
    s, l = sort_desc(scores, labels)
    return float(_get(backend).ap_sweep(s, l, int(n_pos)))


def roc_auc(scores, labels, backend=None):
    s, l = sort_desc(scores, labels)
    return float(_get(backend).roc_auc_sweep(s, l))


def containing_box(points, boxes, exclude=None, backend=None):
    """Index of the box containing each point (closed interval), else -1.

    Several containing boxes resolve to the one whose center is nearest the
    point, lowest index on exact ties. ``exclude[i]`` names a box index never
    assigned to point ``i`` (its own head), or -1.
    """
    points = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 2))
    boxes = np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    if exclude is None:
        exclude = np.full(len(points), -1, dtype=np.int64)
    exclude = np.ascontiguousarray(np.asarray(exclude, dtype=np.int64).reshape(-1))
    return _get(backend).containing_box(points, boxes, exclude)


def iou_matrix(a, b, backend=None):
    a = np.ascontiguousarray(np.asarray(a, dtype=np.float64).reshape(-1, 4))
    b = np.ascontiguousarray(np.asarray(b, dtype=np.float64).reshape(-1, 4))
    return _get(backend).iou_matrix(a, b)
