import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialgaze import kernels

BACKENDS = kernels.available_backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_env_var_forces_fallback():
    env = dict(os.environ, SOCIALGAZE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from socialgaze import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


scores_labels = st.integers(0, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
    )
)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
@settings(max_examples=200, deadline=None)
@given(scores_labels, st.integers(0, 5))
def test_backends_agree_on_sweeps(data, extra):
    s, l = np.array(data[0]), np.array(data[1], dtype=np.int8)
    n_pos = int(l.sum()) + extra
    a = kernels.ap_sweep(s, l, n_pos, backend="python")
    b = kernels.ap_sweep(s, l, n_pos, backend="cython")
    assert a == b or (np.isnan(a) and np.isnan(b))
    a = kernels.roc_auc(s, l, backend="python")
    b = kernels.roc_auc(s, l, backend="cython")
    assert a == b or (np.isnan(a) and np.isnan(b))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree_on_geometry(rng):
    c = rng.random((30, 2))
    boxes = np.concatenate([c - 0.1, c + 0.1], axis=1)
    pts = rng.random((200, 2))
    excl = rng.integers(-1, 30, 200)
    assert np.array_equal(kernels.containing_box(pts, boxes, excl, backend="python"),
                          kernels.containing_box(pts, boxes, excl, backend="cython"))
    assert np.array_equal(kernels.iou_matrix(boxes, boxes[:7], backend="python"),
                          kernels.iou_matrix(boxes, boxes[:7], backend="cython"))


@pytest.mark.parametrize("backend", BACKENDS)
def test_iou_examples(backend):
    m = kernels.iou_matrix([[0, 0, 0.5, 0.5]], [[0.25, 0.25, 0.75, 0.75], [0, 0, 0.5, 0.5], [0.6, 0.6, 1, 1]],
                           backend=backend)
    assert m[0, 0] == pytest.approx(1 / 7, abs=1e-15)
    assert m[0, 1] == 1.0
    assert m[0, 2] == 0.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_containment_closed_and_nearest_center(backend):
    boxes = np.array([[0.4, 0.4, 0.6, 0.6], [0.0, 0.0, 1.0, 1.0], [0.6, 0.6, 0.8, 0.8]])
    # boundary point counts as inside; nested boxes -> nearest centre wins
    got = kernels.containing_box([[0.6, 0.6], [0.5, 0.5], [0.95, 0.05]], boxes, backend=backend)
    assert got.tolist() == [0, 0, 1]
    # self exclusion
    got = kernels.containing_box([[0.5, 0.5]], boxes, [0], backend=backend)
    assert got.tolist() == [1]
    got = kernels.containing_box([[0.5, 0.5]], boxes[:1], [0], backend=backend)
    assert got.tolist() == [-1]


@pytest.mark.parametrize("backend", BACKENDS)
def test_equal_center_distance_takes_lowest_index(backend):
    boxes = np.array([[0.4, 0.4, 0.6, 0.6], [0.3, 0.3, 0.7, 0.7]])
    assert kernels.containing_box([[0.5, 0.5]], boxes, backend=backend).tolist() == [0]
