import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from socialgaze.annotations.records import UnifiedFrameRecord, UnifiedPerson
from socialgaze.metrics import (
    ap_binary,
    ap_laeo,
    ap_lah,
    auc,
    decoder_laeo_binary,
    decoder_lah_targets,
    dist,
    evaluate,
    f1,
    f1_from_counts,
    f1_lah,
    heatmap_argmax_point,
    lah_counts,
    pp_social,
    zero_non_argmax,
)
from socialgaze.predictions import PredictionRecord


# -- dist ----------------------------------------------------------------------


def test_dist_examples():
    assert dist((0, 0), [(1, 1)])["dist"] == pytest.approx(math.sqrt(2), abs=1e-12)
    d = dist((0.5, 0.5), [(0.5, 0.6), (0.2, 0.2)])
    assert d["min_dist"] == pytest.approx(0.1, abs=1e-12)
    assert d["avg_dist"] == pytest.approx(0.26213, abs=1e-5)
    assert dist((0.3, 0.7), [(0.3, 0.7)])["dist"] == 0.0


def test_dist_accepts_heatmap():
    hm = np.zeros((4, 4))
    hm[1, 2] = 1.0
    assert dist(hm, [(0.625, 0.375)])["dist"] == pytest.approx(0.0)


def test_constant_heatmap_argmax_is_first_cell():
    assert heatmap_argmax_point(np.full((8, 8), 0.3)) == (0.0625, 0.0625)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=6),
       st.tuples(st.floats(0, 1), st.floats(0, 1)))
def test_min_dist_not_above_avg(points, pred):
    d = dist(pred, points)
    assert d["min_dist"] <= d["avg_dist"] + 1e-12


# -- auc -----------------------------------------------------------------------


def test_auc_examples():
    pts = [(0.1, 0.1), (0.6, 0.8)]
    from socialgaze.metrics import gt_binary_map

    perfect = gt_binary_map(pts, (10, 10)).astype(float)
    assert auc(perfect, pts) == 1.0
    assert auc(np.full((10, 10), 0.2), pts) == 0.5


def test_auc_resizes_to_grid():
    hm = np.zeros((4, 4))
    hm[0, 0] = 1.0
    # bilinear upsampling keeps the peak in the top-left region
    assert auc(hm, [(0.05, 0.05)], shape=(16, 16)) > 0.9


# -- ap ------------------------------------------------------------------------


def test_ap_binary_examples():
    assert ap_binary([0.9, 0.1], [1, 0]) == 1.0
    assert ap_binary([0.1, 0.9], [1, 0]) == 0.5
    assert ap_binary([0.3, 0.2, 0.7], [1, 1, 1]) == 1.0
    assert math.isnan(ap_binary([0.3], [0]))


def test_ap_lah_examples():
    assert ap_lah([[0.1, 0.2, 0.9], [0.1, 0.3, 0.2, 0.8], [0.4, 0.1]], [2, 1, None]) == 0.5
    assert ap_lah([[0.1, 0.7], [0.9, 0.2]], [1, 0]) == 1.0
    assert ap_lah([[0.9, 0.1]], [1]) == 0.0


def test_ap_laeo_examples():
    s = np.array([[0, 0.8], [0.8, 0]])
    assert ap_laeo([(s, np.array([[-1, 1], [1, -1]]))]) == 1.0
    s = np.array([[0, 0.9, 0.7], [0.9, 0, 0.1], [0.7, 0.1, 0]])
    lab = np.array([[-1, 1, 0], [1, -1, 0], [0, 0, -1]])
    z = zero_non_argmax(s)
    assert (z[0, 1], z[0, 2], z[1, 2]) == (0.9, 0.7, 0.0)
    assert ap_laeo([(s, lab)]) == 1.0
    # with both-endpoint retention the (1,3) pair is dropped as well
    assert zero_non_argmax(s, keep="both")[0, 2] == 0.0


def test_ap_laeo_positive_zeroed_on_both_sides_costs_recall():
    s = np.array([[0, 0.2, 0.9, 0.8], [0.2, 0, 0.8, 0.9], [0.9, 0.8, 0, 0.1], [0.8, 0.9, 0.1, 0]])
    lab = np.zeros((4, 4), dtype=int)
    lab[0, 1] = lab[1, 0] = 1
    np.fill_diagonal(lab, -1)
    assert ap_laeo([(s, lab)]) < 1.0


def test_ap_laeo_ignores_padded_persons():
    s = np.array([[0, 0.8, 0.95], [0.8, 0, 0.95], [0.95, 0.95, 0]])
    lab = np.array([[-1, 1, 0], [1, -1, 0], [0, 0, -1]])
    valid = np.array([True, True, False])
    assert ap_laeo([(s, lab, valid)]) == 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_ap_lah_monotone_invariance(seed):
    rng = np.random.default_rng(seed)
    cands = [rng.random(int(rng.integers(1, 5))) for _ in range(20)]
    gts = [None if rng.random() < 0.4 else int(rng.integers(len(c))) for c in cands]
    base = ap_lah(cands, gts)
    for fn in (lambda x: x**3, lambda x: np.exp(5 * x) - 2, lambda x: 0.3 * x + 7):
        got = ap_lah([fn(c) for c in cands], gts)
        assert got == pytest.approx(base, abs=1e-12) or (math.isnan(got) and math.isnan(base))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_unknown_samples_never_change_metrics(seed):
    rng = np.random.default_rng(seed)
    s = rng.random(30)
    lab = rng.integers(0, 2, 30)
    lab[0] = 1
    extra = rng.random(10)
    assert ap_binary(np.r_[s, extra], np.r_[lab, -np.ones(10, int)]) == ap_binary(s, lab)
    cands = [rng.random(3) for _ in range(10)]
    gts = [int(rng.integers(3)) for _ in range(10)]
    assert ap_lah(cands + [rng.random(3)], gts + ["unknown"]) == ap_lah(cands, gts)
    assert lah_counts([1, None], [1, "unknown"]) == lah_counts([1], [1])


def test_ap_matches_oracle_on_small_cases(rng):
    for _ in range(50):
        s = rng.random(12).round(1)
        lab = rng.integers(0, 2, 12)
        assert ap_binary(s, lab) == pytest.approx(oracles.ap_binary_oracle(s.tolist(), lab.tolist()), abs=1e-12) \
            or not lab.any()


# -- social --------------------------------------------------------------------


def test_f1_examples():
    assert f1_from_counts(1, 1, 1) == 0.5
    assert f1([1, 0, 1], [1, 0, 1]) == 1.0
    assert f1([0, 0, 0], [1, 0, 1]) == 0.0
    assert math.isnan(f1_from_counts(0, 0, 0))
    assert f1([1, 1], [1, -1]) == 1.0


def test_f1_lah_needs_target_identity():
    # right looker, wrong target: one FP and one FN
    assert lah_counts([2], [3]) == (0, 1, 1)
    assert f1_lah([2, None, 1], [2, None, 1]) == 1.0


def test_pp_social_examples():
    boxes = [(0.1, 0.1, 0.3, 0.3), (0.6, 0.6, 0.8, 0.8), (0.0, 0.8, 0.1, 0.9)]
    pts = [(0.7, 0.7), (0.2, 0.2), (0.5, 0.05)]
    r = pp_social(pts, boxes, 0.1)
    assert r["lah"].tolist() == [1, 0, -1]
    assert r["laeo"][0, 1] and r["laeo"][1, 0] and not r["laeo"][0, 2]
    r = pp_social([(0.5, 0.5), (0.5, 0.55), (0.9, 0.1)], boxes, 0.1)
    assert r["sa"][0, 1] and not r["sa"][0, 2] and not r["sa"][0, 0]
    assert r["lah"].tolist() == [-1, -1, -1]


def test_decoder_thresholding():
    s = np.array([[0, 0.7, 0.2], [0.4, 0, 0.3], [0.1, 0.9, 0]])
    assert decoder_lah_targets(s) == [1, None, 1]
    b = decoder_laeo_binary(np.minimum(s, s.T))
    assert not b.any()


# -- report --------------------------------------------------------------------


def _record(ds="vat"):
    persons = [UnifiedPerson(1, (0.1, 0.1, 0.3, 0.3), (0.7, 0.7), "in", "native"),
               UnifiedPerson(2, (0.6, 0.6, 0.8, 0.8), (0.2, 0.2), "in", "native"),
               UnifiedPerson(3, (0.0, 0.8, 0.1, 0.9), None, None, None)]
    return UnifiedFrameRecord(ds, "c", 0, persons, {1: 2, 2: 1}, {(1, 2)}, {(1, 3), (2, 3)}, set(),
                              {(1, 3), (2, 3)})


def _perfect_pred(rec):
    lah = np.zeros((3, 3))
    lah[0, 1] = lah[1, 0] = 0.9
    return PredictionRecord(rec.dataset, rec.clip_id, rec.frame_idx, [1, 2, 3],
                            np.array([[0.7, 0.7], [0.2, 0.2], [0.5, 0.5]]), np.array([0.9, 0.9, 0.1]),
                            lah, np.minimum(lah, lah.T), np.zeros((3, 3)))


def test_evaluate_perfect_frame():
    rec = _record()
    rep = evaluate([_perfect_pred(rec)], [rec])
    row = rep.rows["all"]
    assert row["dist"] == 0.0 and row["f1_lah"] == 1.0 and row["f1_laeo"] == 1.0
    assert row["ap_lah"] == 1.0 and row["ap_laeo"] == 1.0
    assert set(rep.rows) == {"vat", "all"}
    pp = evaluate([_perfect_pred(rec)], [rec], post_process=True).rows["all"]
    assert pp["f1_lah"] == 1.0 and pp["f1_laeo"] == 1.0
    assert "dist" in rep.format_table()
    assert '"all"' in rep.dumps()


def test_evaluate_rejects_disjoint_inputs():
    from socialgaze.errors import ValidationError

    rec = _record()
    pred = _perfect_pred(rec)
    pred.frame_idx = 9
    with pytest.raises(ValidationError):
        evaluate([pred], [rec])
