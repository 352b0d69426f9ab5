import numpy as np
import pytest
import torch

from conftest import random_inputs
from socialgaze.config import toy_config
from socialgaze.errors import ValidationError
from socialgaze.model import build_model
from socialgaze.training import (
    LAH_NEGATIVE,
    LAH_UNKNOWN,
    TERMS,
    effective_weights,
    empty_targets,
    loss_total,
    sample_people,
    synth_gt_heatmap,
    synth_gt_vector,
    warmup_cosine,
)
from socialgaze.training.losses import combine


def test_heatmap_examples():
    hm = synth_gt_heatmap((0.5, 0.5), (64, 64))
    assert np.unravel_index(hm.argmax(), hm.shape) == (32, 32) and hm.max() == 1.0
    assert abs(hm.sum() - 2 * np.pi * 9) / (2 * np.pi * 9) < 0.01
    corner = synth_gt_heatmap((0.0, 0.0), (64, 64))
    assert corner[0, 0] == 1.0 and corner.sum() < hm.sum()
    with pytest.raises(ValidationError):
        synth_gt_heatmap((1.2, 0.5))


def test_vector_examples():
    assert synth_gt_vector((0.4, 0.4, 0.6, 0.6), (0.5, 0.25)) == pytest.approx((0.0, -1.0))
    assert synth_gt_vector((0.2, 0.2, 0.3, 0.3), (0.75, 0.25)) == pytest.approx((1.0, 0.0))
    assert synth_gt_vector((0.4, 0.4, 0.6, 0.6), (0.5, 0.5)) is None


def _targets_matching(out):
    """Targets the given output already satisfies up to the BCE clamp."""
    b, n, t = out.person_mask.shape
    tg = empty_targets(b, n, t, out.heatmaps.shape[-2:], out.heatmaps.dtype)
    tg.heatmaps = out.heatmaps.detach().clone()
    tg.heatmap_valid = out.person_mask.clone()
    tg.vectors = out.gaze_vectors.detach().clone()
    tg.vector_valid = out.person_mask.clone()
    tg.inout = (out.inout > 0.5).to(out.inout.dtype)
    tg.inout_valid = out.person_mask.clone()
    return tg


def test_perfect_predictions_stay_below_clamp_floor():
    # float64: at float32, 1 - 1e-7 rounds to 1 - 2**-23
    cfg = toy_config(dtype="float64")
    model = build_model(cfg)
    out = model(**random_inputs(cfg, b=1, n=2, t=2, pad=False, dtype=torch.float64))
    out.inout = out.inout.detach().round()
    out.lah = torch.zeros_like(out.lah)
    out.lah[0, 0, 1] = 1.0
    out.sa = torch.zeros_like(out.sa)
    tg = _targets_matching(out)
    tg.lah[0, 0] = 1
    tg.lah[0, 1] = LAH_NEGATIVE
    tg.sa[0, 0, 1] = tg.sa[0, 1, 0] = 0
    _, terms = loss_total(out, tg, cfg.loss)
    eps = cfg.loss.bce_eps
    for name in TERMS:
        assert float(terms[name].detach()) <= eps * 1.01, name


def test_total_is_weighted_sum():
    cfg = toy_config()
    ones = {k: torch.tensor(1.0) for k in TERMS}
    assert float(combine(ones, cfg.loss)) == 1007.0
    w = effective_weights(cfg.loss, cfg.ablation)
    assert w == {"hm": 1000.0, "vec": 3.0, "lah": 1.0, "sa": 1.0, "io": 2.0}


def test_empty_terms_are_zero_not_nan():
    cfg = toy_config()
    model = build_model(cfg)
    out = model(**random_inputs(cfg, b=1, n=2, t=2))
    tg = empty_targets(1, 2, 2, (8, 8))
    with torch.no_grad():
        total, terms = loss_total(out, tg, cfg.loss)
    assert float(total) == 0.0 and all(float(v) == 0.0 for v in terms.values())


def test_zero_weight_makes_loss_blind_to_predictions():
    cfg = toy_config(**{"loss.sa": 0.0})
    model = build_model(cfg)
    out = model(**random_inputs(cfg, b=1, n=3, t=2, pad=False))
    tg = _targets_matching(out)
    tg.sa[:] = 1
    a, _ = loss_total(out, tg, cfg.loss)
    out.sa = torch.rand_like(out.sa)
    b, _ = loss_total(out, tg, cfg.loss)
    assert float(a.detach()) == float(b.detach())


def test_loss_term_bounds():
    cfg = toy_config()
    model = build_model(cfg)
    out = model(**random_inputs(cfg, b=2, n=3, t=2))
    tg = _targets_matching(out)
    tg.vectors = -tg.vectors
    tg.heatmaps = torch.rand_like(tg.heatmaps)
    tg.lah[:] = LAH_NEGATIVE
    tg.sa[:] = 1
    with torch.no_grad():
        _, terms = loss_total(out, tg, cfg.loss)
    assert 0 <= float(terms["vec"]) <= 2
    assert all(float(terms[k]) >= 0 for k in TERMS)


def test_unknown_lah_rows_are_masked():
    cfg = toy_config()
    model = build_model(cfg)
    out = model(**random_inputs(cfg, b=1, n=2, t=2, pad=False))
    tg = empty_targets(1, 2, 2, (8, 8))
    tg.lah[:] = LAH_UNKNOWN
    with torch.no_grad():
        _, terms = loss_total(out, tg, cfg.loss)
    assert float(terms["lah"]) == 0.0


def test_sample_people():
    assert sample_people([3, 5], 4, np.random.default_rng(0)) == [3, 5, None, None]
    a = sample_people(list(range(6)), 4, np.random.default_rng(7))
    b = sample_people(list(range(6)), 4, np.random.default_rng(7))
    assert a == b and len(a) == 4 and len(set(a)) == 4
    assert sample_people(list(range(6)), 4, train=False) == list(range(6))
    with pytest.raises(ValueError):
        sample_people([], 4)


def test_warmup_cosine():
    total = 100
    assert warmup_cosine(0, total) == 0.0
    assert warmup_cosine(5, total) == pytest.approx(1.0)
    assert warmup_cosine(2, total) == pytest.approx(0.4)
    assert warmup_cosine(100, total) == pytest.approx(0.01)
    vals = [warmup_cosine(s, total) for s in range(5, 101)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
