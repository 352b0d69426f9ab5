import pytest
import torch

from conftest import random_inputs
from socialgaze.config import toy_config
from socialgaze.errors import ValidationError
from socialgaze.model import build_model
from socialgaze.model.interaction import block_layer_ranges
from socialgaze.model.layers import ResidualMLP, TransformerLayer


def test_output_shapes(toy_cfg):
    model = build_model(toy_cfg).eval()
    inp = random_inputs(toy_cfg, b=2, n=3, t=2)
    out = model(**inp)
    assert out.heatmaps.shape == (2, 3, 2, 8, 8)
    assert out.gaze_vectors.shape == (2, 3, 2, 2)
    assert out.inout.shape == (2, 3, 2)
    assert out.lah.shape == out.laeo.shape == out.sa.shape == (2, 3, 3, 2)
    assert ((out.heatmaps >= 0) & (out.heatmaps <= 1)).all()


def test_padded_slots_are_zero(toy_cfg):
    model = build_model(toy_cfg).eval()
    inp = random_inputs(toy_cfg, b=2, n=3, t=2)
    out = model(**inp)
    pad = ~inp["mask"]
    assert (out.heatmaps[pad] == 0).all() and (out.inout[pad] == 0).all()
    assert (out.gaze_vectors[pad] == 0).all()
    pm = out.pair_mask
    assert (out.lah[~pm] == 0).all() and (out.sa[~pm] == 0).all()
    # no self pairs
    assert (out.lah.diagonal(dim1=1, dim2=2) == 0).all()


def test_extra_padding_does_not_change_outputs(toy_cfg):
    model = build_model(toy_cfg).eval()
    inp = random_inputs(toy_cfg, b=1, n=2, t=2, pad=False)
    big = dict(inp)
    big["crops"] = torch.cat([inp["crops"], torch.rand_like(inp["crops"])], dim=1)
    big["boxes"] = torch.cat([inp["boxes"], inp["boxes"]], dim=1)
    big["mask"] = torch.cat([inp["mask"], torch.zeros_like(inp["mask"])], dim=1)
    with torch.no_grad():
        a, b = model(**inp), model(**big)
    assert (a.heatmaps - b.heatmaps[:, :2]).abs().max() < 1e-6
    assert (a.lah - b.lah[:, :2, :2]).abs().max() < 1e-6
    assert (a.sa - b.sa[:, :2, :2]).abs().max() < 1e-6


def test_person_isolation_without_social_paths():
    cfg = toy_config(**{"ablation.no_I_ppt": True, "ablation.no_I_ps": True})
    model = build_model(cfg).eval()
    inp = random_inputs(cfg, b=1, n=2, t=2, pad=False)
    alone = {k: (v[:, :1] if k in ("crops", "boxes", "mask") else v) for k, v in inp.items()}
    with torch.no_grad():
        a, b = model(**inp), model(**alone)
    assert (a.heatmaps[:, :1] - b.heatmaps).abs().max() < 1e-6  # batch shape changes reduction order


def test_static_matches_temporal_on_constant_clip():
    full = toy_config(**{"temporal.window": 3})
    static = toy_config(**{"temporal.window": 1, "ablation.static": True})
    m_full, m_static = build_model(full, seed=4).eval(), build_model(static, seed=4).eval()
    m_static.load_state_dict(m_full.state_dict())
    one = random_inputs(static, b=1, n=2, t=1, pad=False)
    rep = {k: (v.repeat_interleave(3, dim=1 if k == "frames" else 2) if v is not None else None)
           for k, v in one.items()}
    with torch.no_grad():
        a = m_static(**one)
        b = m_full(**rep)
    for t in range(3):
        assert (a.heatmaps[:, :, 0] - b.heatmaps[:, :, t]).abs().max() < 1e-5
        assert (a.lah[..., 0] - b.lah[..., t]).abs().max() < 1e-5
        assert (a.gaze_vectors[:, :, 0] - b.gaze_vectors[:, :, t]).abs().max() < 1e-5


def test_frame_tokens_computed_once_per_forward(toy_cfg):
    model = build_model(toy_cfg).eval()
    inp = random_inputs(toy_cfg, b=1, n=3, t=2)
    before = model.interaction.tokenizer.calls
    model(**inp)
    assert model.interaction.tokenizer.calls == before + 1


def test_zero_output_layer_is_identity():
    layer = TransformerLayer(16, 4, 2.0)
    layer.zero_output()
    x = torch.randn(3, 5, 16)
    assert torch.equal(layer(x), x)
    cross = TransformerLayer(16, 4, 2.0, cross=True)
    cross.zero_output()
    assert torch.equal(cross(x, torch.randn(3, 7, 16)), x)


def test_residual_mlp_depth():
    mlp = ResidualMLP(6, 8, 1, 5)
    assert len(mlp.hidden) == 3
    assert mlp(torch.randn(4, 6)).shape == (4, 1)
    with pytest.raises(ValueError):
        ResidualMLP(6, 8, 1, 1)


def test_block_layer_ranges():
    assert [list(r) for r in block_layer_ranges((2, 5, 8, 11), 12)] == [[0, 1], [2, 3, 4], [5, 6, 7], [8, 9, 10]]
    assert [list(r) for r in block_layer_ranges((2, 5, 8, 11), 12, "zero_based")] == \
        [[0, 1, 2], [3, 4, 5], [6, 7, 8], [9, 10, 11]]


def test_build_is_deterministic(toy_cfg):
    a, b = build_model(toy_cfg, seed=3), build_model(toy_cfg, seed=3)
    assert all(torch.equal(x, y) for x, y in zip(a.state_dict().values(), b.state_dict().values()))
    c = build_model(toy_cfg, seed=4)
    assert not all(torch.equal(x, y) for x, y in zip(a.state_dict().values(), c.state_dict().values()))


def test_speaking_scores_change_tokens():
    cfg = toy_config(**{"ablation.speaking": True})
    model = build_model(cfg).eval()
    inp = random_inputs(cfg, b=1, n=2, t=2, pad=False)
    with torch.no_grad():
        a = model(**inp)
        inp["speaking"] = inp["speaking"] + 0.5
        b = model(**inp)
    assert not torch.equal(a.lah, b.lah)


def test_input_validation(toy_cfg):
    model = build_model(toy_cfg)
    inp = random_inputs(toy_cfg, b=1, n=2, t=2, pad=False)
    bad = dict(inp, mask=torch.zeros_like(inp["mask"]))
    with pytest.raises(ValidationError):
        model(**bad)
    bad = dict(inp)
    bad["frames"] = inp["frames"].clone()
    bad["frames"][0, 0, 0, 0, 0] = float("nan")
    with pytest.raises(ValidationError):
        model(**bad)
    with pytest.raises(ValidationError):
        model(**dict(inp, speaking=torch.zeros(1, 2, 2)))
    with pytest.raises(ValidationError):
        model(**dict(inp, frames=inp["frames"][..., :16, :16]))
