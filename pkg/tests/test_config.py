import pytest

from socialgaze.config import ConfigError, RunConfig, toy_config


def test_overrides_coerce_types():
    cfg = RunConfig().apply_overrides(["optim.lr=0.01", "model.vit_splits = 3,6,9,12", "ablation.static=true"])
    assert cfg.optim.lr == 0.01
    assert tuple(cfg.model.vit_splits) == (3, 6, 9, 12)
    assert cfg.ablation.static is True


@pytest.mark.parametrize("item", ["nope=1", "model.nope=1", "model=1", "optim.lr.x=2", "no_equals_sign"])
def test_unknown_or_malformed_overrides(item):
    with pytest.raises(ConfigError):
        RunConfig().apply_overrides([item])


def test_bad_value_type():
    with pytest.raises(ConfigError):
        RunConfig().apply_overrides(["optim.steps=many"])


def test_dump_load_roundtrip(tmp_path):
    cfg = toy_config(**{"optim.lr": 3e-4, "loss.sa": 0.5})
    path = tmp_path / "run.cfg"
    path.write_text("# comment\n\n" + cfg.dumps())
    back = RunConfig.load(path)
    assert back.to_flat() == cfg.to_flat()
    assert back.config_hash() == cfg.config_hash()
    assert RunConfig.from_flat(cfg.to_flat()).config_hash() == cfg.config_hash()


def test_hash_tracks_content():
    a, b = toy_config(), toy_config()
    assert a.config_hash() == b.config_hash()
    b.optim.lr *= 2
    assert a.config_hash() != b.config_hash()


def test_load_reports_bad_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("seed = 1\nnot a pair\n")
    with pytest.raises(ConfigError, match=":2:"):
        RunConfig.load(path)


@pytest.mark.parametrize("pairs", [
    {"model.vit_splits": (5, 3)},
    {"model.image_size": 33},
    {"temporal.window": 0},
    {"sampling.max_people": 0},
    {"loss.hm": -1.0},
    {"eval.laeo_keep": "either"},
    {"dtype": "float16"},
])
def test_validation_errors(pairs):
    with pytest.raises(ConfigError):
        toy_config(**pairs)


def test_default_config_is_valid():
    RunConfig().validate()
