"""Run configuration: nested dataclasses addressed by flat dotted keys.

Config files are plain ``key = value`` lines (``#`` starts a comment)::

    model.dim = 32
    model.vit_splits = 1,2
    ablation.static = true

Unknown keys are errors. Command-line overrides use the same syntax.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError


class ConfigError(ValidationError):
    """Raised for malformed or inconsistent configuration."""


@dataclass
class ModelConfig:
    dim: int = 768
    heads: int = 12
    gaze_dim: int = 512
    gaze_heads: int = 8
    ms_dim: int = 64
    image_size: int = 224
    patch: int = 16
    vit_depth: int = 12
    vit_splits: tuple[int, ...] = (2, 5, 8, 11)
    # "one_based": block b runs layers (l_{b-1}, l_b] counted from 1, l_0 = 0.
    # "zero_based": split values are 0-based indices, so every layer is used.
    vit_split_mode: str = "one_based"
    mlp_ratio: float = 4.0
    backbone: str = "resnet18"
    crop_size: int = 224
    toy_backbone_width: int = 16
    freeze_backbone: bool = False
    max_frames: int = 16
    heatmap_size: tuple[int, int] = (64, 64)
    dpt_scales: tuple[float, ...] = (4.0, 2.0, 1.0, 0.5)
    dpt_channels: tuple[int, ...] = (96, 192, 384, 768)
    dpt_features: int = 256
    decoder_hidden: int = 256

    @property
    def blocks(self) -> int:
        return len(self.vit_splits)


@dataclass
class TemporalConfig:
    window: int = 5
    stride: int = 3


@dataclass
class SamplingConfig:
    max_people: int = 4


@dataclass
class LossConfig:
    hm: float = 1000.0
    vec: float = 3.0
    io: float = 2.0
    lah: float = 1.0
    sa: float = 1.0
    positive_weight: float = 2.0
    bce_eps: float = 1e-7
    heatmap_sigma: float = 3.0


@dataclass
class OptimConfig:
    lr: float = 1e-4
    lr_stage2: float = 3e-6
    weight_decay: float = 0.05
    warmup_frac: float = 0.05
    min_lr_frac: float = 0.01
    epochs: int = 20
    batch_size: int = 8
    # >0 overrides epochs with a fixed number of optimizer steps
    steps: int = 0
    grad_clip: float = 0.0


@dataclass
class AblationConfig:
    no_I_ps: bool = False
    no_I_sp: bool = False
    no_I_ppt: bool = False
    no_social_loss: bool = False
    no_gf_loss: bool = False
    static: bool = False
    speaking: bool = False


@dataclass
class EvalConfig:
    sa_threshold: float = 0.10
    decoder_threshold: float = 0.5
    # "one": keep a LAEO pair if it is the argmax of either endpoint; "both": of both
    laeo_keep: str = "one"
    auc_grid: tuple[int, int] = (64, 64)


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    temporal: TemporalConfig = field(default_factory=TemporalConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)
    ablation: AblationConfig = field(default_factory=AblationConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    seed: int = 0
    dtype: str = "float32"

    # -- flat views ---------------------------------------------------------
    def to_flat(self) -> dict[str, typing.Any]:
        out: dict[str, typing.Any] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                for sub in dataclasses.fields(value):
                    out[f"{f.name}.{sub.name}"] = _plain(getattr(value, sub.name))
            else:
                out[f.name] = _plain(value)
        return out

    def set(self, key: str, raw: typing.Any) -> None:
        parts = key.split(".")
        target: typing.Any = self
        for part in parts[:-1]:
            if not hasattr(target, part) or not dataclasses.is_dataclass(getattr(target, part)):
                raise ConfigError(f"unknown config key: {key}")
            target = getattr(target, part)
        name = parts[-1]
        fields = {f.name: f for f in dataclasses.fields(target)}
        if name not in fields or dataclasses.is_dataclass(getattr(target, name)):
            raise ConfigError(f"unknown config key: {key}")
        hint = typing.get_type_hints(type(target))[name]
        setattr(target, name, _coerce(raw, hint, key))

    def update(self, pairs: dict[str, typing.Any]) -> "RunConfig":
        for k, v in pairs.items():
            self.set(k, v)
        return self

    def validate(self) -> "RunConfig":
        m = self.model
        splits = list(m.vit_splits)
        if not splits:
            raise ConfigError("model.vit_splits must not be empty")
        if any(b <= a for a, b in zip(splits, splits[1:])):
            raise ConfigError("model.vit_splits must be strictly increasing")
        limit = m.vit_depth if m.vit_split_mode == "one_based" else m.vit_depth - 1
        if splits[0] < (1 if m.vit_split_mode == "one_based" else 0) or splits[-1] > limit:
            raise ConfigError("model.vit_splits out of range for model.vit_depth")
        if m.vit_split_mode not in ("one_based", "zero_based"):
            raise ConfigError("model.vit_split_mode must be one_based or zero_based")
        if len(m.dpt_scales) != m.blocks or len(m.dpt_channels) != m.blocks:
            raise ConfigError("model.dpt_scales and model.dpt_channels need one entry per block")
        for s in m.dpt_scales:
            if s not in (4.0, 2.0, 1.0, 0.5):
                raise ConfigError(f"unsupported DPT scale {s}")
        if m.image_size % m.patch:
            raise ConfigError("model.image_size must be divisible by model.patch")
        if m.dim % m.heads or m.gaze_dim % m.gaze_heads:
            raise ConfigError("token dims must be divisible by head counts")
        if m.backbone not in ("resnet18", "toy"):
            raise ConfigError("model.backbone must be resnet18 or toy")
        if m.backbone == "resnet18" and m.gaze_dim != 512:
            raise ConfigError("resnet18 backbone produces 512-d embeddings")
        if self.temporal.window < 1 or self.temporal.stride < 1:
            raise ConfigError("temporal.window and temporal.stride must be >= 1")
        if self.temporal.window > m.max_frames:
            raise ConfigError("temporal.window exceeds model.max_frames")
        if self.sampling.max_people < 1:
            raise ConfigError("sampling.max_people must be >= 1")
        for name, v in dataclasses.asdict(self.loss).items():
            if v < 0:
                raise ConfigError(f"loss.{name} must be >= 0")
        if self.eval.laeo_keep not in ("one", "both"):
            raise ConfigError("eval.laeo_keep must be one or both")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError("dtype must be float32 or float64")
        return self

    def config_hash(self) -> str:
        blob = json.dumps(self.to_flat(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def dumps(self) -> str:
        lines = []
        for k, v in self.to_flat().items():
            if isinstance(v, (list, tuple)):
                v = ",".join(_fmt_scalar(x) for x in v)
            else:
                v = _fmt_scalar(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_flat(cls, flat: dict[str, typing.Any]) -> "RunConfig":
        return cls().update(flat).validate()

    @classmethod
    def load(cls, path: str | Path, overrides: list[str] | None = None) -> "RunConfig":
        cfg = cls()
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg.set(k, v)
        cfg.apply_overrides(overrides or [])
        return cfg.validate()

    def apply_overrides(self, overrides: list[str]) -> "RunConfig":
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override must be key=value, got {item!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            self.set(k, v)
        return self


def toy_config(**overrides: typing.Any) -> RunConfig:
    """Small CPU-sized configuration used by tests and the synthetic workflow."""
    cfg = RunConfig()
    cfg.update(
        {
            "model.dim": 32,
            "model.heads": 4,
            "model.gaze_dim": 16,
            "model.gaze_heads": 2,
            "model.ms_dim": 16,
            "model.image_size": 32,
            "model.patch": 16,
            "model.vit_depth": 2,
            "model.vit_splits": (1, 2),
            "model.mlp_ratio": 2.0,
            "model.backbone": "toy",
            "model.crop_size": 16,
            "model.toy_backbone_width": 8,
            "model.heatmap_size": (8, 8),
            "model.dpt_scales": (2.0, 1.0),
            "model.dpt_channels": (16, 16),
            "model.dpt_features": 16,
            "model.decoder_hidden": 32,
            "temporal.window": 2,
            "temporal.stride": 1,
            "sampling.max_people": 2,
            "optim.batch_size": 4,
        }
    )
    cfg.update(overrides)
    return cfg.validate()


def _plain(value: typing.Any) -> typing.Any:
    if isinstance(value, tuple):
        return list(value)
    return value


def _fmt_scalar(v: typing.Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _coerce(raw: typing.Any, hint: typing.Any, key: str) -> typing.Any:
    origin = typing.get_origin(hint)
    try:
        if origin is tuple:
            (inner, *rest) = typing.get_args(hint)
            if isinstance(raw, str):
                items = [s for s in raw.replace("x", ",").split(",") if s.strip()]
            else:
                items = list(raw)
            return tuple(_coerce(x, inner, key) for x in items)
        if hint is bool:
            if isinstance(raw, bool):
                return raw
            s = str(raw).strip().lower()
            if s in ("1", "true", "yes", "on"):
                return True
            if s in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if hint is int:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(raw)
            return int(str(raw).strip()) if isinstance(raw, str) else int(raw)
        if hint is float:
            return float(raw)
        if hint is str:
            return str(raw).strip()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    raise ConfigError(f"unsupported type for {key}")
