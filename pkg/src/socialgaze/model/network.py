"""The full network: person module -> interaction module -> prediction heads."""

from __future__ import annotations

from dataclasses import dataclass, fields

import torch
from torch import nn

from ..errors import ValidationError
from .interaction import InteractionModule
from .person import PersonModule
from .prediction import ConditionedDPT, MultiScaleToken, SocialHeads, pair_mask_from


@dataclass
class ModelOutput:
    heatmaps: torch.Tensor  # [B, N, T, Hh, Wh]
    gaze_vectors: torch.Tensor  # [B, N, T, 2]
    inout: torch.Tensor  # [B, N, T]
    lah: torch.Tensor  # [B, N, N, T], row looks at column
    laeo: torch.Tensor  # [B, N, N, T], symmetric
    sa: torch.Tensor  # [B, N, N, T], symmetric
    person_mask: torch.Tensor  # [B, N, T]

    @property
    def pair_mask(self):
        return pair_mask_from(self.person_mask)

    def detach(self) -> "ModelOutput":
        return ModelOutput(*(getattr(self, f.name).detach() for f in fields(self)))

    def select(self, index) -> "ModelOutput":
        """Slice along the batch axis."""
        return ModelOutput(*(getattr(self, f.name)[index] for f in fields(self)))


class SocialGazeNet(nn.Module):
    def __init__(self, cfg):
        super().__init__()
        self.cfg = cfg
        m = cfg.model
        self.person = PersonModule(cfg, static=cfg.ablation.static)
        self.interaction = InteractionModule(cfg)
        self.dpt = ConditionedDPT(cfg)
        self.multiscale = MultiScaleToken(m.dim, m.ms_dim, m.blocks + 1)
        self.heads = SocialHeads(cfg)

    def vit_parameters(self):
        return self.interaction.vit_parameters()

    def forward(self, frames, crops, boxes, mask, speaking=None, return_tokens=False):
        """frames [B, T, 3, H, W]; crops [B, N, T, 3, Hc, Wc]; boxes [B, N, T, 4];
        mask [B, N, T] (True = real person visible in that frame)."""
        if mask.dim() != 3:
            raise ValidationError("mask must be [B, N, T]")
        if not mask.any(dim=(1, 2)).all():
            raise ValidationError("every clip needs at least one person")
        if frames.shape[:2] != (mask.shape[0], mask.shape[2]):
            raise ValidationError("frames and person mask disagree on batch/time")
        if not torch.isfinite(frames).all():
            raise ValidationError("frames contain non-finite values")
        if speaking is not None and not self.cfg.ablation.speaking:
            raise ValidationError("speaking scores given but ablation.speaking is off")

        tokens, vectors = self.person(crops, boxes, mask, speaking)
        inter = self.interaction(frames, tokens, mask)
        maskf = mask.to(tokens.dtype)
        heatmaps = self.dpt(inter.frame_tokens, inter.person_tokens[1:])
        heatmaps = heatmaps * maskf[..., None, None]
        ms = self.multiscale(inter.person_tokens)
        lah, laeo, sa, inout = self.heads(ms, mask)
        out = ModelOutput(heatmaps, vectors, inout, lah, laeo, sa, mask)
        if return_tokens:
            return out, inter, ms
        return out


def build_model(cfg, seed: int | None = None) -> SocialGazeNet:
    """Construct the network with deterministic initialisation."""
    dtype = torch.float64 if cfg.dtype == "float64" else torch.float32
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(cfg.seed if seed is None else seed)
        model = SocialGazeNet(cfg)
    return model.to(dtype)
