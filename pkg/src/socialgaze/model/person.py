"""Person module: head crops and boxes -> person tokens and 2D gaze vectors."""

from __future__ import annotations

import torch
from torch import nn

from ..errors import ValidationError
from .layers import TransformerLayer


class ToyBackbone(nn.Module):
    """Three strided conv stages + global pooling; small enough for tests."""

    def __init__(self, out_dim: int, width: int = 16):
        super().__init__()
        self.out_dim = out_dim
        self.features = nn.Sequential(
            nn.Conv2d(3, width, 3, stride=2, padding=1),
            nn.GELU(),
            nn.Conv2d(width, 2 * width, 3, stride=2, padding=1),
            nn.GELU(),
            nn.Conv2d(2 * width, 4 * width, 3, stride=2, padding=1),
            nn.GELU(),
        )
        self.head = nn.Linear(4 * width, out_dim)

    def forward(self, x):
        return self.head(self.features(x).mean(dim=(2, 3)))


class ResNet18Backbone(nn.Module):
    """ResNet18 trunk with the classifier removed (512-d output).

    Pretrained gaze weights are not shipped; pass a state dict file to
    :meth:`load_pretrained`.
    """

    out_dim = 512

    def __init__(self):
        super().__init__()
        from torchvision.models import resnet18

        net = resnet18(weights=None)
        net.fc = nn.Identity()
        self.net = net

    def forward(self, x):
        return self.net(x)

    def load_pretrained(self, path: str, strict: bool = False):
        state = torch.load(path, map_location="cpu", weights_only=True)
        state = {k.removeprefix("module."): v for k, v in state.items() if not k.startswith("fc.")}
        return self.net.load_state_dict(state, strict=strict)


def build_backbone(cfg) -> nn.Module:
    if cfg.backbone == "toy":
        return ToyBackbone(cfg.gaze_dim, cfg.toy_backbone_width)
    return ResNet18Backbone()


class TemporalGazeEncoder(nn.Module):
    """One self-attention transformer layer over a person's time axis.

    A learned per-time-step embedding (zero at init) is added first. In static
    mode each frame attends only to itself and no time embedding is added.
    """

    def __init__(self, dim: int, heads: int, max_frames: int, mlp_ratio: float = 4.0):
        super().__init__()
        self.time_embed = nn.Parameter(torch.zeros(max_frames, dim))
        self.layer = TransformerLayer(dim, heads, mlp_ratio)

    def forward(self, x, mask=None, static: bool = False):
        # x: [S, T, Dg], mask: [S, T]
        t = x.shape[1]
        if t > self.time_embed.shape[0]:
            raise ValidationError(f"sequence length {t} exceeds max_frames")
        pair_mask = None
        if static:
            pair_mask = torch.eye(t, dtype=torch.bool, device=x.device)
        else:
            x = x + self.time_embed[:t]
        return self.layer(x, key_mask=mask, pair_mask=pair_mask, query_mask=mask)


class GazeVectorHead(nn.Sequential):
    """2-layer MLP -> raw (unnormalised) 2D gaze vector."""

    def __init__(self, dim: int):
        super().__init__(nn.Linear(dim, dim), nn.GELU(), nn.Linear(dim, 2))


class PersonTokenizer(nn.Module):
    """Sum of linear projections of gaze embedding, head box and (optionally) speaking score."""

    def __init__(self, gaze_dim: int, dim: int, speaking: bool = False):
        super().__init__()
        self.gaze_proj = nn.Linear(gaze_dim, dim)
        self.box_proj = nn.Linear(4, dim)
        self.speaking_proj = nn.Linear(1, dim) if speaking else None

    def forward(self, gaze, boxes, speaking=None):
        if gaze.shape[:-1] != boxes.shape[:-1]:
            raise ValidationError("gaze embeddings and boxes disagree on leading dims")
        tokens = self.gaze_proj(gaze) + self.box_proj(boxes)
        if speaking is not None:
            if self.speaking_proj is None:
                raise ValidationError("speaking scores given but model built without speaking")
            if speaking.shape != boxes.shape[:-1]:
                raise ValidationError("speaking scores must be [..., T]")
            tokens = tokens + self.speaking_proj(speaking[..., None])
        return tokens


class PersonModule(nn.Module):
    def __init__(self, cfg, static: bool = False):
        super().__init__()
        m = cfg.model
        self.static = static
        self.backbone = build_backbone(m)
        if m.freeze_backbone:
            self.backbone.requires_grad_(False)
        self.temporal = TemporalGazeEncoder(m.gaze_dim, m.gaze_heads, m.max_frames, m.mlp_ratio)
        self.vector_head = GazeVectorHead(m.gaze_dim)
        self.tokenizer = PersonTokenizer(m.gaze_dim, m.dim, speaking=cfg.ablation.speaking)

    def embed(self, crops):
        """Static per-frame embeddings for crops of any leading shape ``[..., C, H, W]``."""
        if not torch.isfinite(crops).all():
            raise ValidationError("head crops contain non-finite values")
        lead = crops.shape[:-3]
        flat = crops.reshape(-1, *crops.shape[-3:])
        return self.backbone(flat).reshape(*lead, -1)

    def forward(self, crops, boxes, mask, speaking=None):
        """crops [B, N, T, C, H, W], boxes [B, N, T, 4], mask [B, N, T].

        Returns ``(tokens [B, N, T, D], gaze_vectors [B, N, T, 2])``; padded
        entries are exactly zero.
        """
        b, n, t = mask.shape
        maskf = mask.to(crops.dtype)[..., None]
        crops = crops * maskf[..., None, None]
        static = self.embed(crops) * maskf
        seq = static.reshape(b * n, t, -1)
        temporal = self.temporal(seq, mask.reshape(b * n, t), static=self.static)
        temporal = temporal.reshape(b, n, t, -1)
        vectors = self.vector_head(temporal) * maskf
        tokens = self.tokenizer(temporal, boxes, speaking) * maskf
        return tokens, vectors
