"""Prediction module: person-conditioned DPT heatmaps, social gaze and in-out heads."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ValidationError
from .layers import ResidualMLP


def _resample(channels: int, scale: float) -> nn.Module:
    if scale == 4:
        return nn.ConvTranspose2d(channels, channels, 4, stride=4)
    if scale == 2:
        return nn.ConvTranspose2d(channels, channels, 2, stride=2)
    if scale == 1:
        return nn.Identity()
    if scale == 0.5:
        return nn.Conv2d(channels, channels, 3, stride=2, padding=1)
    raise ValidationError(f"unsupported resample scale {scale}")


class Reassemble(nn.Module):
    """Tokens -> image-like map: 1x1 projection then spatial resampling."""

    def __init__(self, dim: int, channels: int, scale: float):
        super().__init__()
        self.project = nn.Conv2d(dim, channels, 1)
        self.resample = _resample(channels, scale)

    def forward(self, tokens, grid: int):
        # tokens [S, Nf, D] -> [S, C, H, W]
        s, nf, d = tokens.shape
        if nf != grid * grid:
            raise ValidationError("frame tokens do not form a square patch grid")
        x = tokens.transpose(1, 2).reshape(s, d, grid, grid)
        return self.resample(self.project(x))


class ResidualConvUnit(nn.Module):
    def __init__(self, features: int):
        super().__init__()
        self.conv1 = nn.Conv2d(features, features, 3, padding=1)
        self.conv2 = nn.Conv2d(features, features, 3, padding=1)

    def forward(self, x):
        return x + self.conv2(F.gelu(self.conv1(F.gelu(x))))


class FusionBlock(nn.Module):
    def __init__(self, features: int):
        super().__init__()
        self.skip_unit = ResidualConvUnit(features)
        self.unit = ResidualConvUnit(features)
        self.out = nn.Conv2d(features, features, 1)

    def forward(self, x, skip=None, size=None):
        if skip is not None:
            x = x + self.skip_unit(skip)
        x = self.unit(x)
        if size is not None:
            x = F.interpolate(x, size=size, mode="bilinear", align_corners=True)
        return self.out(x)


HEATMAP_PRIOR_LOGIT = -4.0


class ConditionedDPT(nn.Module):
    """DPT decoder whose reassembled maps are gated per person.

    The unconditioned reassemble maps are computed once per frame; each
    person's block-level token is projected to the map's channel count and
    multiplied in at every spatial location before fusion.
    """

    def __init__(self, cfg):
        super().__init__()
        m = cfg.model
        self.grid = m.image_size // m.patch
        self.heatmap_size = tuple(m.heatmap_size)
        self.reassemble = nn.ModuleList(
            Reassemble(m.dim, c, s) for c, s in zip(m.dpt_channels, m.dpt_scales)
        )
        self.condition = nn.ModuleList(nn.Linear(m.dim, c) for c in m.dpt_channels)
        self.to_features = nn.ModuleList(
            nn.Conv2d(c, m.dpt_features, 3, padding=1) for c in m.dpt_channels
        )
        self.fusion = nn.ModuleList(FusionBlock(m.dpt_features) for _ in m.dpt_channels)
        half = max(m.dpt_features // 2, 1)
        self.head_in = nn.Conv2d(m.dpt_features, half, 3, padding=1)
        self.head_mid = nn.Conv2d(half, 32, 3, padding=1)
        self.head_out = nn.Conv2d(32, 1, 1)
        # start near the background level of a GT heatmap so the sigmoid is not
        # driven into saturation while the model learns to suppress background
        nn.init.constant_(self.head_out.bias, HEATMAP_PRIOR_LOGIT)

    def reassemble_maps(self, frame_levels):
        """Unconditioned maps, one ``[B, T, C, H, W]`` tensor per block."""
        maps = []
        for tokens, layer in zip(frame_levels, self.reassemble):
            b, t, nf, d = tokens.shape
            x = layer(tokens.reshape(b * t, nf, d), self.grid)
            maps.append(x.reshape(b, t, *x.shape[1:]))
        return maps

    def condition_maps(self, maps, person_levels):
        """Hadamard-gate each block map with the projected person token.

        ``person_levels[b]`` is ``[B, N, T, D]``; returns ``[B, N, T, C, H, W]`` maps.
        """
        out = []
        for fmap, tokens, proj in zip(maps, person_levels, self.condition):
            gate = proj(tokens)[..., None, None]
            out.append(fmap[:, None] * gate)
        return out

    def decode(self, conditioned):
        """Fuse conditioned maps (coarse to fine) and return heatmaps in [0, 1]."""
        lead = conditioned[0].shape[:3]
        flat = [c.reshape(-1, *c.shape[3:]) for c in conditioned]
        feats = [conv(x) for conv, x in zip(self.to_features, flat)]
        # order blocks from the coarsest map to the finest
        order = sorted(range(len(feats)), key=lambda i: feats[i].shape[-1])
        x = None
        for k, i in enumerate(order):
            size = feats[order[k + 1]].shape[-2:] if k + 1 < len(order) else None
            x = self.fusion[i](feats[i] if x is None else x, None if x is None else feats[i], size)
        x = self.head_in(x)
        x = F.interpolate(x, size=self.heatmap_size, mode="bilinear", align_corners=True)
        x = self.head_out(F.gelu(self.head_mid(x)))
        return torch.sigmoid(x).reshape(*lead, *self.heatmap_size)

    def forward(self, frame_levels, person_levels):
        maps = self.reassemble_maps(frame_levels)
        return self.decode(self.condition_maps(maps, person_levels))


class MultiScaleToken(nn.Module):
    """Concatenation of per-level linear projections of a person's tokens."""

    def __init__(self, dim: int, ms_dim: int, levels: int):
        super().__init__()
        self.proj = nn.ModuleList(nn.Linear(dim, ms_dim) for _ in range(levels))

    def forward(self, person_levels):
        if len(person_levels) != len(self.proj):
            raise ValidationError(
                f"expected {len(self.proj)} token levels, got {len(person_levels)}"
            )
        return torch.cat([p(x) for p, x in zip(self.proj, person_levels)], dim=-1)


def laeo_from_lah(lah):
    """Mutual gaze score: elementwise min of the two directed LAH scores.

    ``lah`` is ``[..., N, N, T]`` with rows = looker, cols = target.
    """
    return torch.minimum(lah, lah.transpose(-3, -2))


def pair_mask_from(mask):
    """``[B, N, T]`` person mask -> ``[B, N, N, T]`` valid ordered pairs (i != j)."""
    n = mask.shape[1]
    pm = mask[:, :, None, :] & mask[:, None, :, :]
    eye = torch.eye(n, dtype=torch.bool, device=mask.device)[None, :, :, None]
    return pm & ~eye


class SocialHeads(nn.Module):
    """LAH and SA decoders over ordered person pairs, plus the in-out decoder."""

    def __init__(self, cfg):
        super().__init__()
        m = cfg.model
        ms = (m.blocks + 1) * m.ms_dim
        self.lah = ResidualMLP(2 * ms, m.decoder_hidden, 1, 3)
        self.sa = ResidualMLP(2 * ms, m.decoder_hidden, 1, 3)
        self.inout = ResidualMLP(ms, m.decoder_hidden, 1, 5)

    @staticmethod
    def pairs(ms):
        # ms [B, N, T, M] -> [B, N, N, T, 2M] with (i, j) = ms_i || ms_j
        b, n, t, m = ms.shape
        left = ms[:, :, None].expand(b, n, n, t, m)
        right = ms[:, None, :].expand(b, n, n, t, m)
        return torch.cat([left, right], dim=-1)

    def forward(self, ms, mask):
        pm = pair_mask_from(mask)
        pmf = pm.to(ms.dtype)
        pair_in = self.pairs(ms)
        lah = torch.sigmoid(self.lah(pair_in)[..., 0]) * pmf
        sa_raw = self.sa(pair_in)[..., 0]
        sa = torch.sigmoid(0.5 * (sa_raw + sa_raw.transpose(1, 2))) * pmf
        laeo = laeo_from_lah(lah)
        inout = torch.sigmoid(self.inout(ms)[..., 0]) * mask.to(ms.dtype)
        return lah, laeo, sa, inout
