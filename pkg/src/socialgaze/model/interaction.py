"""Interaction module: person<->scene cross-attention woven into a ViT, plus
per-frame social and per-person temporal self-attention."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..errors import ValidationError
from .layers import TransformerLayer


class ViTTokenizer(nn.Module):
    """Per-frame patch embedding with a learned 2D positional embedding."""

    def __init__(self, image_size: int, patch: int, dim: int):
        super().__init__()
        if image_size % patch:
            raise ValidationError("image size must be divisible by the patch size")
        self.image_size = image_size
        self.patch = patch
        self.grid = image_size // patch
        self.embed = nn.Conv2d(3, dim, patch, stride=patch)
        self.pos = nn.Parameter(torch.randn(1, self.grid * self.grid, dim) * 0.02)
        self.calls = 0

    def forward(self, frames):
        # frames [B, T, 3, H, W] -> [B, T, Nf, D]
        if frames.shape[-2:] != (self.image_size, self.image_size):
            raise ValidationError(
                f"frames must be {self.image_size}x{self.image_size}, got {tuple(frames.shape[-2:])}"
            )
        self.calls += 1
        b, t = frames.shape[:2]
        x = self.embed(frames.reshape(b * t, *frames.shape[2:]))
        x = x.flatten(2).transpose(1, 2) + self.pos
        return x.reshape(b, t, *x.shape[1:])


def block_layer_ranges(splits, depth: int, mode: str = "one_based"):
    """0-based ``range`` of ViT layers run by each block.

    ``one_based``: block b runs layers (l_{b-1}, l_b] numbered from 1 with
    l_0 = 0, so {2,5,8,11} -> 1-2, 3-5, 6-8, 9-11.
    ``zero_based``: split values are 0-based layer indices with l_0 = -1, so
    {2,5,8,11} -> 0-2, 3-5, 6-8, 9-11 (every layer of a 12-layer ViT).
    """
    ranges = []
    prev = 0 if mode == "one_based" else -1
    for s in splits:
        lo, hi = (prev, s) if mode == "one_based" else (prev + 1, s + 1)
        if hi > depth:
            raise ValidationError("ViT split beyond depth")
        ranges.append(range(lo, hi))
        prev = s
    return ranges


@dataclass
class InteractionOutput:
    frame_tokens: list  # B entries, each [B, T, Nf, D]
    person_tokens: list  # B + 1 entries, each [B, N, T, D]


class InteractionBlock(nn.Module):
    def __init__(self, dim, heads, mlp_ratio, ablation):
        super().__init__()
        self.use_ps = not ablation.no_I_ps
        self.use_sp = not ablation.no_I_sp
        self.use_ppt = not ablation.no_I_ppt
        self.static = ablation.static
        self.person_to_scene = TransformerLayer(dim, heads, mlp_ratio, cross=True) if self.use_ps else None
        self.scene_to_person = TransformerLayer(dim, heads, mlp_ratio, cross=True) if self.use_sp else None
        self.social = TransformerLayer(dim, heads, mlp_ratio) if self.use_ppt else None
        self.temporal = TransformerLayer(dim, heads, mlp_ratio) if self.use_ppt else None

    def apply_person_to_scene(self, frames, persons, mask):
        # frames [B, T, Nf, D], persons [B, N, T, D], mask [B, N, T]
        if not self.use_ps:
            return frames
        b, t, nf, d = frames.shape
        n = persons.shape[1]
        q = frames.reshape(b * t, nf, d)
        kv = persons.transpose(1, 2).reshape(b * t, n, d)
        km = mask.transpose(1, 2).reshape(b * t, n)
        out = self.person_to_scene(q, kv, key_mask=km)
        # frames without any person pass through unchanged
        any_person = km.any(-1)[:, None, None]
        out = torch.where(any_person, out, q)
        return out.reshape(b, t, nf, d)

    def apply_scene_to_person(self, persons, frames, mask):
        if not self.use_sp:
            return persons
        b, n, t, d = persons.shape
        nf = frames.shape[2]
        q = persons.transpose(1, 2).reshape(b * t, n, d)
        kv = frames.reshape(b * t, nf, d)
        qm = mask.transpose(1, 2).reshape(b * t, n)
        out = self.scene_to_person(q, kv, query_mask=qm)
        return out.reshape(b, t, n, d).transpose(1, 2)

    def apply_social(self, persons, mask):
        if not self.use_ppt:
            return persons
        b, n, t, d = persons.shape
        x = persons.transpose(1, 2).reshape(b * t, n, d)
        m = mask.transpose(1, 2).reshape(b * t, n)
        out = self.social(x, key_mask=m, query_mask=m)
        return out.reshape(b, t, n, d).transpose(1, 2)

    def apply_temporal(self, persons, mask):
        if not self.use_ppt:
            return persons
        b, n, t, d = persons.shape
        x = persons.reshape(b * n, t, d)
        m = mask.reshape(b * n, t)
        pair_mask = torch.eye(t, dtype=torch.bool, device=x.device) if self.static else None
        out = self.temporal(x, key_mask=m, pair_mask=pair_mask, query_mask=m)
        return out.reshape(b, n, t, d)


class InteractionModule(nn.Module):
    def __init__(self, cfg):
        super().__init__()
        m = cfg.model
        self.tokenizer = ViTTokenizer(m.image_size, m.patch, m.dim)
        self.vit_layers = nn.ModuleList(
            TransformerLayer(m.dim, m.heads, m.mlp_ratio) for _ in range(m.vit_depth)
        )
        self.ranges = block_layer_ranges(m.vit_splits, m.vit_depth, m.vit_split_mode)
        self.blocks = nn.ModuleList(
            InteractionBlock(m.dim, m.heads, m.mlp_ratio, cfg.ablation) for _ in self.ranges
        )

    def vit_parameters(self):
        """Parameters of the scene ViT (patch embedder, position table, layers)."""
        yield from self.tokenizer.parameters()
        used = {i for r in self.ranges for i in r}
        for i, layer in enumerate(self.vit_layers):
            if i in used:
                yield from layer.parameters()

    def scene_stage(self, frames, block_index: int):
        b, t, nf, d = frames.shape
        x = frames.reshape(b * t, nf, d)
        for i in self.ranges[block_index]:
            x = self.vit_layers[i](x)
        return x.reshape(b, t, nf, d)

    def forward(self, frames, person_tokens, mask) -> InteractionOutput:
        """frames [B, T, 3, H, W]; person_tokens [B, N, T, D]; mask [B, N, T]."""
        f = self.tokenizer(frames)
        p = person_tokens
        frame_levels, person_levels = [], [p]
        for bi, block in enumerate(self.blocks):
            f_p = block.apply_person_to_scene(f, p, mask)
            f = self.scene_stage(f_p, bi)
            p = block.apply_scene_to_person(p, f, mask)
            p = block.apply_social(p, mask)
            p = block.apply_temporal(p, mask)
            frame_levels.append(f)
            person_levels.append(p)
        return InteractionOutput(frame_levels, person_levels)
