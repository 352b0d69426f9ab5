"""Attention and MLP building blocks shared by every module of the network."""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn


class Attention(nn.Module):
    """Multi-head attention with an explicit boolean key mask.

    Masked keys receive exactly zero weight, so they contribute nothing to the
    output and receive exactly zero gradient. Query rows without any valid key
    produce a zero output.
    """

    def __init__(self, dim: int, heads: int):
        super().__init__()
        if dim % heads:
            raise ValueError("dim must be divisible by heads")
        self.heads = heads
        self.scale = 1.0 / math.sqrt(dim // heads)
        self.q = nn.Linear(dim, dim)
        self.k = nn.Linear(dim, dim)
        self.v = nn.Linear(dim, dim)
        self.proj = nn.Linear(dim, dim)
        self.last_weights: torch.Tensor | None = None
        self.keep_weights = False

    def forward(self, x, context, key_mask=None, pair_mask=None):
        # x: [N, Lq, D], context: [N, Lk, D], key_mask: [N, Lk], pair_mask: [Lq, Lk]
        n, lq, d = x.shape
        lk = context.shape[1]
        h = self.heads
        q = self.q(x).view(n, lq, h, -1).transpose(1, 2)
        k = self.k(context).view(n, lk, h, -1).transpose(1, 2)
        v = self.v(context).view(n, lk, h, -1).transpose(1, 2)
        logits = (q @ k.transpose(-2, -1)) * self.scale

        allowed = None
        if key_mask is not None:
            allowed = key_mask[:, None, None, :].expand(n, 1, lq, lk)
        if pair_mask is not None:
            pm = pair_mask[None, None]
            allowed = pm.expand(n, 1, lq, lk) if allowed is None else allowed & pm
        if allowed is not None:
            has_key = allowed.any(-1, keepdim=True)
            # rows with no key attend everywhere and are zeroed below (avoids NaN)
            allowed = allowed | ~has_key
            logits = logits.masked_fill(~allowed, float("-inf"))
        weights = logits.softmax(-1)
        if self.keep_weights:
            self.last_weights = weights.detach()
        out = (weights @ v).transpose(1, 2).reshape(n, lq, d)
        out = self.proj(out)
        if allowed is not None:
            out = out * has_key[:, 0].to(out.dtype)
        return out


class FeedForward(nn.Sequential):
    def __init__(self, dim: int, ratio: float):
        hidden = int(dim * ratio)
        super().__init__(nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim))


class TransformerLayer(nn.Module):
    """Pre-norm transformer layer (attention + feed-forward, both residual).

    With ``cross=True`` the keys/values come from a separate context sequence
    that is normalised by its own LayerNorm.
    """

    def __init__(self, dim: int, heads: int, mlp_ratio: float = 4.0, cross: bool = False):
        super().__init__()
        self.cross = cross
        self.norm_q = nn.LayerNorm(dim)
        self.norm_kv = nn.LayerNorm(dim) if cross else None
        self.attn = Attention(dim, heads)
        self.norm_ff = nn.LayerNorm(dim)
        self.ff = FeedForward(dim, mlp_ratio)

    def forward(self, x, context=None, key_mask=None, pair_mask=None, query_mask=None):
        q = self.norm_q(x)
        kv = self.norm_kv(context) if self.cross else q
        x = x + self.attn(q, kv, key_mask=key_mask, pair_mask=pair_mask)
        x = x + self.ff(self.norm_ff(x))
        if query_mask is not None:
            x = x * query_mask[..., None].to(x.dtype)
        return x

    @torch.no_grad()
    def zero_output(self) -> None:
        """Zero both residual branches so the layer becomes the identity."""
        for lin in (self.attn.proj, self.ff[2]):
            lin.weight.zero_()
            lin.bias.zero_()


class ResidualMLP(nn.Module):
    """``n_layers`` linear layers; every hidden->hidden layer is residual."""

    def __init__(self, in_dim: int, hidden: int, out_dim: int, n_layers: int):
        super().__init__()
        if n_layers < 2:
            raise ValueError("need at least an input and an output layer")
        self.inp = nn.Linear(in_dim, hidden)
        self.hidden = nn.ModuleList(nn.Linear(hidden, hidden) for _ in range(n_layers - 2))
        self.out = nn.Linear(hidden, out_dim)

    def forward(self, x):
        x = F.gelu(self.inp(x))
        for layer in self.hidden:
            x = x + F.gelu(layer(x))
        return self.out(x)
