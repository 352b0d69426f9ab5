"""The five-term training objective."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from ..config import LossConfig
from .targets import LAH_UNKNOWN

LossWeights = LossConfig
TERMS = ("hm", "vec", "lah", "sa", "io")


def effective_weights(loss_cfg: LossConfig, ablation=None) -> dict:
    w = {k: getattr(loss_cfg, k) for k in TERMS}
    if ablation is not None:
        if ablation.no_social_loss:
            w["lah"] = w["sa"] = 0.0
        if ablation.no_gf_loss:
            w["hm"] = w["vec"] = w["io"] = 0.0
    return w


def _masked_mean(values, mask, weights=None):
    mask = mask.to(values.dtype)
    w = mask if weights is None else mask * weights
    denom = w.sum()
    if denom.item() == 0:
        return values.new_zeros(())
    return (values * w).sum() / denom


def bce(prob, target, eps: float):
    p = prob.clamp(eps, 1.0 - eps)
    return -(target * torch.log(p) + (1.0 - target) * torch.log(1.0 - p))


def heatmap_loss(out, tg):
    per = ((out.heatmaps - tg.heatmaps) ** 2).mean(dim=(-1, -2))
    return _masked_mean(per, tg.heatmap_valid & out.person_mask)


def vector_loss(out, tg):
    cos = F.cosine_similarity(out.gaze_vectors, tg.vectors, dim=-1, eps=1e-8)
    return _masked_mean(1.0 - cos, tg.vector_valid & out.person_mask)


def inout_loss(out, tg, eps):
    return _masked_mean(bce(out.inout, tg.inout, eps), tg.inout_valid & out.person_mask)


def lah_loss(out, tg, eps, positive_weight):
    # targets per ordered pair (i -> j): 1 at the labelled target slot, else 0
    n = out.lah.shape[1]
    slots = torch.arange(n, device=tg.lah.device)[None, None, :, None]
    target = (tg.lah[:, :, None, :] == slots).to(out.lah.dtype)
    known = (tg.lah != LAH_UNKNOWN)[:, :, None, :]
    valid = known & out.pair_mask
    w = 1.0 + (positive_weight - 1.0) * target
    return _masked_mean(bce(out.lah, target, eps), valid, w)


def sa_loss(out, tg, eps, positive_weight):
    n = out.sa.shape[1]
    upper = torch.ones(n, n, dtype=torch.bool, device=out.sa.device).triu(1)[None, :, :, None]
    valid = (tg.sa >= 0) & out.pair_mask & upper
    target = (tg.sa == 1).to(out.sa.dtype)
    w = 1.0 + (positive_weight - 1.0) * target
    return _masked_mean(bce(out.sa, target, eps), valid, w)


def loss_total(out, tg, loss_cfg: LossConfig, ablation=None):
    """Weighted sum of the heatmap, vector, LAH, SA and in-out losses.

    Every term is a mean over its valid entries (social terms weight
    positives by ``positive_weight``); a term with zero weight is skipped
    entirely so the total does not depend on its predictions.
    Returns ``(total, {term: value})``.
    """
    w = effective_weights(loss_cfg, ablation)
    eps = loss_cfg.bce_eps
    fns = {
        "hm": lambda: heatmap_loss(out, tg),
        "vec": lambda: vector_loss(out, tg),
        "lah": lambda: lah_loss(out, tg, eps, loss_cfg.positive_weight),
        "sa": lambda: sa_loss(out, tg, eps, loss_cfg.positive_weight),
        "io": lambda: inout_loss(out, tg, eps),
    }
    terms = {}
    total = out.heatmaps.new_zeros(())
    for name in TERMS:
        if w[name] == 0:
            terms[name] = out.heatmaps.new_zeros(())
            continue
        terms[name] = fns[name]()
        total = total + w[name] * terms[name]
    return total, terms


def combine(terms: dict, loss_cfg: LossConfig, ablation=None):
    w = effective_weights(loss_cfg, ablation)
    return sum(w[k] * terms[k] for k in TERMS)
