"""Person sampling for batched training."""

from __future__ import annotations

import numpy as np


def sample_people(person_ids, cap: int = 4, rng=None, train: bool = True):
    """Choose person slots for one clip.

    Training: a uniform random subset of at most ``cap`` persons (seeded
    ``rng``), padded with ``None`` up to ``cap``. Test mode keeps everyone in
    the original order and adds no padding.
    """
    ids = list(person_ids)
    if not ids:
        raise ValueError("sample_people needs at least one person")
    if not train:
        return ids
    if len(ids) > cap:
        rng = rng if rng is not None else np.random.default_rng()
        pick = sorted(rng.choice(len(ids), size=cap, replace=False).tolist())
        ids = [ids[k] for k in pick]
    return ids + [None] * (cap - len(ids))
