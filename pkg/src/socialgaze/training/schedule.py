import math


def warmup_cosine(step: int, total: int, warmup_frac: float = 0.05, floor_frac: float = 0.01) -> float:
    """LR multiplier: linear 0 -> 1 over the warmup steps, then cosine down to ``floor_frac``."""
    warmup = max(int(round(total * warmup_frac)), 0)
    if warmup and step < warmup:
        return step / warmup
    span = max(total - warmup, 1)
    progress = min(max(step - warmup, 0) / span, 1.0)
    return floor_frac + (1.0 - floor_frac) * 0.5 * (1.0 + math.cos(math.pi * progress))
