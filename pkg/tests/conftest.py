import os
import sys

import numpy as np
import pytest
import torch

sys.path.insert(0, os.path.dirname(__file__))
torch.set_num_threads(1)

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def toy_cfg():
    from socialgaze.config import toy_config

    return toy_config()


def random_inputs(cfg, b=2, n=2, t=2, seed=0, dtype=torch.float32, pad=True):
    """Random model inputs with valid boxes; with ``pad`` some slots are masked."""
    g = torch.Generator().manual_seed(seed)
    m = cfg.model
    frames = torch.rand(b, t, 3, m.image_size, m.image_size, generator=g, dtype=dtype)
    crops = torch.rand(b, n, t, 3, m.crop_size, m.crop_size, generator=g, dtype=dtype)
    lo = torch.rand(b, n, t, 2, generator=g, dtype=dtype) * 0.7
    size = 0.05 + torch.rand(b, n, t, 2, generator=g, dtype=dtype) * 0.2
    boxes = torch.cat([lo, lo + size], dim=-1)
    mask = torch.ones(b, n, t, dtype=torch.bool)
    if pad and n > 1:
        mask[0, -1] = False
        if t > 1:
            mask[-1, 0, 0] = False
    speaking = torch.rand(b, n, t, generator=g, dtype=dtype) if cfg.ablation.speaking else None
    return dict(frames=frames, crops=crops, boxes=boxes, mask=mask, speaking=speaking)
