from .losses import TERMS, LossWeights, effective_weights, loss_total
from .sampling import sample_people
from .schedule import warmup_cosine
from .targets import (
    LAH_NEGATIVE,
    LAH_UNKNOWN,
    TrainingTargets,
    empty_targets,
    fill_frame_targets,
    synth_gt_heatmap,
    synth_gt_vector,
)

__all__ = [
    "LAH_NEGATIVE",
    "LAH_UNKNOWN",
    "LossWeights",
    "TERMS",
    "TrainingTargets",
    "effective_weights",
    "empty_targets",
    "fill_frame_targets",
    "loss_total",
    "sample_people",
    "synth_gt_heatmap",
    "synth_gt_vector",
    "warmup_cosine",
]
