from .ap import ap_binary, ap_laeo, ap_lah, argmax_partners, lah_detections, laeo_pairs, zero_non_argmax
from .gaze import auc, dist, gt_binary_map, heatmap_argmax_point
from .report import MetricReport, evaluate
from .social import (
    decoder_laeo_binary,
    decoder_lah_targets,
    f1,
    f1_from_counts,
    f1_lah,
    lah_counts,
    pp_social,
)

__all__ = [
    "MetricReport",
    "ap_binary",
    "ap_laeo",
    "ap_lah",
    "argmax_partners",
    "auc",
    "decoder_laeo_binary",
    "decoder_lah_targets",
    "dist",
    "evaluate",
    "f1",
    "f1_from_counts",
    "f1_lah",
    "gt_binary_map",
    "heatmap_argmax_point",
    "lah_counts",
    "laeo_pairs",
    "pp_social",
    "zero_non_argmax",
]
