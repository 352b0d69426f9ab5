"""Unification of heterogeneous gaze annotations into one schema."""

from .derive import (
    TrackMergeError,
    derive_gaze_point_from_object,
    derive_gaze_point_from_partner,
    derive_laeo,
    derive_lah,
    derive_sa,
    iou,
    merge_tracks,
    rederive,
    unify,
)
from .records import (
    SCHEMA,
    SourceAnnotation,
    SourcePerson,
    UnifiedFrameRecord,
    UnifiedPerson,
    read_records,
    read_source,
    write_records,
)
from .stats import emit_statistics, format_statistics
from .tracks import read_tracks


def build_annotations(sources, tracks=None, iou_threshold=0.5):
    """Unify a list of source frames; ``tracks`` maps (clip_id, frame_idx) to track lists."""
    tracks = tracks or {}
    return [unify(s, tracks.get((s.clip_id, s.frame_idx)), iou_threshold) for s in sources]


__all__ = [
    "SCHEMA",
    "SourceAnnotation",
    "SourcePerson",
    "TrackMergeError",
    "UnifiedFrameRecord",
    "UnifiedPerson",
    "build_annotations",
    "derive_gaze_point_from_object",
    "derive_gaze_point_from_partner",
    "derive_laeo",
    "derive_lah",
    "derive_sa",
    "emit_statistics",
    "format_statistics",
    "iou",
    "merge_tracks",
    "read_records",
    "read_source",
    "read_tracks",
    "rederive",
    "unify",
    "write_records",
]
