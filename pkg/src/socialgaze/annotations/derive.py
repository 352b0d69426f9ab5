"""Gaze-point, LAH, LAEO and SA derivation plus track merging."""

from __future__ import annotations

from collections import Counter
from itertools import combinations

import numpy as np

from .. import kernels
from ..errors import ValidationError
from .records import (
    SourceAnnotation,
    UnifiedFrameRecord,
    UnifiedPerson,
    box_center,
    check_box,
    pair_key,
)


class TrackMergeError(ValidationError):
    """Two annotated persons claim the same track, or ids collide."""


def derive_gaze_point_from_object(object_box) -> tuple[float, float]:
    return box_center(check_box(object_box, "object box"))


def derive_gaze_point_from_partner(partner_head_box) -> tuple[float, float]:
    return box_center(check_box(partner_head_box, "partner head box"))


def derive_lah(persons, multi_annotator: bool | None = None) -> dict:
    """LAH target per person from gaze-point containment in other heads.

    ``persons`` items need ``person_id``, ``head_box`` and either
    ``gaze_points`` (list) or ``gaze_point``; an ``inout`` of ``"out"``
    without a point is a known negative. With several annotator points a
    target needs at least two containing points and the most votes; a tie
    between top targets is unknown.
    """
    ids = [p.person_id for p in persons]
    boxes = np.array([p.head_box for p in persons], dtype=np.float64).reshape(-1, 4)
    out = {}
    for idx, p in enumerate(persons):
        points = _points_of(p)
        if not points:
            if getattr(p, "inout", None) == "out":
                out[p.person_id] = None
            continue
        hits = kernels.containing_box(points, boxes, np.full(len(points), idx))
        multi = len(points) > 1 if multi_annotator is None else multi_annotator
        if not multi:
            out[p.person_id] = ids[hits[0]] if hits[0] >= 0 else None
            continue
        votes = Counter(int(h) for h in hits if h >= 0)
        if not votes:
            out[p.person_id] = None
            continue
        ranked = votes.most_common()
        best, n_best = ranked[0]
        if n_best < 2:
            out[p.person_id] = None
        elif len(ranked) > 1 and ranked[1][1] == n_best:
            continue  # tie between top targets: unknown
        else:
            out[p.person_id] = ids[best]
    return out


def _points_of(p):
    pts = getattr(p, "gaze_points", None)
    if pts:
        return [tuple(q) for q in pts]
    gp = getattr(p, "gaze_point", None)
    return [tuple(gp)] if gp is not None else []


def derive_laeo(lah: dict, person_ids) -> tuple[set, set]:
    """Mutual-LAH pairs. Returns ``(positive pairs, unknown pairs)``."""
    pos, unknown = set(), set()
    for i, j in combinations(sorted(person_ids), 2):
        if i not in lah or j not in lah:
            unknown.add((i, j))
        elif lah[i] == j and lah[j] == i:
            pos.add((i, j))
    return pos, unknown


def derive_sa(lah: dict, person_ids) -> tuple[set, set]:
    """Pairs looking at the same third person. Returns ``(positive, unknown)``."""
    pos, unknown = set(), set()
    for i, j in combinations(sorted(person_ids), 2):
        if i not in lah or j not in lah:
            unknown.add((i, j))
        elif lah[i] is not None and lah[i] == lah[j] and lah[i] not in (i, j):
            pos.add((i, j))
    return pos, unknown


def iou(a, b) -> float:
    return float(kernels.iou_matrix([a], [b])[0, 0])


def merge_tracks(persons, tracks, threshold: float = 0.5):
    """Attach annotated persons to externally supplied head tracks.

    ``tracks`` is a list of ``(track_id, box)``. Each annotated person takes
    the id of its best-overlapping track when IoU >= ``threshold``; tracks
    left unmatched are appended as unannotated persons. Returns
    ``(persons, id_map)`` where ``id_map`` maps old to new person ids.
    """
    if not tracks:
        return list(persons), {p.person_id: p.person_id for p in persons}
    track_ids = [int(t[0]) for t in tracks]
    track_boxes = np.array([check_box(t[1], f"track {t[0]} box") for t in tracks])
    ann_boxes = np.array([p.head_box for p in persons], dtype=np.float64).reshape(-1, 4)
    overlaps = kernels.iou_matrix(ann_boxes, track_boxes)
    claimed: dict[int, int] = {}
    id_map = {}
    for a, p in enumerate(persons):
        if overlaps.shape[1] == 0:
            id_map[p.person_id] = p.person_id
            continue
        best = int(np.argmax(overlaps[a]))
        if overlaps[a, best] >= threshold:
            if best in claimed:
                raise TrackMergeError(
                    f"persons {persons[claimed[best]].person_id} and {p.person_id} "
                    f"both match track {track_ids[best]}"
                )
            claimed[best] = a
            id_map[p.person_id] = track_ids[best]
        else:
            id_map[p.person_id] = p.person_id
    new_ids = list(id_map.values())
    extra_ids = [tid for k, tid in enumerate(track_ids) if k not in claimed]
    if len(set(new_ids)) != len(new_ids) or set(new_ids) & set(extra_ids):
        raise TrackMergeError(f"person id collision after track merge: {sorted(new_ids)} vs {extra_ids}")
    merged = []
    for p in persons:
        q = _copy_person(p)
        q.person_id = id_map[p.person_id]
        merged.append(q)
    for k, tid in enumerate(track_ids):
        if k not in claimed:
            merged.append(UnifiedPerson(tid, tuple(track_boxes[k].tolist())))
    return merged, id_map


def _copy_person(p):
    if isinstance(p, UnifiedPerson):
        return UnifiedPerson(**vars(p))
    return type(p)(**vars(p))


def _round_box(box):
    return tuple(round(float(v), 6) for v in box)


def _round_pt(pt):
    return (round(float(pt[0]), 6), round(float(pt[1]), 6))


def unify(src: SourceAnnotation, tracks=None, iou_threshold: float = 0.5) -> UnifiedFrameRecord:
    """Convert one source frame into a unified record."""
    ds = src.dataset
    persons = []
    for p in src.persons:
        pts = [_round_pt(q) for q in p.gaze_points]
        persons.append(
            UnifiedPerson(
                p.person_id,
                _round_box(p.head_box),
                _mean_point(pts),
                p.inout or ("in" if pts else None),
                "native" if pts else None,
                pts if len(pts) > 1 else None,
                p.speaking,
            )
        )
    by_id = {p.person_id: p for p in persons}

    if ds == "videocoatt":
        for members, obj in src.sa_groups:
            if obj is None:
                continue
            if not 0 <= obj < len(src.objects):
                raise ValidationError(f"SA group references missing object {obj}")
            pt = _round_pt(derive_gaze_point_from_object(src.objects[obj]))
            for pid in members:
                _require(by_id, pid)
                by_id[pid].gaze_point = pt
                by_id[pid].gaze_points = None
                by_id[pid].gaze_source = "from_object_center"
                by_id[pid].inout = "in"
    if ds == "ucolaeo":
        for i, j in src.laeo_pairs:
            _require(by_id, i)
            _require(by_id, j)
            for a, b in ((i, j), (j, i)):
                by_id[a].gaze_point = _round_pt(derive_gaze_point_from_partner(by_id[b].head_box))
                by_id[a].gaze_points = None
                by_id[a].gaze_source = "from_head_center"
                by_id[a].inout = "in"

    annotated = [p.person_id for p in persons]
    id_map = {pid: pid for pid in annotated}
    if tracks:
        persons, id_map = merge_tracks(persons, tracks, iou_threshold)
    annotated = {id_map[pid] for pid in annotated}
    ids = [p.person_id for p in persons]

    multi = ds == "gazefollow" and any(p.gaze_points for p in persons)
    lah = derive_lah(persons, multi_annotator=True if multi else False)
    all_pairs = set(combinations(sorted(ids), 2))
    known_src = {pair_key(i, j) for i, j in all_pairs if i in annotated and j in annotated}

    if ds in ("vat", "childplay", "synthetic"):
        laeo, laeo_unknown = derive_laeo(lah, ids)
        sa, sa_unknown = derive_sa(lah, ids)
        if src.sa_groups:
            for members, _ in src.sa_groups:
                for i, j in combinations(sorted(id_map[m] for m in members), 2):
                    sa.add((i, j))
                    sa_unknown.discard((i, j))
    elif ds == "ucolaeo":
        laeo = {pair_key(id_map[i], id_map[j]) for i, j in src.laeo_pairs}
        laeo_unknown = all_pairs - known_src
        sa, sa_unknown = set(), set(all_pairs)
    elif ds == "videocoatt":
        laeo, laeo_unknown = set(), set(all_pairs)
        sa = set()
        for members, _ in src.sa_groups:
            sa |= set(combinations(sorted(id_map[m] for m in members), 2))
        sa_unknown = all_pairs - known_src
    else:  # gazefollow: single-person images, no pair labels
        laeo, laeo_unknown = set(), set(all_pairs)
        sa, sa_unknown = set(), set(all_pairs)

    return UnifiedFrameRecord(
        ds, src.clip_id, src.frame_idx, persons, lah, laeo, laeo_unknown - laeo, sa, sa_unknown - sa
    ).validate()


def rederive(rec: UnifiedFrameRecord) -> UnifiedFrameRecord:
    """Recompute LAH/LAEO/SA of a unified record from its own geometry.

    Only geometry-derived datasets are recomputed; datasets whose pair labels
    came from source annotations keep them.
    """
    lah = derive_lah(rec.persons, multi_annotator=rec.dataset == "gazefollow" and any(p.gaze_points for p in rec.persons))
    out = UnifiedFrameRecord(rec.dataset, rec.clip_id, rec.frame_idx, rec.persons, lah,
                             set(rec.laeo), set(rec.laeo_unknown), set(rec.sa), set(rec.sa_unknown))
    if rec.dataset in ("vat", "childplay"):
        out.laeo, out.laeo_unknown = derive_laeo(lah, rec.person_ids)
        out.sa, out.sa_unknown = derive_sa(lah, rec.person_ids)
    return out.validate()


def _mean_point(pts):
    if not pts:
        return None
    return _round_pt((sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts)))


def _require(by_id, pid):
    if pid not in by_id:
        raise ValidationError(f"annotation references unknown person {pid}")
