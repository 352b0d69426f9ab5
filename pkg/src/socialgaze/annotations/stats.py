"""Per-dataset counts of gaze points and social gaze labels."""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations, permutations

from .records import VIDEO_DATASETS

FIELDS = (
    "frames",
    "gaze_points",
    "lah_pos",
    "lah_neg",
    "lah_unknown",
    "laeo_pos",
    "laeo_neg",
    "laeo_unknown",
    "sa_pos",
    "sa_neg",
    "sa_unknown",
)


def _empty():
    return dict.fromkeys(FIELDS, 0)


def frame_counts(rec) -> dict:
    """Counts for one record. LAH is counted over ordered pairs (looker, other)."""
    c = _empty()
    c["frames"] = 1
    c["gaze_points"] = sum(p.gaze_point is not None for p in rec.persons)
    ids = rec.person_ids
    for i, j in permutations(ids, 2):
        label = rec.lah_label(i)
        if label == "unknown":
            c["lah_unknown"] += 1
        elif label == j:
            c["lah_pos"] += 1
        else:
            c["lah_neg"] += 1
    for i, j in combinations(sorted(ids), 2):
        for task, fn in (("laeo", rec.laeo_label), ("sa", rec.sa_label)):
            v = fn(i, j)
            key = "unknown" if v is None else ("pos" if v else "neg")
            c[f"{task}_{key}"] += 1
    return c


def merge_counts(a: dict, b: dict) -> dict:
    return {k: a.get(k, 0) + b.get(k, 0) for k in FIELDS}


def emit_statistics(records) -> dict[str, dict]:
    """Per-dataset counts plus a ``vsgaze`` row (video datasets) and a ``total`` row."""
    table: dict[str, dict] = defaultdict(_empty)
    for rec in records:
        table[rec.dataset] = merge_counts(table[rec.dataset], frame_counts(rec))
    out = dict(sorted(table.items()))
    vs = _empty()
    total = _empty()
    for ds, c in out.items():
        total = merge_counts(total, c)
        if ds in VIDEO_DATASETS:
            vs = merge_counts(vs, c)
    out["vsgaze"] = vs
    out["total"] = total
    return out


def format_statistics(table: dict[str, dict]) -> str:
    header = f"{'dataset':<12}{'points':>9}{'LAH +/-':>16}{'LAEO +/-':>16}{'SA +/-':>16}{'unknown L/E/S':>20}"
    lines = [header]
    for ds, c in table.items():
        lines.append(
            f"{ds:<12}{c['gaze_points']:>9}"
            f"{c['lah_pos']:>8}/{c['lah_neg']:<7}"
            f"{c['laeo_pos']:>8}/{c['laeo_neg']:<7}"
            f"{c['sa_pos']:>8}/{c['sa_neg']:<7}"
            f"{c['lah_unknown']:>8}/{c['laeo_unknown']}/{c['sa_unknown']}"
        )
    return "\n".join(lines)
