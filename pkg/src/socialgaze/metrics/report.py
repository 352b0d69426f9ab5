"""Dataset-level evaluation of prediction records against unified annotations."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from .ap import ap_binary, ap_laeo, ap_lah, laeo_pairs
from .gaze import auc, dist
from .social import (
    decoder_laeo_binary,
    decoder_lah_targets,
    f1,
    f1_from_counts,
    lah_counts,
    pp_social,
)

COLUMNS = ("dist", "ap_io", "f1_lah", "f1_laeo", "ap_sa")
MULTI_COLUMNS = ("auc", "min_dist", "avg_dist")
EXTRA_COLUMNS = ("ap_lah", "ap_laeo")


@dataclass
class _Acc:
    dist: list = field(default_factory=list)
    min_dist: list = field(default_factory=list)
    avg_dist: list = field(default_factory=list)
    auc: list = field(default_factory=list)
    multi: bool = False
    io_s: list = field(default_factory=list)
    io_l: list = field(default_factory=list)
    lah_cand: list = field(default_factory=list)
    lah_gt: list = field(default_factory=list)
    lah_counts: list = field(default_factory=lambda: [0, 0, 0])
    laeo_frames: list = field(default_factory=list)
    laeo_bin: list = field(default_factory=list)
    laeo_lab: list = field(default_factory=list)
    sa_s: list = field(default_factory=list)
    sa_l: list = field(default_factory=list)

    def merge(self, o: "_Acc") -> "_Acc":
        out = _Acc()
        for name in vars(out):
            a, b = getattr(self, name), getattr(o, name)
            if name == "multi":
                out.multi = a or b
            elif name == "lah_counts":
                out.lah_counts = [x + y for x, y in zip(a, b)]
            else:
                setattr(out, name, a + b)
        return out

    def finalize(self) -> dict:
        def mean(x):
            return float(np.mean(x)) if x else math.nan

        row = {
            "dist": mean(self.dist),
            "ap_io": ap_binary(self.io_s, self.io_l) if self.io_s else math.nan,
            "f1_lah": f1_from_counts(*self.lah_counts),
            "f1_laeo": f1(np.concatenate(self.laeo_bin), np.concatenate(self.laeo_lab))
            if self.laeo_bin
            else math.nan,
            "ap_sa": ap_binary(self.sa_s, self.sa_l) if self.sa_s else math.nan,
            "ap_lah": ap_lah(self.lah_cand, self.lah_gt) if self.lah_cand else math.nan,
            "ap_laeo": ap_laeo(self.laeo_frames) if self.laeo_frames else math.nan,
        }
        if self.multi:
            row.update(auc=mean(self.auc), min_dist=mean(self.min_dist), avg_dist=mean(self.avg_dist))
        row["n_persons"] = len(self.dist)
        return row


@dataclass
class MetricReport:
    rows: dict  # dataset -> column -> value; "all" pools every sample

    def to_dict(self) -> dict:
        return {k: dict(v) for k, v in self.rows.items()}

    def dumps(self) -> str:
        def clean(v):
            return None if isinstance(v, float) and math.isnan(v) else v

        return json.dumps({k: {c: clean(v) for c, v in r.items()} for k, r in self.rows.items()}, indent=2)

    def format_table(self) -> str:
        cols = list(COLUMNS)
        if any("auc" in r for r in self.rows.values()):
            cols += list(MULTI_COLUMNS)
        cols += list(EXTRA_COLUMNS)
        lines = [f"{'dataset':<12}" + "".join(f"{c:>10}" for c in cols)]
        for name, r in self.rows.items():
            cells = []
            for c in cols:
                v = r.get(c, math.nan)
                cells.append(f"{'-':>10}" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:>10.3f}")
            lines.append(f"{name:<12}" + "".join(cells))
        return "\n".join(lines)


def evaluate(predictions, annotations, sa_threshold=0.10, decoder_threshold=0.5,
             laeo_keep="one", post_process=False, auc_grid=None) -> MetricReport:
    """Score prediction records against unified annotations.

    With ``post_process`` the social labels are read off predicted gaze points
    (LAH/LAEO by head-box containment, SA by gaze-point distance) instead of
    the decoder scores.
    """
    by_key = {p.key: p for p in predictions}
    accs: dict[str, _Acc] = defaultdict(_Acc)
    matched = 0
    for gt in annotations:
        pred = by_key.get(gt.key)
        if pred is None:
            continue
        matched += 1
        _score_frame(accs[gt.dataset], pred, gt, sa_threshold, decoder_threshold, laeo_keep,
                     post_process, auc_grid)
    if annotations and not matched:
        raise ValidationError("no prediction matches any annotated frame")
    rows = {ds: acc.finalize() for ds, acc in sorted(accs.items())}
    total = _Acc()
    for acc in accs.values():
        total = total.merge(acc)
    rows["all"] = total.finalize()
    return MetricReport(rows)


def _score_frame(acc, pred, gt, sa_threshold, thr, keep, post_process, auc_grid):
    ids = [pid for pid in gt.person_ids if pid in pred.person_ids]
    if not ids:
        return
    idx = [pred.index(pid) for pid in ids]
    n = len(ids)
    pts = pred.gaze_points[idx]
    persons = [gt.person(pid) for pid in ids]

    for k, p in enumerate(persons):
        if p.gaze_point is not None and p.inout != "out":
            gts = p.gaze_points or [p.gaze_point]
            d = dist(pts[k], gts)
            acc.dist.append(d["dist"])
            if p.gaze_points:
                acc.multi = True
                acc.min_dist.append(d["min_dist"])
                acc.avg_dist.append(d["avg_dist"])
                if pred.heatmaps is not None:
                    acc.auc.append(auc(pred.heatmaps[idx[k]], gts, auc_grid))
        if p.inout in ("in", "out"):
            acc.io_s.append(float(pred.inout[idx[k]]))
            acc.io_l.append(1 if p.inout == "in" else 0)

    lah_s = pred.lah[np.ix_(idx, idx)]
    laeo_s = pred.laeo[np.ix_(idx, idx)]
    sa_s = pred.sa[np.ix_(idx, idx)]

    gt_lah = []
    for pid in ids:
        label = gt.lah_label(pid)
        gt_lah.append(label if label in ("unknown", None) else ids.index(label))
    laeo_lab = np.full((n, n), -1, dtype=np.int64)
    sa_lab = np.full((n, n), -1, dtype=np.int64)
    for a in range(n):
        for b in range(n):
            if a != b:
                v = gt.laeo_label(ids[a], ids[b])
                laeo_lab[a, b] = -1 if v is None else v
                v = gt.sa_label(ids[a], ids[b])
                sa_lab[a, b] = -1 if v is None else v
    iu, ju = np.triu_indices(n, 1)

    if post_process:
        boxes = np.array([p.head_box for p in persons])
        pp = pp_social(pts, boxes, sa_threshold)
        pred_lah = [int(j) if j >= 0 else None for j in pp["lah"]]
        laeo_bin = pp["laeo"]
        sa_score = pp["sa"].astype(np.float64)
        # detections for AP variants: binary scores
        for k in range(n):
            cand = np.zeros(n - 1)
            others = [j for j in range(n) if j != k]
            if pred_lah[k] is not None:
                cand[others.index(pred_lah[k])] = 1.0
            acc.lah_cand.append(cand)
            acc.lah_gt.append(_shift(gt_lah[k], k))
        acc.laeo_frames.append((laeo_bin.astype(np.float64), laeo_lab))
    else:
        pred_lah = decoder_lah_targets(lah_s, threshold=thr)
        laeo_bin = decoder_laeo_binary(laeo_s, threshold=thr, keep=keep)
        sa_score = sa_s
        for k in range(n):
            others = [j for j in range(n) if j != k]
            acc.lah_cand.append(lah_s[k, others])
            acc.lah_gt.append(_shift(gt_lah[k], k))
        acc.laeo_frames.append((laeo_s, laeo_lab))

    tp, fp, fn = lah_counts(pred_lah, gt_lah)
    acc.lah_counts = [acc.lah_counts[0] + tp, acc.lah_counts[1] + fp, acc.lah_counts[2] + fn]
    keep_pairs = laeo_lab[iu, ju] >= 0
    acc.laeo_bin.append(laeo_bin[iu, ju][keep_pairs])
    acc.laeo_lab.append(laeo_lab[iu, ju][keep_pairs])
    sa_keep = sa_lab[iu, ju] >= 0
    acc.sa_s.extend(sa_score[iu, ju][sa_keep].tolist())
    acc.sa_l.extend(sa_lab[iu, ju][sa_keep].tolist())


def _shift(target, k):
    """Index into the candidate list of looker ``k`` (self removed)."""
    if target is None or isinstance(target, str):
        return target
    return target if target < k else target - 1
