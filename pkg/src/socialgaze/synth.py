"""Procedural scenes with analytically known gaze for desk-scale tests.

Each person is a disc whose hue encodes the gaze direction and whose dark
pupil sits on the side it looks towards. Targets are either another head or
a white square marker. Labels are produced by the annotation pipeline from
the drawn geometry, never set by hand.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotations.derive import unify
from .annotations.records import SourceAnnotation, SourcePerson, pair_key, write_records
from .data import save_frames
from .errors import ValidationError

DATASET = "synthetic"


@dataclass
class SyntheticScene:
    """What the generator intended for one clip."""

    clip_id: str
    # person id -> ("person", id) or ("marker", index)
    targets: dict
    laeo: set = field(default_factory=set)
    sa: set = field(default_factory=set)


@dataclass
class SyntheticDataset:
    records: list
    frames: dict  # (dataset, clip_id, frame_idx) -> uint8 [S, S, 3]
    scenes: list
    sources: list

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records(self.records, out / "annotations.jsonl")
        save_frames(self.frames, out / "frames")
        return out


def _hue_rgb(angle: float) -> np.ndarray:
    hue = (angle % (2 * math.pi)) / (2 * math.pi)
    return np.array(colorsys.hsv_to_rgb(hue, 1.0, 1.0))


def _place(rng, n, lo, hi, min_dist, avoid=(), avoid_dist=0.0, tries=2000):
    pts = []
    for _ in range(tries):
        if len(pts) == n:
            break
        p = rng.uniform(lo, hi, size=2)
        if all(np.hypot(*(p - q)) >= min_dist for q in pts) and all(
            np.hypot(*(p - q)) >= avoid_dist for q in avoid
        ):
            pts.append(p)
    if len(pts) < n:
        raise ValidationError(f"cannot place {n} persons; lower persons_per_clip or raise image_size")
    return np.array(pts)


def _assign_targets(rng, k, n_markers, laeo_prob, person_prob):
    targets = {}
    order = list(range(k))
    if k >= 2 and rng.random() < laeo_prob:
        i, j = sorted(rng.choice(k, size=2, replace=False).tolist())
        targets[i] = ("person", j)
        targets[j] = ("person", i)
    for i in order:
        if i in targets:
            continue
        if k >= 2 and rng.random() < person_prob:
            others = [j for j in order if j != i]
            targets[i] = ("person", int(others[rng.integers(len(others))]))
        else:
            targets[i] = ("marker", int(rng.integers(n_markers)))
    return targets


def _draw(size, bg, heads, r, dirs, markers, half):
    yy, xx = np.mgrid[0:size, 0:size] + 0.5
    img = np.empty((size, size, 3))
    img[:] = bg
    for m in markers:
        inside = (np.abs(xx - m[0]) <= half) & (np.abs(yy - m[1]) <= half)
        img[inside] = 1.0
    for c, d in zip(heads, dirs):
        angle = math.atan2(d[1], d[0])
        img[(xx - c[0]) ** 2 + (yy - c[1]) ** 2 <= r * r] = _hue_rgb(angle)
        pc = c + 0.55 * r * d
        img[(xx - pc[0]) ** 2 + (yy - pc[1]) ** 2 <= (0.35 * r) ** 2] = 0.0
    return np.round(img * 255).astype(np.uint8)


def synth_generate(
    seed: int,
    n_clips: int,
    persons_per_clip: int,
    T: int,
    image_size: int = 64,
    n_markers: int = 2,
    laeo_prob: float = 0.5,
    person_prob: float = 0.35,
    speed: float = 0.25,
) -> SyntheticDataset:
    """Generate ``n_clips`` clips of ``T`` frames; a pure function of its arguments."""
    if min(n_clips, persons_per_clip, T, image_size, n_markers) < 1:
        raise ValidationError("synth_generate parameters must be positive")
    rng = np.random.default_rng(seed)
    s = image_size
    r = max(2.5, 0.07 * s)
    half = max(1.5, 0.035 * s)
    drift = speed * (T - 1)
    margin = r + drift + 1.0
    records, frames, scenes, sources = [], {}, [], []
    for c in range(n_clips):
        clip_id = f"clip{c:04d}"
        bg = rng.uniform(0.05, 0.25, size=3)
        markers = _place(rng, n_markers, 2 * half, s - 2 * half, 4 * half)
        start = _place(rng, persons_per_clip, margin, s - margin, 4 * r + 2 * drift,
                       avoid=markers, avoid_dist=3 * r + half + drift)
        vel = rng.uniform(-speed, speed, size=(persons_per_clip, 2))
        targets = _assign_targets(rng, persons_per_clip, n_markers, laeo_prob, person_prob)
        scene = SyntheticScene(clip_id, {i: t for i, t in targets.items()})
        for i, (kind, j) in targets.items():
            if kind == "person" and targets.get(j) == ("person", i):
                scene.laeo.add(pair_key(i, j))
        for i in range(persons_per_clip):
            for j in range(i + 1, persons_per_clip):
                ti, tj = targets[i], targets[j]
                if ti == tj and ti[1] not in ((i, j) if ti[0] == "person" else ()):
                    scene.sa.add((i, j))
        marker_boxes = [tuple(float(v) for v in ((m[0] - half) / s, (m[1] - half) / s,
                                                    (m[0] + half) / s, (m[1] + half) / s))
                        for m in markers]
        groups = {}
        for i, (kind, j) in sorted(targets.items()):
            if kind == "marker":
                groups.setdefault(j, []).append(i)
        sa_groups = [(members, m) for m, members in sorted(groups.items()) if len(members) > 1]
        for t in range(T):
            heads = start + vel * t
            points = []
            for i in range(persons_per_clip):
                kind, j = targets[i]
                points.append(heads[j] if kind == "person" else markers[j])
            dirs = []
            for i in range(persons_per_clip):
                v = points[i] - heads[i]
                dirs.append(v / np.hypot(*v))
            frames[(DATASET, clip_id, t)] = _draw(s, bg, heads, r, dirs, markers, half)
            persons = [
                SourcePerson(
                    i,
                    tuple(float(v) for v in ((h[0] - r) / s, (h[1] - r) / s, (h[0] + r) / s, (h[1] + r) / s)),
                    [(float(points[i][0] / s), float(points[i][1] / s))],
                    "in",
                )
                for i, h in enumerate(heads)
            ]
            src = SourceAnnotation(DATASET, clip_id, t, persons, marker_boxes, [], sa_groups)
            sources.append(src)
            records.append(unify(src))
        scenes.append(scene)
    return SyntheticDataset(records, frames, scenes, sources)
