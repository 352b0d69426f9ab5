"""Source and unified annotation records and their line-delimited JSON encoding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import SchemaError, ValidationError

SCHEMA = "vsgaze-1"
DATASETS = ("gazefollow", "vat", "childplay", "videocoatt", "ucolaeo", "synthetic")
VIDEO_DATASETS = ("vat", "childplay", "videocoatt", "ucolaeo")
GAZE_SOURCES = ("native", "from_object_center", "from_head_center")


def _r(v: float) -> float:
    return round(float(v), 6) + 0.0  # normalises -0.0


def _pt(p):
    return None if p is None else [_r(p[0]), _r(p[1])]


def check_box(box, what="box") -> tuple[float, float, float, float]:
    if len(box) != 4:
        raise ValidationError(f"{what} must have 4 coordinates")
    x0, y0, x1, y1 = (float(v) for v in box)
    if not (0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0):
        raise ValidationError(f"{what} {box} is not a normalized (xmin, ymin, xmax, ymax) box")
    return (x0, y0, x1, y1)


def box_center(box) -> tuple[float, float]:
    return (0.5 * (box[0] + box[2]), 0.5 * (box[1] + box[3]))


def pair_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


# -- source side -------------------------------------------------------------


@dataclass
class SourcePerson:
    person_id: int
    head_box: tuple
    gaze_points: list = field(default_factory=list)
    inout: str | None = None
    speaking: float | None = None


@dataclass
class SourceAnnotation:
    dataset: str
    clip_id: str
    frame_idx: int
    persons: list
    objects: list = field(default_factory=list)  # boxes
    laeo_pairs: list = field(default_factory=list)  # (i, j) person ids
    sa_groups: list = field(default_factory=list)  # (person ids, object index or None)

    @classmethod
    def from_dict(cls, d: dict, dataset: str | None = None) -> "SourceAnnotation":
        ds = dataset or d.get("dataset")
        if ds not in DATASETS:
            raise ValidationError(f"unknown dataset {ds!r}")
        persons = []
        seen = set()
        for p in d.get("persons", []):
            pid = int(p["person_id"])
            if pid in seen:
                raise ValidationError(f"duplicate person_id {pid} in {d.get('clip_id')}:{d.get('frame_idx')}")
            seen.add(pid)
            points = p.get("gaze_points")
            if points is None and p.get("gaze_point") is not None:
                points = [p["gaze_point"]]
            persons.append(
                SourcePerson(
                    pid,
                    check_box(p["head_box"], f"head box of person {pid}"),
                    [tuple(float(v) for v in q) for q in (points or [])],
                    p.get("inout"),
                    p.get("speaking"),
                )
            )
        groups = []
        for g in d.get("sa_groups", []):
            if isinstance(g, dict):
                groups.append((list(g["persons"]), g.get("object")))
            else:
                groups.append((list(g[0]), g[1] if len(g) > 1 else None))
        return cls(
            ds,
            str(d["clip_id"]),
            int(d["frame_idx"]),
            persons,
            [check_box(o["box"] if isinstance(o, dict) else o, "object box") for o in d.get("objects", [])],
            [tuple(int(v) for v in pr) for pr in d.get("laeo_pairs", [])],
            groups,
        )


# -- unified side ------------------------------------------------------------


@dataclass
class UnifiedPerson:
    person_id: int
    head_box: tuple
    gaze_point: tuple | None = None
    inout: str | None = None
    gaze_source: str | None = None
    # every annotator's point when more than one exists (multi-annotator test sets)
    gaze_points: list | None = None
    speaking: float | None = None

    def to_dict(self) -> dict:
        d = {
            "person_id": self.person_id,
            "head_box": [_r(v) for v in self.head_box],
            "gaze_point": _pt(self.gaze_point),
            "inout": self.inout,
            "gaze_source": self.gaze_source,
        }
        if self.gaze_points:
            d["gaze_points"] = [_pt(p) for p in self.gaze_points]
        if self.speaking is not None:
            d["speaking"] = _r(self.speaking)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "UnifiedPerson":
        gp = d.get("gaze_point")
        return cls(
            int(d["person_id"]),
            tuple(float(v) for v in d["head_box"]),
            None if gp is None else (float(gp[0]), float(gp[1])),
            d.get("inout"),
            d.get("gaze_source"),
            [tuple(float(v) for v in p) for p in d["gaze_points"]] if d.get("gaze_points") else None,
            d.get("speaking"),
        )


@dataclass
class UnifiedFrameRecord:
    """One frame of the unified schema.

    ``lah`` maps a person id to its target person id, or to ``None`` for a
    known negative; persons missing from the map are unknown. LAEO and SA
    store positive and unknown unordered pairs; every other pair of persons in
    the frame is a known negative.
    """

    dataset: str
    clip_id: str
    frame_idx: int
    persons: list
    lah: dict = field(default_factory=dict)
    laeo: set = field(default_factory=set)
    laeo_unknown: set = field(default_factory=set)
    sa: set = field(default_factory=set)
    sa_unknown: set = field(default_factory=set)

    @property
    def key(self):
        return (self.dataset, self.clip_id, self.frame_idx)

    @property
    def person_ids(self) -> list[int]:
        return [p.person_id for p in self.persons]

    def person(self, pid: int) -> UnifiedPerson:
        for p in self.persons:
            if p.person_id == pid:
                return p
        raise KeyError(pid)

    def lah_label(self, i: int):
        """Target id, ``None`` (negative) or the string ``"unknown"``."""
        return self.lah[i] if i in self.lah else "unknown"

    def laeo_label(self, i: int, j: int):
        k = pair_key(i, j)
        if k in self.laeo_unknown:
            return None
        return 1 if k in self.laeo else 0

    def sa_label(self, i: int, j: int):
        k = pair_key(i, j)
        if k in self.sa_unknown:
            return None
        return 1 if k in self.sa else 0

    def validate(self) -> "UnifiedFrameRecord":
        ids = self.person_ids
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate person ids in {self.key}")
        for src, tgt in self.lah.items():
            if src not in ids or (tgt is not None and tgt not in ids):
                raise ValidationError(f"LAH entry {src}->{tgt} references a missing person in {self.key}")
        for pairs in (self.laeo, self.laeo_unknown, self.sa, self.sa_unknown):
            for i, j in pairs:
                if i >= j or i not in ids or j not in ids:
                    raise ValidationError(f"bad pair ({i}, {j}) in {self.key}")
        return self

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "dataset": self.dataset,
            "clip_id": self.clip_id,
            "frame_idx": self.frame_idx,
            "persons": [p.to_dict() for p in self.persons],
            "lah": {str(k): self.lah[k] for k in sorted(self.lah)},
            "laeo": {"pos": sorted(map(list, self.laeo)), "unknown": sorted(map(list, self.laeo_unknown))},
            "sa": {"pos": sorted(map(list, self.sa)), "unknown": sorted(map(list, self.sa_unknown))},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "UnifiedFrameRecord":
        if d.get("schema") != SCHEMA:
            raise SchemaError(f"expected schema {SCHEMA!r}, got {d.get('schema')!r}")

        def pairs(x):
            return {pair_key(int(a), int(b)) for a, b in x}

        return cls(
            d["dataset"],
            str(d["clip_id"]),
            int(d["frame_idx"]),
            [UnifiedPerson.from_dict(p) for p in d["persons"]],
            {int(k): (None if v is None else int(v)) for k, v in d["lah"].items()},
            pairs(d["laeo"]["pos"]),
            pairs(d["laeo"]["unknown"]),
            pairs(d["sa"]["pos"]),
            pairs(d["sa"]["unknown"]),
        ).validate()


def write_records(records: Iterable[UnifiedFrameRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.dumps())
            fh.write("\n")


def read_records(path: str | Path) -> list[UnifiedFrameRecord]:
    return list(iter_records(path))


def iter_records(path: str | Path) -> Iterator[UnifiedFrameRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            yield UnifiedFrameRecord.from_dict(d)


def read_source(path: str | Path, dataset: str | None = None) -> list[SourceAnnotation]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if line:
                try:
                    out.append(SourceAnnotation.from_dict(json.loads(line), dataset))
                except (KeyError, TypeError, json.JSONDecodeError) as exc:
                    raise ValidationError(f"{path}:{lineno}: malformed source record ({exc})") from exc
    return out
