"""Prediction file: one JSON object per frame, matrices indexed by ``person_ids``."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, ValidationError

PRED_SCHEMA = "vsgaze-pred-1"


def _rounded(a):
    return np.round(np.asarray(a, dtype=np.float64), 6).tolist()


@dataclass
class PredictionRecord:
    dataset: str
    clip_id: str
    frame_idx: int
    person_ids: list
    gaze_points: np.ndarray  # [N, 2]
    inout: np.ndarray  # [N]
    lah: np.ndarray  # [N, N]
    laeo: np.ndarray  # [N, N]
    sa: np.ndarray  # [N, N]
    heatmaps: np.ndarray | None = None  # [N, H, W]

    @property
    def key(self):
        return (self.dataset, self.clip_id, self.frame_idx)

    def index(self, pid: int) -> int:
        return self.person_ids.index(pid)

    def to_dict(self) -> dict:
        d = {
            "schema": PRED_SCHEMA,
            "dataset": self.dataset,
            "clip_id": self.clip_id,
            "frame_idx": self.frame_idx,
            "person_ids": list(self.person_ids),
            "gaze_points": _rounded(self.gaze_points),
            "inout": _rounded(self.inout),
            "lah": _rounded(self.lah),
            "laeo": _rounded(self.laeo),
            "sa": _rounded(self.sa),
        }
        if self.heatmaps is not None:
            d["heatmaps"] = _rounded(self.heatmaps)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PredictionRecord":
        if d.get("schema") != PRED_SCHEMA:
            raise SchemaError(f"expected schema {PRED_SCHEMA!r}, got {d.get('schema')!r}")
        n = len(d["person_ids"])
        rec = cls(
            d["dataset"],
            str(d["clip_id"]),
            int(d["frame_idx"]),
            [int(i) for i in d["person_ids"]],
            np.asarray(d["gaze_points"], dtype=np.float64).reshape(n, 2),
            np.asarray(d["inout"], dtype=np.float64).reshape(n),
            np.asarray(d["lah"], dtype=np.float64).reshape(n, n),
            np.asarray(d["laeo"], dtype=np.float64).reshape(n, n),
            np.asarray(d["sa"], dtype=np.float64).reshape(n, n),
            np.asarray(d["heatmaps"], dtype=np.float64) if d.get("heatmaps") is not None else None,
        )
        return rec


def write_predictions(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), separators=(",", ":")))
            fh.write("\n")


def read_predictions(path) -> list[PredictionRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            out.append(PredictionRecord.from_dict(d))
    return out
