"""External head-track files: one JSON object per frame.

``{"clip_id": "...", "frame_idx": 3, "tracks": [{"track_id": 7, "box": [x0, y0, x1, y1]}]}``
"""

import json

from ..errors import ValidationError


def read_tracks(path) -> dict:
    index = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                key = (str(d["clip_id"]), int(d["frame_idx"]))
                index[key] = [(int(t["track_id"]), list(t["box"])) for t in d["tracks"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: malformed track record ({exc})") from exc
    return index
