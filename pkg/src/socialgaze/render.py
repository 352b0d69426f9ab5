"""Static overlays of predictions: head boxes, gaze rays and social labels."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .errors import ValidationError
from .metrics.social import decoder_laeo_binary, decoder_lah_targets

PALETTE = (
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200), (245, 130, 48),
    (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60), (250, 190, 212),
)


def social_labels(pred, threshold: float = 0.5, keep: str = "one") -> dict:
    """Per person id, the list of label strings such as ``"LAH 2"`` or ``"SA 1,3"``."""
    n = len(pred.person_ids)
    ids = pred.person_ids
    lah = decoder_lah_targets(pred.lah, threshold=threshold)
    laeo = decoder_laeo_binary(pred.laeo, threshold=threshold, keep=keep)
    labels = {}
    for k in range(n):
        out = []
        if lah[k] is not None:
            out.append(f"LAH {ids[lah[k]]}")
        partners = [ids[j] for j in range(n) if j != k and laeo[k, j]]
        if partners:
            out.append("LAEO " + ",".join(map(str, partners)))
        sa = [ids[j] for j in range(n) if j != k and pred.sa[k, j] >= threshold]
        if sa:
            out.append("SA " + ",".join(map(str, sa)))
        labels[ids[k]] = out
    return labels


def render_frame(image: np.ndarray, pred, boxes: dict, threshold: float = 0.5,
                 keep: str = "one", scale: int = 1) -> Image.Image:
    """Draw one prediction record onto an RGB frame.

    ``boxes`` maps person id to its normalised head box.
    """
    im = Image.fromarray(np.asarray(image, dtype=np.uint8)).convert("RGB")
    if scale != 1:
        im = im.resize((im.width * scale, im.height * scale), Image.NEAREST)
    w, h = im.size
    draw = ImageDraw.Draw(im)
    font = ImageFont.load_default()
    labels = social_labels(pred, threshold, keep)
    for k, pid in enumerate(pred.person_ids):
        if pid not in boxes:
            raise ValidationError(f"no head box for person {pid}")
        color = PALETTE[pid % len(PALETTE)]
        x0, y0, x1, y1 = boxes[pid]
        box = (x0 * w, y0 * h, x1 * w, y1 * h)
        draw.rectangle(box, outline=color, width=max(1, scale // 2))
        cx, cy = (box[0] + box[2]) / 2, (box[1] + box[3]) / 2
        gx, gy = pred.gaze_points[k][0] * w, pred.gaze_points[k][1] * h
        draw.line((cx, cy, gx, gy), fill=color, width=max(1, scale // 2))
        r = max(2, scale)
        draw.ellipse((gx - r, gy - r, gx + r, gy + r), fill=color)
        text = "\n".join([f"#{pid}"] + labels[pid])
        draw.multiline_text((box[0], box[3] + 1), text, fill=color, font=font, spacing=1)
    return im


def render_predictions(predictions, annotations, frame_store, out_dir, threshold: float = 0.5,
                       keep: str = "one", scale: int = 4) -> list[Path]:
    """Write one PNG per predicted frame under ``out_dir/<dataset>/<clip_id>/``."""
    by_key = {r.key: r for r in annotations}
    out_dir = Path(out_dir)
    written = []
    for pred in predictions:
        rec = by_key.get(pred.key)
        if rec is None:
            raise ValidationError(f"prediction for unannotated frame {pred.key}")
        boxes = {p.person_id: p.head_box for p in rec.persons}
        im = render_frame(frame_store.get(*pred.key), pred, boxes, threshold, keep, scale)
        path = out_dir / pred.dataset / pred.clip_id / f"{pred.frame_idx:06d}.png"
        path.parent.mkdir(parents=True, exist_ok=True)
        im.save(path)
        written.append(path)
    return written
