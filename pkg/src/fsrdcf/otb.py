"""OTB-layout sequence loading.

A sequence directory holds an image folder (``img/`` by default) and a
``groundtruth_rect.txt`` with one ``x,y,w,h`` row per frame (comma, tab or
whitespace separated, 1-based top-left corner).
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp"}
GT_NAMES = ("groundtruth_rect.txt", "groundtruth.txt")


class DataError(ValueError):
    """Malformed or missing sequence data."""


@dataclass
class Sequence:
    name: str
    frames: list[Path]
    truth: np.ndarray  # (n, 4); NaN rows mark frames without annotation
    attributes: tuple[str, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.truth)

    def frame(self, i):
        """Decoded frame ``i`` (0-based) or None when unreadable."""
        import cv2

        img = cv2.imread(str(self.frames[i]), cv2.IMREAD_COLOR)
        if img is None:
            return None
        return img[..., ::-1]  # BGR -> RGB


def parse_boxes(text: str, source: str = "<groundtruth>") -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = [p for p in re.split(r"[,\t ]+", line) if p]
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"{source}: line {lineno}: not numeric: {raw!r}") from None
        if len(vals) != 4:
            raise DataError(f"{source}: line {lineno}: expected 4 values, got {len(vals)}")
        if vals[2] < 0 or vals[3] < 0:
            raise DataError(f"{source}: line {lineno}: negative box size")
        if not (vals[2] > 0 and vals[3] > 0):
            vals = [np.nan] * 4  # unannotated frame
        rows.append(vals)
    if not rows:
        raise DataError(f"{source}: no ground-truth rows")
    return np.array(rows, dtype=float)


def _image_dir(root: Path) -> Path:
    if (root / "img").is_dir():
        return root / "img"
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        if any(f.suffix.lower() in IMAGE_SUFFIXES for f in sub.iterdir()):
            return sub
    raise DataError(f"{root}: no image folder")


def load_otb(path) -> Sequence:
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"{root}: not a directory")
    gt_path = next((root / n for n in GT_NAMES if (root / n).is_file()), None)
    if gt_path is None:
        raise DataError(f"{root}: missing ground truth ({' or '.join(GT_NAMES)})")
    truth = parse_boxes(gt_path.read_text(), str(gt_path))
    frames = sorted(f for f in _image_dir(root).iterdir() if f.suffix.lower() in IMAGE_SUFFIXES)
    if not frames:
        raise DataError(f"{root}: zero frames")
    if len(truth) > len(frames):
        log.warning("%s: %d ground-truth rows for %d frames; truncating", root.name, len(truth), len(frames))
        truth = truth[: len(frames)]
    elif len(truth) < len(frames):
        log.warning("%s: %d frames but %d ground-truth rows; evaluating annotated frames only",
                    root.name, len(frames), len(truth))
        frames = frames[: len(truth)]
    attrs = ()
    attr_file = root / "attributes.txt"
    if attr_file.is_file():
        attrs = tuple(a.strip() for a in re.split(r"[,\s]+", attr_file.read_text()) if a.strip())
    return Sequence(root.name, frames, truth, attrs)


def find_sequences(path) -> list[Path]:
    """``path`` itself if it is a sequence, else its sequence subdirectories."""
    root = Path(path)
    if any((root / n).is_file() for n in GT_NAMES):
        return [root]
    seqs = sorted(p for p in root.iterdir() if p.is_dir() and any((p / n).is_file() for n in GT_NAMES))
    if not seqs:
        raise DataError(f"{root}: no OTB sequences found")
    return seqs
