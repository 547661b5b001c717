"""Synthetic sequences with exact ground truth.

A smooth random texture (the target) is rendered over a cluttered static
background.  Three motions are available: ``static``, ``translate`` (2 px per
frame) and ``scale`` (1% growth per frame).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

KINDS = ("static", "translate", "scale")


def _texture(rng, shape, sigma):
    t = gaussian_filter(rng.standard_normal(shape), sigma, mode="wrap")
    t -= t.min()
    return t / t.max()


def _background(rng, shape):
    bg = 0.6 * _texture(rng, shape, 6.0) + 0.4 * _texture(rng, shape, 2.0)
    # clutter: random flat rectangles
    for _ in range(25):
        h, w = rng.integers(6, 30, size=2)
        r, c = rng.integers(0, shape[0] - h), rng.integers(0, shape[1] - w)
        bg[r : r + h, c : c + w] = rng.uniform(0.1, 0.9)
    return 0.2 + 0.6 * bg


def trajectory(kind, frames, start=None, size=40.0):
    """Per-frame (cx, cy, side) for a square target, 0-based pixel centers."""
    t = np.arange(frames, dtype=float)
    if kind == "static":
        cx, cy = start or (120.0, 110.0)
        return np.stack([np.full(frames, cx), np.full(frames, cy), np.full(frames, size)], 1)
    if kind == "translate":
        cx, cy = start or (60.0, 60.0)
        return np.stack([cx + 1.6 * t, cy + 1.2 * t, np.full(frames, size)], 1)
    if kind == "scale":
        cx, cy = start or (120.0, 120.0)
        side = 0.8 * size * 1.01**t
        return np.stack([np.full(frames, cx), np.full(frames, cy), side], 1)
    raise ValueError(f"unknown sequence kind {kind!r}; expected one of {KINDS}")


def image_shape(kind):
    return {"static": (220, 240), "translate": (260, 320), "scale": (240, 240)}[kind]


def make_sequence(kind="translate", frames=100, seed=0, noise=0.01):
    """Rendered uint8 frames and 1-based (x, y, w, h) ground-truth boxes."""
    rng = np.random.default_rng(seed)
    shape = image_shape(kind)
    bg = _background(rng, shape)
    tex_size = 64
    tex = 0.05 + 0.9 * _texture(rng, (tex_size, tex_size), 1.5)
    path = trajectory(kind, frames)
    rows, cols = np.mgrid[0 : shape[0], 0 : shape[1]].astype(float)
    images, boxes = [], []
    for cx, cy, side in path:
        u = (rows - cy) * (tex_size / side) + (tex_size - 1) / 2
        v = (cols - cx) * (tex_size / side) + (tex_size - 1) / 2
        inside = (u >= 0) & (u <= tex_size - 1) & (v >= 0) & (v <= tex_size - 1)
        fg = map_coordinates(tex, [u, v], order=1, mode="nearest")
        img = np.where(inside, fg, bg) + noise * rng.standard_normal(shape)
        images.append(np.clip(np.rint(255 * img), 0, 255).astype(np.uint8))
        boxes.append((cx - (side - 1) / 2 + 1, cy - (side - 1) / 2 + 1, side, side))
    return images, np.array(boxes)


def write_sequence(out_dir, kind="translate", frames=100, seed=0):
    """Write an OTB-layout sequence (``img/%04d.png`` + ``groundtruth_rect.txt``)."""
    import cv2

    out = Path(out_dir)
    (out / "img").mkdir(parents=True, exist_ok=True)
    images, boxes = make_sequence(kind, frames, seed)
    for i, img in enumerate(images, 1):
        cv2.imwrite(str(out / "img" / f"{i:04d}.png"), img)
    lines = [",".join(f"{v:.4f}" for v in box) for box in boxes]
    (out / "groundtruth_rect.txt").write_text("\n".join(lines) + "\n")
    return out
