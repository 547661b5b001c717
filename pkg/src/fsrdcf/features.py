"""Sample extraction: patch cropping, grayscale and HOG cell features."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

LUMA = np.array([0.299, 0.587, 0.114])
HOG_CHANNELS = 31


@dataclass(frozen=True)
class FeatureMap:
    planes: np.ndarray  # (d, M, N) real

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def grid(self) -> tuple[int, int]:
        return self.planes.shape[1], self.planes.shape[2]


def to_gray(image) -> np.ndarray:
    """Float grayscale in [0, 1] from an 8-bit gray or RGB array."""
    image = np.asarray(image)
    if image.size == 0:
        raise ValueError("empty image")
    img = image.astype(np.float64)
    if np.issubdtype(image.dtype, np.integer):
        img /= 255.0
    if img.ndim == 3:
        if img.shape[2] == 1:
            img = img[..., 0]
        else:
            img = img[..., :3] @ LUMA
    return img


def crop_patch(image, center, window_size, scale=1.0):
    """Bilinearly resampled ``window_size * scale`` patch around ``center``.

    ``center`` is (x, y) in pixel coordinates, ``window_size`` (W, H) is the
    output size.  Out-of-image samples replicate the border.  Output pixel
    ``j`` reads image position ``center + (j - (W - 1) / 2) * scale``, so the
    middle of the patch lands on ``center`` for training and detection alike.
    """
    W, H = int(window_size[0]), int(window_size[1])
    if W <= 0 or H <= 0 or not scale > 0:
        raise ValueError(f"degenerate window {window_size} at scale {scale}")
    img = to_gray(image)
    cx, cy = center
    xs = cx + (np.arange(W) - (W - 1) / 2.0) * scale
    ys = cy + (np.arange(H) - (H - 1) / 2.0) * scale
    rows, cols = np.meshgrid(ys, xs, indexing="ij")
    return map_coordinates(img, [rows, cols], order=1, mode="nearest")


def cell_grid(window, cell_size):
    """Odd number of cells fitting in ``window`` pixels."""
    n = int(window) // int(cell_size)
    if n < 1:
        raise ValueError(f"patch of {window} px is smaller than one {cell_size} px cell")
    return n if n % 2 == 1 else n - 1


def _trim(patch, cell_size):
    M = cell_grid(patch.shape[0], cell_size)
    N = cell_grid(patch.shape[1], cell_size)
    r0 = (patch.shape[0] - M * cell_size) // 2
    c0 = (patch.shape[1] - N * cell_size) // 2
    return patch[r0 : r0 + M * cell_size, c0 : c0 + N * cell_size], M, N


def cell_average(patch, cell_size):
    H, W = patch.shape
    return patch.reshape(H // cell_size, cell_size, W // cell_size, cell_size).mean(axis=(1, 3))


def gray_feature(patch, cell_size):
    cells = cell_average(patch, cell_size)
    return cells - cells.mean()


def gradient_histogram(patch, cell_size, n_bins=18):
    """Per-cell histogram of contrast-sensitive gradient orientations.

    Gradients are central differences with replicated borders; each pixel
    votes its magnitude into the nearest of ``n_bins`` directions over
    [0, 2 pi).
    """
    padded = np.pad(patch, 1, mode="edge")
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    mag = np.hypot(gx, gy)
    angle = np.mod(np.arctan2(gy, gx), 2 * np.pi)
    bins = np.rint(angle / (2 * np.pi / n_bins)).astype(int) % n_bins
    H, W = patch.shape
    M, N = H // cell_size, W // cell_size
    cell = (np.arange(H)[:, None] // cell_size) * N + np.arange(W)[None, :] // cell_size
    hist = np.bincount((bins * (M * N) + cell).ravel(), weights=mag.ravel(), minlength=n_bins * M * N)
    hist = hist.reshape(n_bins, M, N)
    return hist


def hog_feature(patch, cell_size, clip=0.2):
    """31-channel HOG: 18 signed + 9 unsigned orientations + 4 energies."""
    hist = gradient_histogram(patch, cell_size, 18)
    unsigned = hist[:9] + hist[9:]
    energy = np.sum(unsigned**2, axis=0)
    M, N = energy.shape
    e = np.pad(energy, 1, mode="edge")
    quad = e[:-1, :-1] + e[1:, :-1] + e[:-1, 1:] + e[1:, 1:]
    # the four 2x2 blocks touching each cell
    blocks = [1.0 / np.sqrt(quad[di : di + M, dj : dj + N] + 1e-4) for di in (0, 1) for dj in (0, 1)]
    signed_out = np.zeros_like(hist)
    unsigned_out = np.zeros_like(unsigned)
    texture = np.zeros((4,) + energy.shape)
    for k, nrm in enumerate(blocks):
        hs = np.minimum(hist * nrm, clip)
        hu = np.minimum(unsigned * nrm, clip)
        signed_out += 0.5 * hs
        unsigned_out += 0.5 * hu
        texture[k] = 0.2357 * hu.sum(axis=0)
    return np.concatenate([signed_out, unsigned_out, texture])


def hann2d(M, N):
    return np.outer(np.hanning(M + 2)[1:-1], np.hanning(N + 2)[1:-1])


def extract_features(patch, cell_size=4, mode="hog", window=True) -> FeatureMap:
    """Feature planes with the patch center moved to bin (0, 0).

    ``mode`` is ``"gray"`` (one zero-mean intensity channel) or ``"hog"``
    (intensity plus 31 HOG channels).  The optional Hann window is applied
    before the centering shift, so it peaks on the target as well.
    """
    patch = np.asarray(patch, dtype=np.float64)
    if patch.shape[0] < cell_size or patch.shape[1] < cell_size:
        raise ValueError(f"patch {patch.shape} is smaller than one {cell_size} px cell")
    patch, M, N = _trim(patch, cell_size)
    planes = [gray_feature(patch, cell_size)]
    if mode == "hog":
        planes.extend(hog_feature(patch, cell_size))
    elif mode != "gray":
        raise ValueError(f"unknown feature mode {mode!r}")
    planes = np.stack(planes)
    if window:
        planes = planes * hann2d(M, N)
    return FeatureMap(np.fft.ifftshift(planes, axes=(-2, -1)))
