"""Online tracking loop: scale-pool detection, sub-bin refinement, model update."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import TrackerConfig
from .features import cell_grid, crop_patch, extract_features
from .regularizer import build_regularizer
from .solver import FilterModel, gauss_seidel, make_target, sample_spectrum, update_model
from .spectral import idft2


@dataclass(frozen=True)
class ScalePool:
    count: int = 7
    step: float = 1.01

    def __post_init__(self):
        if self.count < 1 or self.count % 2 == 0:
            raise ValueError("scale pool size must be a positive odd number")

    @property
    def exponents(self):
        h = (self.count - 1) // 2
        return np.arange(-h, h + 1)

    @property
    def factors(self):
        return self.step ** self.exponents.astype(float)


@dataclass
class TrackState:
    center: tuple[float, float]  # (x, y), 0-based pixels
    target_size: tuple[float, float]  # (w, h) pixels at scale 1
    scale: float = 1.0
    frame_index: int = 0

    def bbox(self):
        """(x, y, w, h) with 1-based top-left corner."""
        w = self.target_size[0] * self.scale
        h = self.target_size[1] * self.scale
        return (float(self.center[0] - (w - 1) / 2 + 1), float(self.center[1] - (h - 1) / 2 + 1), float(w), float(h))


@dataclass(frozen=True)
class Detection:
    value: float
    peak: tuple[int, int]  # (row, col) integer argmax
    offset: tuple[float, float]  # (dx, dy) refined sub-bin offset
    scale_index: int
    skipped: bool = False


def response_map(filters, x_hat, tol=1e-8):
    """Spatial correlation score of a sample spectrum against the filters."""
    x_hat = np.asarray(x_hat)
    if x_hat.ndim == 2:
        x_hat = x_hat[None]
    if x_hat.shape != filters.shape:
        raise ValueError(f"sample {x_hat.shape} does not match filters {filters.shape}")
    resp = idft2(np.sum(x_hat * filters, axis=0))
    scale = max(np.max(np.abs(resp.real)), 1.0)
    if np.max(np.abs(resp.imag)) > tol * scale:
        raise ArithmeticError(f"response has imaginary residue {np.max(np.abs(resp.imag)):.3g}")
    return resp.real


def _interp_terms(response_hat, u, v):
    M, N = response_hat.shape
    ku = 2 * np.pi * np.fft.fftfreq(M)  # radians per bin
    kv = 2 * np.pi * np.fft.fftfreq(N)
    A = response_hat * np.outer(np.exp(1j * ku * u), np.exp(1j * kv * v)) / np.sqrt(M * N)
    value = A.sum().real
    a_u = A.sum(axis=1)
    a_v = A.sum(axis=0)
    grad = np.array([(1j * ku * a_u).sum().real, (1j * kv * a_v).sum().real])
    huu = -(ku**2 * a_u).sum().real
    hvv = -(kv**2 * a_v).sum().real
    huv = -(ku[:, None] * kv[None, :] * A).sum().real
    return value, grad, np.array([[huu, huv], [huv, hvv]])


def interp_value(response_hat, u, v):
    """Trigonometric interpolation of a response at real position (row u, col v)."""
    return _interp_terms(response_hat, u, v)[0]


def _neg_definite(H):
    return H[0, 0] < 0 and np.linalg.det(H) > 0


def subgrid_refine(response_hat, peak_bin, n_iter=5):
    """Newton ascent on the Fourier interpolation of a response.

    ``response_hat`` is the unitary spectrum of the response plane and
    ``peak_bin`` its integer (row, col) argmax.  Returns ``(dx, dy, value)``,
    the column and row offsets from the peak (clamped to one bin) and the
    interpolated value there.  Falls back to the integer peak when the
    Hessian is not negative definite or the ascent ends lower.
    """
    r0, c0 = peak_bin
    base, grad, H = _interp_terms(response_hat, r0, c0)
    if not _neg_definite(H):
        return 0.0, 0.0, base
    pos = np.array([r0, c0], dtype=float)
    for _ in range(n_iter):
        step = -np.linalg.solve(H, grad)
        pos = np.clip(pos + step, [r0 - 1, c0 - 1], [r0 + 1, c0 + 1])
        value, grad, H = _interp_terms(response_hat, *pos)
        if not _neg_definite(H) or np.max(np.abs(step)) < 1e-12:
            break
    value = _interp_terms(response_hat, *pos)[0]
    if value < base:
        return 0.0, 0.0, base
    return pos[1] - c0, pos[0] - r0, value


def wrap_bin(k, n):
    """Circular bin index to signed displacement."""
    return k - n if k > (n - 1) // 2 else k


class Tracker:
    """Spatially regularized correlation filter tracker for one sequence."""

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        self.pool = ScalePool(self.config.n_scales, self.config.scale_step)
        self.state = None
        self.model = None

    # geometry -------------------------------------------------------------
    def _setup_geometry(self, w, h):
        cfg = self.config
        cells_w = cfg.search_area_scale * w / cfg.cell_size
        cells_h = cfg.search_area_scale * h / cfg.cell_size
        extent = np.sqrt(cells_w * cells_h)
        self.base_scale = max(extent / cfg.max_grid, 1.0)
        self.grid = (
            max(cell_grid(cells_h / self.base_scale * cfg.cell_size, cfg.cell_size), 3),
            max(cell_grid(cells_w / self.base_scale * cfg.cell_size, cfg.cell_size), 3),
        )
        M, N = self.grid
        self.window = (N * cfg.cell_size, M * cfg.cell_size)
        self.target_cells = (h / (cfg.cell_size * self.base_scale), w / (cfg.cell_size * self.base_scale))

    def sample(self, frame, center, scale):
        """Feature spectrum of the window around ``center`` at relative ``scale``."""
        cfg = self.config
        patch = crop_patch(frame, center, self.window, self.base_scale * scale)
        fmap = extract_features(patch, cfg.cell_size, cfg.features, cfg.window)
        return sample_spectrum(fmap.planes)

    # protocol -------------------------------------------------------------
    def init(self, frame, bbox):
        """Train on the first frame; returns the start-up time in seconds."""
        t0 = time.perf_counter()
        if frame is None:
            raise ValueError("unreadable first frame")
        x, y, w, h = (float(v) for v in bbox)
        if not (w > 0 and h > 0):
            raise ValueError(f"degenerate bounding box {bbox}")
        rows, cols = np.asarray(frame).shape[:2]
        if x - 1 >= cols or y - 1 >= rows or x - 1 + w <= 0 or y - 1 + h <= 0:
            raise ValueError(f"bounding box {bbox} lies outside the {cols}x{rows} frame")
        cfg = self.config
        self._setup_geometry(w, h)
        center = (x - 1 + (w - 1) / 2, y - 1 + (h - 1) / 2)
        self.state = TrackState(center=center, target_size=(w, h))
        self.reg = build_regularizer(cfg.regularizer, self.grid, self.target_cells)
        _, self.target_perm = make_target(self.grid, self.target_cells, cfg.output_sigma_factor)
        x_hat = self.sample(frame, center, 1.0)
        self.model = FilterModel.first_frame(
            x_hat, self.reg, self.target_perm,
            gamma=cfg.learning_rate, gs_sweeps=cfg.gs_sweeps, symmetric=cfg.symmetric_gs,
        )
        self._first_bbox = tuple(bbox)
        return time.perf_counter() - t0

    def bbox(self):
        if self.state.frame_index == 0:
            return self._first_bbox
        return self.state.bbox()

    def detect(self, frame):
        cfg = self.config
        st = self.state
        factors = self.pool.factors

        def one(k):
            x_hat = self.sample(frame, st.center, st.scale * factors[k])
            resp_hat = np.sum(x_hat * self.model.filters, axis=0)
            resp = response_map(self.model.filters, x_hat)
            peak = np.unravel_index(np.argmax(resp), resp.shape)
            dx, dy, value = subgrid_refine(resp_hat, peak, cfg.newton_iters)
            return Detection(value, (int(peak[0]), int(peak[1])), (dx, dy), k)

        if cfg.threads > 1 and len(factors) > 1:
            with ThreadPoolExecutor(cfg.threads) as ex:
                dets = list(ex.map(one, range(len(factors))))
        else:
            dets = [one(k) for k in range(len(factors))]
        return max(dets, key=lambda d: d.value)

    def step(self, frame):
        """Track one frame; returns ``(bbox, detection, seconds)``."""
        t0 = time.perf_counter()
        st = self.state
        if frame is None:
            st.frame_index += 1
            det = Detection(float("nan"), (0, 0), (0.0, 0.0), -1, skipped=True)
            return self.state.bbox(), det, time.perf_counter() - t0
        det = self.detect(frame)
        cfg = self.config
        M, N = self.grid
        factor = self.pool.factors[det.scale_index]
        cell_px = cfg.cell_size * self.base_scale * st.scale * factor
        dy = wrap_bin(det.peak[0], M) + det.offset[1]
        dx = wrap_bin(det.peak[1], N) + det.offset[0]
        st.center = (st.center[0] + dx * cell_px, st.center[1] + dy * cell_px)
        st.scale *= factor
        st.frame_index += 1
        update_model(self.model, self.sample(frame, st.center, st.scale))
        gauss_seidel(self.model)
        return st.bbox(), det, time.perf_counter() - t0
