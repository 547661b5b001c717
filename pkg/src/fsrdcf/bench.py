"""Training-cost and start-up timing at fixed feature-grid sizes."""
from __future__ import annotations

import time

import numpy as np

from .config import TrackerConfig
from .solver import gauss_seidel, update_model
from .tracker import Tracker


def tracker_at_grid(frame, bbox, grid_size, config=None):
    """Tracker initialized on ``frame`` with a feature grid close to ``grid_size`` squared."""
    cfg = config or TrackerConfig()
    w, h = float(bbox[2]), float(bbox[3])
    # enlarge the search area until the grid cap binds
    scale = max(cfg.search_area_scale, 1.01 * grid_size * cfg.cell_size / np.sqrt(w * h))
    tracker = Tracker(cfg.replace(max_grid=grid_size, search_area_scale=scale))
    startup = tracker.init(frame, bbox)
    return tracker, startup


def training_cost(tracker: Tracker, frame, repeats=10):
    """Median wall time of one model update plus the Gauss-Seidel sweeps."""
    x_hat = tracker.sample(frame, tracker.state.center, tracker.state.scale)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        update_model(tracker.model, x_hat)
        gauss_seidel(tracker.model)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def speed_scaling(frame, bbox, grid_sizes=(25, 37, 49), config=None, repeats=10):
    """One row per grid size: grid, channels, start-up and training seconds."""
    rows = []
    for g in grid_sizes:
        tracker, startup = tracker_at_grid(frame, bbox, g, config)
        # warm-up run excludes one-off JIT and allocation cost
        training_cost(tracker, frame, 1)
        cost = training_cost(tracker, frame, repeats)
        M, N = tracker.grid
        d = tracker.model.channels
        rows.append({
            "grid": [M, N],
            "channels": d,
            "unknowns": M * N * d,
            "startup_seconds": startup,
            "train_seconds": cost,
            "seconds_per_unknown": cost / (M * N * d),
        })
    return rows


def linearity_ratio(rows):
    """Largest ratio between per-unknown costs; 1.0 means perfectly linear."""
    per = np.array([r["seconds_per_unknown"] for r in rows])
    return float(per.max() / per.min())
