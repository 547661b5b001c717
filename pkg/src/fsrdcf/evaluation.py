"""OPE / TRE / SRE protocols, success-plot metrics and result persistence."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .otb import Sequence

log = logging.getLogger(__name__)

THRESHOLDS = np.linspace(0.0, 1.0, 101)
SRE_SHIFT = 0.1
SRE_SCALES = (0.8, 0.9, 1.1, 1.2)


def iou(a, b):
    """Intersection over union of (x, y, w, h) boxes; broadcasts over rows."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ix = np.clip(np.minimum(a[..., 0] + a[..., 2], b[..., 0] + b[..., 2]) - np.maximum(a[..., 0], b[..., 0]), 0, None)
    iy = np.clip(np.minimum(a[..., 1] + a[..., 3], b[..., 1] + b[..., 3]) - np.maximum(a[..., 1], b[..., 1]), 0, None)
    inter = ix * iy
    union = a[..., 2] * a[..., 3] + b[..., 2] * b[..., 3] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(union > 0, inter / np.where(union > 0, union, 1), 0.0)
    return out if out.ndim else float(out)


def center_error(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.hypot(a[..., 0] + a[..., 2] / 2 - b[..., 0] - b[..., 2] / 2,
                    a[..., 1] + a[..., 3] / 2 - b[..., 1] - b[..., 3] / 2)


@dataclass
class SuccessCurve:
    thresholds: np.ndarray
    success: np.ndarray

    @property
    def auc(self) -> float:
        return float(np.mean(self.success))

    @property
    def op(self) -> float:
        return float(self.success[50])


def success_from_overlaps(overlaps) -> SuccessCurve:
    overlaps = np.asarray(overlaps, dtype=float)
    overlaps = overlaps[~np.isnan(overlaps)]
    if overlaps.size == 0:
        return SuccessCurve(THRESHOLDS.copy(), np.zeros_like(THRESHOLDS))
    success = (overlaps[None, :] > THRESHOLDS[:, None]).mean(axis=1)
    return SuccessCurve(THRESHOLDS.copy(), success)


def overlaps(boxes, truth):
    boxes = np.asarray(boxes, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if boxes.shape != truth.shape:
        raise ValueError(f"run has {len(boxes)} boxes but truth has {len(truth)}")
    ov = iou(boxes, truth)
    return np.where(np.isnan(truth).any(axis=1), np.nan, ov)


def success_curve(boxes, truth) -> SuccessCurve:
    """Success plot of predicted boxes against aligned ground truth.

    Frames whose ground truth is missing (NaN) are ignored.
    """
    return success_from_overlaps(overlaps(boxes, truth))


# protocols ---------------------------------------------------------------

def tre_starts(n_frames, n_segments=20):
    """Evenly spaced start frames (0-based) for temporal robustness runs."""
    return [int(s) for s in np.floor(np.arange(n_segments) * n_frames / n_segments)]


def sre_perturbations(box):
    """Twelve perturbed initial boxes: 8 shifts then 4 center-preserving scalings."""
    x, y, w, h = (float(v) for v in box)
    dx, dy = SRE_SHIFT * w, SRE_SHIFT * h
    shifts = [(-dx, 0), (dx, 0), (0, -dy), (0, dy), (-dx, -dy), (dx, -dy), (-dx, dy), (dx, dy)]
    out = [(x + sx, y + sy, w, h) for sx, sy in shifts]
    cx, cy = x + w / 2, y + h / 2
    out += [(cx - s * w / 2, cy - s * h / 2, s * w, s * h) for s in SRE_SCALES]
    return out


@dataclass
class RunRecord:
    sequence: str
    protocol: str
    run_id: int
    start_frame: int
    config_hash: str
    boxes: list
    truth: list
    frame_seconds: list
    startup_seconds: float
    skipped_frames: list = field(default_factory=list)

    def curve(self) -> SuccessCurve:
        return success_curve(np.array(self.boxes), np.array(self.truth))

    def to_json(self) -> str:
        d = asdict(self)
        for key in ("boxes", "truth"):
            d[key] = [[None if np.isnan(v) else v for v in row] for row in d[key]]
        return json.dumps(d, indent=1, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        d = json.loads(text)
        for key in ("boxes", "truth"):
            d[key] = [[np.nan if v is None else v for v in row] for row in d[key]]
        return cls(**d)

    @property
    def filename(self) -> str:
        return f"{self.sequence}_{self.protocol}_{self.run_id:02d}.json"


def run_tracker(seq: Sequence, make_tracker, start=0, init_box=None, protocol="ope", run_id=0,
                config_hash=""):
    """Initialize on frame ``start`` and track to the end of the sequence."""
    if init_box is None:
        init_box = seq.truth[start]
    if np.isnan(init_box).any():
        raise ValueError(f"{seq.name}: no ground truth at frame {start + 1}")
    tracker = make_tracker()
    frame = seq.frame(start)
    if frame is None:
        raise ValueError(f"{seq.name}: cannot decode frame {start + 1}")
    startup = tracker.init(frame, init_box)
    boxes = [tuple(float(v) for v in tracker.bbox())]
    seconds, skipped = [], []
    for i in range(start + 1, len(seq)):
        frame = seq.frame(i)
        if frame is None:
            skipped.append(i)
        box, _, sec = tracker.step(frame)
        boxes.append(tuple(float(v) for v in box))
        seconds.append(sec)
    return RunRecord(
        sequence=seq.name, protocol=protocol, run_id=run_id, start_frame=start,
        config_hash=config_hash, boxes=[list(b) for b in boxes],
        truth=seq.truth[start:].tolist(), frame_seconds=seconds, startup_seconds=startup,
        skipped_frames=skipped,
    )


def protocol_jobs(seq: Sequence, protocol="ope", n_segments=20):
    """(start_frame, init_box, run_id) triples for one protocol."""
    if protocol == "ope":
        return [(0, seq.truth[0], 0)]
    if protocol == "tre":
        jobs = []
        for k, start in enumerate(tre_starts(len(seq), n_segments)):
            if np.isnan(seq.truth[start]).any():
                log.warning("%s: TRE segment %d starts at unannotated frame %d; skipped", seq.name, k, start + 1)
                continue
            jobs.append((start, seq.truth[start], k))
        return jobs
    if protocol == "sre":
        return [(0, np.array(b), k) for k, b in enumerate(sre_perturbations(seq.truth[0]))]
    raise ValueError(f"unknown protocol {protocol!r}")


def run_protocol(seq: Sequence, make_tracker, protocol="ope", n_segments=20, config_hash="", workers=1):
    jobs = protocol_jobs(seq, protocol, n_segments)

    def one(job):
        start, box, k = job
        return run_tracker(seq, make_tracker, start, box, protocol, k, config_hash)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, jobs))
    return [one(j) for j in jobs]


# aggregation and reporting -----------------------------------------------

def aggregate(records) -> SuccessCurve:
    """Success curve over the pooled frames of several runs."""
    return success_from_overlaps(np.concatenate([overlaps(r.boxes, r.truth) for r in records]))


def fps(records) -> float:
    n = sum(len(r.frame_seconds) for r in records)
    total = sum(sum(r.frame_seconds) for r in records)
    return n / total if total > 0 else float("nan")


def _group(records):
    groups = {}
    for r in records:
        groups.setdefault((r.sequence, r.protocol), []).append(r)
    return {k: sorted(v, key=lambda r: r.run_id) for k, v in sorted(groups.items())}


def summarize(records):
    rows = []
    for (name, protocol), runs in _group(records).items():
        curve = aggregate(runs)
        rows.append({
            "sequence": name,
            "protocol": protocol,
            "runs": len(runs),
            "frames": int(sum(len(r.boxes) for r in runs)),
            "auc": round(curve.auc, 6),
            "op": round(curve.op, 6),
            "fps": round(fps(runs), 3),
            "startup_seconds": round(float(np.mean([r.startup_seconds for r in runs])), 4),
            "config_hash": runs[0].config_hash,
        })
    return rows


def write_curve(path, curve: SuccessCurve):
    lines = ["threshold,success"] + [f"{t:.2f},{s:.6f}" for t, s in zip(curve.thresholds, curve.success)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve(path) -> SuccessCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SuccessCurve(data[:, 0], data[:, 1])


def report(records, out_dir):
    """Write ``summary.json`` and one success-curve CSV per sequence and protocol.

    Per protocol an ``overall`` curve averages the per-sequence curves.
    Returns the written paths in a fixed order.
    """
    records = list(records)
    if not records:
        raise ValueError("no run records to report")
    out = Path(out_dir)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    written = []
    per_protocol = {}
    for (name, protocol), runs in _group(records).items():
        curve = aggregate(runs)
        per_protocol.setdefault(protocol, []).append(curve.success)
        p = out / "curves" / f"{name}_{protocol}.csv"
        write_curve(p, curve)
        written.append(p)
    overall = []
    for protocol, curves in sorted(per_protocol.items()):
        mean = SuccessCurve(THRESHOLDS.copy(), np.mean(curves, axis=0))
        p = out / "curves" / f"overall_{protocol}.csv"
        write_curve(p, mean)
        written.append(p)
        overall.append({"protocol": protocol, "sequences": len(curves),
                        "auc": round(mean.auc, 6), "op": round(mean.op, 6)})
    summary = out / "summary.json"
    summary.write_text(json.dumps({"sequences": summarize(records), "overall": overall}, indent=1) + "\n")
    written.insert(0, summary)
    return written


def save_runs(records, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in records:
        p = out / r.filename
        p.write_text(r.to_json() + "\n")
        paths.append(p)
    return paths


def load_runs(run_dir):
    paths = sorted(Path(run_dir).glob("*.json"))
    records = []
    for p in paths:
        if p.name == "summary.json":
            continue
        try:
            records.append(RunRecord.from_json(p.read_text()))
        except (KeyError, TypeError, json.JSONDecodeError) as err:
            raise ValueError(f"{p}: not a run record ({err})") from None
    return records
