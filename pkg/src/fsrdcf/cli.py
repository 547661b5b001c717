"""Command line entry point: ``track``, ``eval``, ``synth`` and ``bench``.

Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, evaluation, synth
from .config import TrackerConfig
from .otb import DataError, find_sequences, load_otb
from .solver import NumericalError
from .tracker import Tracker

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("fsrdcf")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args) -> TrackerConfig:
    cfg = TrackerConfig.load(args.config) if args.config else TrackerConfig()
    changes = {}
    if getattr(args, "features", None):
        changes["features"] = args.features
    if getattr(args, "scales", None) is not None:
        changes["n_scales"] = args.scales
    if getattr(args, "gs_sweeps", None) is not None:
        changes["gs_sweeps"] = args.gs_sweeps
    if getattr(args, "no_window", False):
        changes["window"] = False
    return cfg.replace(**changes) if changes else cfg


def cmd_track(args):
    try:
        cfg = _config(args)
    except ValueError as err:
        raise UsageError(str(err)) from None
    out = Path(args.out)
    records = []
    for seq_dir in find_sequences(args.seq):
        seq = load_otb(seq_dir)
        log.info("tracking %s (%d frames, %s)", seq.name, len(seq), args.protocol.upper())
        recs = evaluation.run_protocol(
            seq, lambda: Tracker(cfg), args.protocol, config_hash=cfg.digest(), workers=args.threads,
        )
        records.extend(recs)
    evaluation.save_runs(records, out / "runs")
    (out / "config.txt").write_text(cfg.to_text())
    for p in evaluation.report(records, out):
        log.info("wrote %s", p)
    for row in evaluation.summarize(records):
        print(f"{row['sequence']:20s} {row['protocol']}  AUC {100 * row['auc']:5.1f}  OP {100 * row['op']:5.1f}"
              f"  {row['fps']:7.2f} fps  start-up {row['startup_seconds']:.3f} s")


def cmd_eval(args):
    records = evaluation.load_runs(args.runs)
    if not records:
        raise DataError(f"{args.runs}: no run records")
    for p in evaluation.report(records, args.out):
        log.info("wrote %s", p)
    for row in evaluation.summarize(records):
        print(f"{row['sequence']:20s} {row['protocol']}  AUC {100 * row['auc']:5.1f}  OP {100 * row['op']:5.1f}")


def cmd_synth(args):
    out = synth.write_sequence(args.out, args.kind, args.frames, args.seed)
    print(out)


def cmd_bench(args):
    try:
        sizes = [int(s) for s in args.grid_sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --grid-sizes {args.grid_sizes!r}") from None
    try:
        cfg = _config(args)
    except ValueError as err:
        raise UsageError(str(err)) from None
    seq = load_otb(find_sequences(args.seq)[0])
    frame = seq.frame(0)
    if frame is None:
        raise DataError(f"{seq.name}: cannot decode first frame")
    rows = bench.speed_scaling(frame, seq.truth[0], sizes, cfg, args.repeats)
    for r in rows:
        M, N = r["grid"]
        print(f"grid {M:3d}x{N:<3d} d={r['channels']:2d}  start-up {r['startup_seconds']:.3f} s"
              f"  train {1e3 * r['train_seconds']:8.2f} ms  {1e9 * r['seconds_per_unknown']:7.1f} ns/unknown")
    print(f"per-unknown cost ratio (max/min): {bench.linearity_ratio(rows):.2f}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "bench.json").write_text(json.dumps(rows, indent=1) + "\n")


def build_parser():
    p = _Parser(prog="fsrdcf", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("track", help="run the tracker on OTB-format sequences")
    t.add_argument("--seq", required=True, help="sequence directory or a directory of sequences")
    t.add_argument("--config", help="flat key = value config file")
    t.add_argument("--out", required=True)
    t.add_argument("--protocol", choices=("ope", "tre", "sre"), default="ope")
    t.add_argument("--features", choices=("gray", "hog"))
    t.add_argument("--scales", type=int)
    t.add_argument("--gs-sweeps", type=int)
    t.add_argument("--no-window", action="store_true")
    t.add_argument("--threads", type=int, default=1, help="parallel protocol runs")
    t.set_defaults(func=cmd_track)

    e = sub.add_parser("eval", help="recompute metrics from stored runs")
    e.add_argument("--runs", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="write a synthetic sequence with ground truth")
    s.add_argument("--kind", choices=synth.KINDS, default="translate")
    s.add_argument("--frames", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="training cost versus feature-grid size")
    b.add_argument("--seq", required=True)
    b.add_argument("--grid-sizes", default="25,37,49")
    b.add_argument("--config")
    b.add_argument("--features", choices=("gray", "hog"))
    b.add_argument("--repeats", type=int, default=10)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as err:
        print(f"fsrdcf: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, NotADirectoryError) as err:
        print(f"fsrdcf: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"fsrdcf: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"fsrdcf: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
