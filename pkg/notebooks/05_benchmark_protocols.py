"""
One-pass, temporal and spatial robustness runs
==============================================

The evaluation module runs a tracker under three protocols on an
OTB-layout sequence and reduces the runs to success curves.  We write a short
synthetic sequence to disk, load it back like any benchmark sequence, and
compare the protocols.
"""

import tempfile
from pathlib import Path

from fsrdcf import Tracker, TrackerConfig
from fsrdcf.evaluation import report, run_protocol, summarize
from fsrdcf.otb import load_otb
from fsrdcf.synth import write_sequence

work = Path(tempfile.mkdtemp())
seq = load_otb(write_sequence(work / "Drift", "translate", frames=40, seed=4))
print(seq.name, len(seq), "frames")

###############################################################################
# Gray features keep this quick.  TRE starts 20 runs at evenly spaced frames;
# SRE perturbs the first box in 12 ways.

cfg = TrackerConfig(features="gray")
records = []
for protocol in ("ope", "tre", "sre"):
    records += run_protocol(seq, lambda: Tracker(cfg), protocol, config_hash=cfg.digest())

for row in summarize(records):
    print(f"{row['protocol']}: {row['runs']:2d} runs, AUC {row['auc']:.3f}, OP {row['op']:.2f}")

###############################################################################
# The report is plain data: a JSON summary and one CSV curve per protocol.

for path in report(records, work / "results"):
    print(path.relative_to(work))
