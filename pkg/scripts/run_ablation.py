#!/usr/bin/env python3
"""Sweep view modes x label smoothing on the synthetic benchmark.

The desk-scale analog of the component ablations: trains every cell of
{combined, global_only, local_only} x {smoothing on, off} across the given
seeds and prints per-cell F1@2ft plus per-cell means. SEQMARK_THREADS caps
how many cells run concurrently.
"""

import argparse
import sys
import time

from run_benchmark import MARKERS, benchmark_inputs

from seqmark.data_io import synthesize_wells
from seqmark.pipeline import run_ablation, summarize_ablation


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", default="42,43,44", help="comma list of training seeds")
    ap.add_argument("--mc-passes", type=int, default=30)
    args = ap.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]

    synth, cfg = benchmark_inputs()
    wells, picks = synthesize_wells(synth)

    t0 = time.time()
    cells = run_ablation(wells, picks, list(MARKERS), cfg.net_config(1),
                         cfg.train_config(), seeds=seeds, mc_passes=args.mc_passes)
    print(f"wall: {time.time() - t0:.0f}s")
    print("mode,smoothing,seed,F1")
    for c in cells:
        f1 = "NA" if c.f1 is None else f"{c.f1:.4f}"
        print(f"{c.mode},{'on' if c.smoothing else 'off'},{c.seed},{f1}")
    print("-- means --")
    for mode, smoothing, mean_f1 in summarize_ablation(cells):
        f1 = "NA" if mean_f1 is None else f"{mean_f1:.4f}"
        print(f"{mode},{'on' if smoothing else 'off'},{f1}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
