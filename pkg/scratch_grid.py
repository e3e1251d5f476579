"""Scratch: full criteria-6/7/8 grid (not part of the package)."""
import time

import numpy as np

from seqmark.data_io import SynthConfig, synthesize_wells
from seqmark.network import GlobalViewConfig, LocalViewConfig, MarkerNetConfig
from seqmark.pipeline import run_ablation, run_benchmark
from seqmark.training import TrainConfig

MARKERS = ["UB000", "MB000", "TF200"]

synth = SynthConfig(n_wells=80, length_range=(280, 400), channels=("GR",),
                    markers=(("UB000", "strong"), ("MB000", "strong"),
                             ("TF200", "subtle")), seed=42)
wells, picks = synthesize_wells(synth)

net_cfg = MarkerNetConfig(
    input_channels=1, fusion_channels=12, dropout=0.07,
    global_view=GlobalViewConfig(stage_channels=(8, 16, 32), kernel_sizes=(3, 7, 11)),
    local_view=LocalViewConfig(n_layers=3, channels=16, kernel_size=3, dilations=(1, 2, 4)),
)
train_cfg = TrainConfig(learning_rate=2e-3, max_epochs=220, patience=25, seed=42)

t0 = time.time()
res = run_benchmark(wells, picks, MARKERS, net_cfg, train_cfg, mc_passes=30)
print(f"criterion6 wall {time.time()-t0:.0f}s  F1@2ft {res.report.f1_at_2ft:.3f}")
for m in res.report.per_marker:
    print(f"  {m.marker}: M={m.n_valid}/{m.n_wells} p@1={m.precision[1.0]} "
          f"p@2={m.precision[2.0]} p@5={m.precision[5.0]} recall={m.recall:.3f}")

t0 = time.time()
cells = run_ablation(wells, picks, MARKERS, net_cfg, train_cfg,
                     seeds=(42, 43, 44), modes=("combined",),
                     smoothings=(True, False), mc_passes=30, max_threads=2)
cells += run_ablation(wells, picks, MARKERS, net_cfg, train_cfg,
                      seeds=(42, 43, 44), modes=("global_only", "local_only"),
                      smoothings=(True,), mc_passes=30, max_threads=2)
print(f"grid wall {time.time()-t0:.0f}s")
for c in cells:
    print(f"  {c.mode:12s} smoothing={c.smoothing} seed={c.seed} F1={c.f1}")

def mean(vals):
    return sum(vals) / len(vals)

on = mean([c.f1 for c in cells if c.mode == "combined" and c.smoothing])
off = mean([c.f1 for c in cells if c.mode == "combined" and not c.smoothing])
g = mean([c.f1 for c in cells if c.mode == "global_only"])
l = mean([c.f1 for c in cells if c.mode == "local_only"])
print(f"combined/on {on:.3f}  combined/off {off:.3f}  gap {on-off:.3f} (need > 0.05)")
print(f"global {g:.3f}  local {l:.3f}  combined {on:.3f} (need >= max-0.02)")
