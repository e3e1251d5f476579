"""Scratch calibration sweep (not part of the package)."""
import sys
import time

import numpy as np

from seqmark.data_io import SynthConfig, synthesize_wells, apply_norm
from seqmark.network import GlobalViewConfig, LocalViewConfig, MarkerNetConfig
from seqmark.training import TrainConfig, train_marker_model, split_dataset
from seqmark.inference import mc_dropout_detect


def eval_subtle(wells, picks, net_cfg, train_cfg, marker="TF200"):
    t0 = time.time()
    net, hist = train_marker_model(wells, picks, marker, net_cfg, train_cfg)
    dt = time.time() - t0
    ordered = sorted(wells, key=lambda w: w.well_id)
    _, _, test_wells = split_dataset(ordered, train_cfg)
    truth = {(p.well_id, p.marker): p.depth_ft for p in picks}
    valid = ok = 0
    errs = []
    for w in test_wells:
        xn = apply_norm(w, net.norm_stats).samples
        d = mc_dropout_detect(net, xn, w.depth_start, w.depth_step,
                              well_id=w.well_id, n_passes=30, master_seed=train_cfg.seed)
        e = abs(truth[(w.well_id, marker)] - d.depth_ft)
        isvalid = d.probability > 0.5 and d.uncertainty_ft < 5.0
        valid += isvalid
        ok += isvalid and e <= 5.0
        if isvalid:
            errs.append(round(e, 1))
    return dict(time=round(dt, 1), best_val=round(min(hist.val_losses), 4),
                best_epoch=hist.best_epoch, stopped=hist.stopped_epoch,
                valid=valid, within5=ok, errs=errs)


def main():
    variant = sys.argv[1]
    seed = int(sys.argv[2])
    synth = SynthConfig(n_wells=80, length_range=(280, 400), channels=("GR",),
                        markers=(("UB000", "strong"), ("MB000", "strong"),
                                 ("TF200", "subtle")), seed=42)
    wells, picks = synthesize_wells(synth)

    base_gv = GlobalViewConfig(stage_channels=(8, 16, 32), kernel_sizes=(3, 7, 11))
    base_lv = LocalViewConfig(n_layers=3, channels=16, kernel_size=3, dilations=(1, 2, 4))
    net_kw = dict(input_channels=1, fusion_channels=12, dropout=0.1,
                  global_view=base_gv, local_view=base_lv)
    train_kw = dict(learning_rate=2e-3, max_epochs=220, patience=25, seed=seed)

    if variant == "base":
        pass
    elif variant == "sigma5":
        train_kw["label_sigma"] = 5.0
    elif variant == "lr3":
        train_kw["learning_rate"] = 3e-3
    elif variant == "sigma5lr3":
        train_kw["label_sigma"] = 5.0
        train_kw["learning_rate"] = 3e-3
    elif variant == "wide":
        net_kw["fusion_channels"] = 16
        net_kw["local_view"] = LocalViewConfig(n_layers=3, channels=24,
                                               kernel_size=3, dilations=(1, 2, 4))
    else:
        raise SystemExit(f"unknown variant {variant}")

    res = eval_subtle(wells, picks, MarkerNetConfig(**net_kw), TrainConfig(**train_kw))
    print(variant, "seed", seed, res)


if __name__ == "__main__":
    main()
