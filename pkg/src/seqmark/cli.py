"""Command-line surface: synth, train, predict, eval, ablate.

Every command is deterministic given its flags and seed; all tabular
output is CSV so downstream plotting stays external. Errors print to
stderr with an ``error:`` prefix and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, RunConfig
from .data_io import (
    SynthConfig,
    load_checkpoint,
    load_dataset,
    load_picks_csv,
    load_well_csv,
    save_checkpoint,
    save_dataset,
    synthesize_wells,
)
from .evaluation import evaluate_dataset
from .inference import predict_wells, read_predictions_csv, write_curves_csv, \
    write_predictions_csv
from .pipeline import run_ablation, summarize_ablation
from .training import train_marker_model

__all__ = ["main"]

_MODE_ALIASES = {
    "combined": "combined",
    "global": "global_only",
    "global_only": "global_only",
    "local": "local_only",
    "local_only": "local_only",
}


def _parse_markers_spec(spec: str) -> tuple[tuple[str, str], ...]:
    """'UB000:strong,TF200:subtle' -> ((name, kind), ...)."""
    out = []
    for item in spec.split(","):
        name, sep, kind = item.partition(":")
        if not sep or not name:
            raise ConfigError(f"bad marker spec {item!r}, expected NAME:strong|subtle")
        out.append((name.strip(), kind.strip().lower()))
    return tuple(out)


def _run_config(args, extra_overrides: dict[str, str]) -> RunConfig:
    overrides = dict(getattr(args, "set", None) or [])
    overrides.update(extra_overrides)
    return RunConfig.load(getattr(args, "config", None), overrides)


def _load_wells_arg(path_str: str):
    path = Path(path_str)
    if path.is_dir():
        if (path / "wells").is_dir():
            wells, _ = load_dataset(path)
            return wells
        files = sorted(path.glob("*.csv"))
        if not files:
            raise ConfigError(f"{path}: no well CSV files")
        return [load_well_csv(p) for p in files]
    return [load_well_csv(path)]


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    markers = _parse_markers_spec(args.markers)
    channels = tuple(c.strip().upper() for c in args.channels.split(","))
    lo, hi = (int(v) for v in args.length_range.split(","))
    cfg = SynthConfig(
        n_wells=args.wells,
        length_range=(lo, hi),
        channels=channels,
        markers=markers,
        noise_std=args.noise_std,
        trend_amplitude=args.trend,
        seed=args.seed,
    )
    wells, picks = synthesize_wells(cfg)
    manifest = {
        "n_wells": cfg.n_wells,
        "length_range": f"{lo},{hi}",
        "channels": ",".join(channels),
        "markers": args.markers,
        "noise_std": cfg.noise_std,
        "trend_amplitude": cfg.trend_amplitude,
        "depth_step": cfg.depth_step,
        "seed": cfg.seed,
    }
    save_dataset(args.out, wells, picks, manifest)
    print(f"wrote {len(wells)} wells and {len(picks)} picks to {args.out}")
    return 0


def cmd_train(args) -> int:
    overrides: dict[str, str] = {}
    if args.mode is not None:
        overrides["ablation_mode"] = _MODE_ALIASES[args.mode]
    if args.smoothing is not None:
        overrides["smoothing"] = args.smoothing
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    cfg = _run_config(args, overrides)

    wells, picks = load_dataset(args.data)
    if not any(p.marker == args.marker for p in picks):
        raise ConfigError(f"marker {args.marker!r} has no picks in {args.data}")
    net_config = cfg.net_config(len(wells[0].channels))
    net, history = train_marker_model(wells, picks, args.marker, net_config,
                                      cfg.train_config())
    save_checkpoint(net, net.norm_stats, args.out)
    history_path = args.history or str(Path(args.out).with_suffix(".history.csv"))
    history.write_csv(history_path)
    print(
        f"trained {args.marker}: best val loss {history.best_val_loss:.6f} at "
        f"epoch {history.best_epoch} (stopped after {history.stopped_epoch}); "
        f"checkpoint {args.out}"
    )
    return 0


def cmd_predict(args) -> int:
    cfg = _run_config(args, {})
    net, stats = load_checkpoint(args.model)
    wells = _load_wells_arg(args.wells)
    for w in wells:
        if w.channels != stats.channels:
            raise ConfigError(
                f"channel mismatch: checkpoint has {stats.channels}, well "
                f"{w.well_id} has {w.channels}"
            )
    detections = predict_wells(
        net, wells,
        n_passes=args.mc_passes if args.mc_passes is not None else cfg.mc_passes,
        master_seed=cfg.seed,
        prob_threshold=cfg.prob_threshold,
        uncertainty_threshold_ft=cfg.uncertainty_threshold_ft,
    )
    write_predictions_csv(detections, args.out)
    if args.curves:
        write_curves_csv(net, wells, args.curves)
    n_valid = sum(1 for d in detections if d.valid)
    print(f"wrote {len(detections)} predictions ({n_valid} valid) to {args.out}")
    return 0


def cmd_eval(args) -> int:
    detections = read_predictions_csv(args.pred)
    truth = load_picks_csv(args.truth)
    tolerances = tuple(float(v) for v in args.tolerances.split(","))
    report = evaluate_dataset(detections, truth, tolerances)
    report.write_report_csv(args.out)
    hist_path = args.hist or str(Path(args.out).with_suffix(".hist.csv"))
    report.write_histogram_csv(hist_path)
    print(f"F1@2ft = {report.f1_at_2ft!r}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _run_config(args, {})
    wells, picks = load_dataset(args.data)
    markers = [m.strip() for m in args.markers.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    cells = run_ablation(
        wells, picks, markers,
        cfg.net_config(len(wells[0].channels)),
        cfg.train_config(),
        seeds=seeds,
        mc_passes=args.mc_passes if args.mc_passes is not None else cfg.mc_passes,
    )

    def fmt(f1):
        return "NA" if f1 is None else repr(f1)

    with Path(args.out).open("w") as fh:
        fh.write("mode,smoothing,seed,F1\n")
        for c in cells:
            fh.write(f"{c.mode},{'on' if c.smoothing else 'off'},{c.seed},{fmt(c.f1)}\n")
    summary_path = args.summary or str(Path(args.out).with_suffix(".summary.csv"))
    summary = summarize_ablation(cells)
    with Path(summary_path).open("w") as fh:
        fh.write("mode,smoothing,mean_F1\n")
        for mode, smoothing, mean_f1 in summary:
            fh.write(f"{mode},{'on' if smoothing else 'off'},{fmt(mean_f1)}\n")
    for mode, smoothing, mean_f1 in summary:
        print(f"{mode:12s} smoothing={'on' if smoothing else 'off':3s} mean F1 {fmt(mean_f1)}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", default=None,
                   help="flat key = value config file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   type=lambda s: tuple(s.split("=", 1)),
                   help="override one config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqmark",
        description="Soft-attention CNN marker picking: synthesize, train, "
                    "predict, evaluate, ablate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("synth", formatter_class=fmt,
                       help="generate a synthetic labeled well dataset")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--wells", type=int, default=80, help="number of wells")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--channels", default="gr", help="comma list from gr,res,den")
    p.add_argument("--markers", default="UB000:strong,MB000:strong,TF200:subtle",
                   help="comma list of NAME:strong|subtle, top to bottom")
    p.add_argument("--length-range", default="1500,2500",
                   help="well length range in samples, LO,HI")
    p.add_argument("--noise-std", type=float, default=5.0, help="white noise sigma")
    p.add_argument("--trend", type=float, default=0.02,
                   help="cross-well structural trend amplitude (fraction)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", formatter_class=fmt,
                       help="train one marker model on a dataset directory")
    p.add_argument("--data", required=True, help="dataset directory (wells/ + picks.csv)")
    p.add_argument("--marker", required=True, help="marker name to train")
    p.add_argument("--mode", choices=sorted(_MODE_ALIASES), default=None,
                   help="which view feeds the head (default: config value)")
    p.add_argument("--smoothing", choices=["on", "off"], default=None,
                   help="Gaussian label smoothing (default: config value)")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", required=True, help="checkpoint path (.smck)")
    p.add_argument("--history", default=None,
                   help="training history CSV (default: <out>.history.csv)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", formatter_class=fmt,
                       help="detect the marker in wells with a trained checkpoint")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--wells", required=True,
                   help="well CSV file, directory of CSVs, or dataset directory")
    p.add_argument("--mc-passes", type=int, default=None,
                   help="MC dropout passes (default: config value, 30)")
    p.add_argument("--out", required=True, help="predictions CSV")
    p.add_argument("--curves", default=None,
                   help="optional per-depth probability/attention CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", formatter_class=fmt,
                       help="score predictions against expert picks")
    p.add_argument("--pred", required=True, help="predictions CSV from predict")
    p.add_argument("--truth", required=True, help="expert picks CSV")
    p.add_argument("--tolerances", default="1,2,5,10", help="comma list in feet")
    p.add_argument("--out", required=True, help="report CSV")
    p.add_argument("--hist", default=None,
                   help="error histogram CSV (default: <out>.hist.csv)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", formatter_class=fmt,
                       help="sweep view modes x label smoothing across seeds",
                       epilog="SEQMARK_THREADS caps concurrent cells (default 1); "
                              "results are schedule-independent.")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--markers", required=True, help="comma list of marker names")
    p.add_argument("--seeds", required=True, help="comma list of training seeds")
    p.add_argument("--mc-passes", type=int, default=None,
                   help="MC dropout passes per prediction")
    p.add_argument("--out", default="ablation.csv", help="per-cell results CSV")
    p.add_argument("--summary", default=None,
                   help="mean-per-cell CSV (default: <out>.summary.csv)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 130
    except Exception as e:  # surface anything as a clean diagnostic
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
