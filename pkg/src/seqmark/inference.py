"""Detection from probability curves, MC-dropout uncertainty and the
validity filter.

The detected depth is the argmax of the per-depth probability curve (first
index on ties). Model uncertainty is the standard deviation of detection
depths over repeated stochastic forward passes with dropout kept active; a
detection is valid when its probability clears a threshold strictly and
its uncertainty stays strictly below the uncertainty threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .autodiff import Tensor
from .data_io import WellLog, apply_norm
from .network import MarkerNet, attention_scores

__all__ = [
    "Detection",
    "detect",
    "mc_dropout_detect",
    "validate_detection",
    "predict_wells",
    "write_predictions_csv",
    "read_predictions_csv",
    "write_curves_csv",
    "DEFAULT_MC_PASSES",
    "DEFAULT_PROB_THRESHOLD",
    "DEFAULT_UNCERTAINTY_THRESHOLD_FT",
]

DEFAULT_MC_PASSES = 30
DEFAULT_PROB_THRESHOLD = 0.5
DEFAULT_UNCERTAINTY_THRESHOLD_FT = 5.0


@dataclass(frozen=True)
class Detection:
    well_id: str
    marker: str
    depth_index: int
    depth_ft: float
    probability: float
    uncertainty_ft: float = 0.0
    valid: bool = False


def detect(p, depth_start: float, depth_step: float,
           well_id: str = "", marker: str = "") -> Detection:
    """Pick the most probable depth; ties break to the smallest index."""
    probs = p.data if isinstance(p, Tensor) else np.asarray(p, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 1:
        raise ValueError(f"detect expects a probability vector, got shape {probs.shape}")
    idx = int(np.argmax(probs))
    return Detection(
        well_id=well_id,
        marker=marker,
        depth_index=idx,
        depth_ft=depth_start + idx * depth_step,
        probability=float(probs[idx]),
    )


def mc_dropout_detect(net: MarkerNet, x, depth_start: float, depth_step: float,
                      well_id: str = "", n_passes: int = DEFAULT_MC_PASSES,
                      master_seed: int = 0) -> Detection:
    """Detection with MC-dropout uncertainty.

    The reported depth and probability come from one deterministic eval
    pass; the uncertainty is the population standard deviation of the
    detection depths over ``n_passes`` stochastic passes. Each pass seeds
    its own stream from (master_seed, pass index), so results do not
    depend on execution order. With dropout rate 0 or a single pass the
    uncertainty is exactly 0.
    """
    if n_passes < 1:
        raise ValueError(f"n_passes must be >= 1, got {n_passes}")
    base = detect(net.forward(x, mode="eval"), depth_start, depth_step,
                  well_id=well_id, marker=net.marker_name)
    if n_passes == 1 or net.config.dropout == 0.0:
        return replace(base, uncertainty_ft=0.0)
    depths = np.empty(n_passes)
    for i in range(n_passes):
        rng = np.random.default_rng([master_seed & 0xFFFFFFFF, 0x6C0D, i])
        d = detect(net.forward(x, mode="mc_dropout", rng=rng), depth_start, depth_step)
        depths[i] = d.depth_ft
    # Identical depths must give exactly zero, not a rounding residue.
    spread = 0.0 if depths.max() == depths.min() else float(np.std(depths))
    return replace(base, uncertainty_ft=spread)


def validate_detection(detection: Detection,
                       prob_threshold: float = DEFAULT_PROB_THRESHOLD,
                       uncertainty_threshold_ft: float = DEFAULT_UNCERTAINTY_THRESHOLD_FT,
                       ) -> Detection:
    """Apply the validity filter: probability strictly above the threshold
    AND uncertainty strictly below the uncertainty threshold."""
    if prob_threshold < 0 or uncertainty_threshold_ft < 0:
        raise ValueError("thresholds must be non-negative")
    ok = (detection.probability > prob_threshold
          and detection.uncertainty_ft < uncertainty_threshold_ft)
    return replace(detection, valid=ok)


def predict_wells(net: MarkerNet, wells: Sequence[WellLog],
                  n_passes: int = DEFAULT_MC_PASSES, master_seed: int = 0,
                  prob_threshold: float = DEFAULT_PROB_THRESHOLD,
                  uncertainty_threshold_ft: float = DEFAULT_UNCERTAINTY_THRESHOLD_FT,
                  ) -> list[Detection]:
    """Normalize, detect and validate every well with one marker net."""
    if net.norm_stats is None:
        raise ValueError("net has no normalization stats; train or load it first")
    out = []
    for w in wells:
        xn = apply_norm(w, net.norm_stats).samples
        d = mc_dropout_detect(net, xn, w.depth_start, w.depth_step,
                              well_id=w.well_id, n_passes=n_passes,
                              master_seed=master_seed)
        out.append(validate_detection(d, prob_threshold, uncertainty_threshold_ft))
    return out


# ---------------------------------------------------------------------------
# CSV surfaces


def write_predictions_csv(detections: Sequence[Detection], path) -> None:
    with Path(path).open("w") as fh:
        fh.write("well_id,marker,depth_ft,probability,uncertainty_ft,valid\n")
        for d in detections:
            fh.write(
                f"{d.well_id},{d.marker},{d.depth_ft!r},{d.probability!r},"
                f"{d.uncertainty_ft!r},{str(d.valid).lower()}\n"
            )


def read_predictions_csv(path) -> list[Detection]:
    import csv

    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows or [h.strip() for h in rows[0]] != [
        "well_id", "marker", "depth_ft", "probability", "uncertainty_ft", "valid",
    ]:
        raise ValueError(f"{path}: not a predictions CSV")
    out = []
    for row in rows[1:]:
        out.append(Detection(
            well_id=row[0],
            marker=row[1],
            depth_index=-1,  # index is not persisted; depth_ft is canonical
            depth_ft=float(row[2]),
            probability=float(row[3]),
            uncertainty_ft=float(row[4]),
            valid=row[5].strip().lower() in ("true", "1"),
        ))
    return out


def write_curves_csv(net: MarkerNet, wells: Sequence[WellLog], path) -> None:
    """Per-depth probability and attention score for each well."""
    if net.norm_stats is None:
        raise ValueError("net has no normalization stats; train or load it first")
    with Path(path).open("w") as fh:
        fh.write("well_id,depth_ft,probability,attention_score\n")
        for w in wells:
            xn = apply_norm(w, net.norm_stats).samples
            probs = net.forward(xn, mode="eval").data
            scores = attention_scores(net, xn)
            for i in range(w.n_samples):
                fh.write(f"{w.well_id},{w.depth_at(i)!r},"
                         f"{float(probs[i])!r},{float(scores[i])!r}\n")
