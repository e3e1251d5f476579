"""Tolerance-based detection metrics: per-pick error, precision at each
tolerance, recall, the aggregate F1 and error histograms.

Precision at tolerance d_T is the fraction of valid detections whose
absolute depth error is within d_T feet (inclusive). Recall is the number
of valid detections over the number of test wells, regardless of where
those detections landed. F1 is the harmonic mean of the across-marker mean
precision at 2 ft and the mean recall.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .data_io import MarkerPick
from .inference import Detection

__all__ = [
    "UndefinedPrecisionError",
    "MarkerMetrics",
    "EvalReport",
    "error_ft",
    "precision_at",
    "recall",
    "f1_score",
    "error_histogram",
    "evaluate_dataset",
    "DEFAULT_TOLERANCES_FT",
    "F1_TOLERANCE_FT",
]

DEFAULT_TOLERANCES_FT = (1.0, 2.0, 5.0, 10.0)
F1_TOLERANCE_FT = 2.0

DEFAULT_HIST_BIN_FT = 0.5
DEFAULT_HIST_MAX_FT = 10.0


class UndefinedPrecisionError(ValueError):
    """Precision over zero valid detections is undefined, not 0 or 1."""


def error_ft(expert_index: int, ml_index: int, depth_step: float = 0.5) -> float:
    """Absolute depth error between the expert and ML picks, in feet."""
    return abs(expert_index - ml_index) * depth_step


def precision_at(errors: Sequence[float], tolerance_ft: float) -> float:
    """Fraction of errors within tolerance (inclusive)."""
    if len(errors) == 0:
        raise UndefinedPrecisionError(
            "precision is undefined with zero valid detections"
        )
    hits = sum(1 for e in errors if e <= tolerance_ft)
    return hits / len(errors)


def recall(n_valid: int, n_wells: int) -> float:
    """Valid detections over test wells."""
    if n_wells < 1:
        raise ValueError(f"need at least one test well, got {n_wells}")
    if not 0 <= n_valid <= n_wells:
        raise ValueError(f"{n_valid} valid detections exceed {n_wells} test wells")
    return n_valid / n_wells


def f1_score(precision_2ft: float, mean_recall: float) -> float:
    """Harmonic mean; defined as 0 when both inputs are 0."""
    if not 0.0 <= precision_2ft <= 1.0 or not 0.0 <= mean_recall <= 1.0:
        raise ValueError(f"precision/recall must be in [0, 1], got "
                         f"({precision_2ft}, {mean_recall})")
    if precision_2ft + mean_recall == 0.0:
        return 0.0
    return 2.0 * precision_2ft * mean_recall / (precision_2ft + mean_recall)


def error_histogram(errors: Sequence[float], bin_width_ft: float = DEFAULT_HIST_BIN_FT,
                    max_ft: float = DEFAULT_HIST_MAX_FT) -> tuple[np.ndarray, np.ndarray]:
    """Counts per half-open bin [k*w, (k+1)*w), plus an overflow bin.

    Returns (edges, counts) with len(counts) == len(edges): the last count
    collects every error >= max_ft.
    """
    if bin_width_ft <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width_ft}")
    n_bins = int(round(max_ft / bin_width_ft))
    edges = np.arange(n_bins + 1) * bin_width_ft
    counts = np.zeros(n_bins + 1, dtype=int)
    for e in errors:
        if e < 0:
            raise ValueError(f"negative error {e}")
        k = int(e / bin_width_ft)
        counts[min(k, n_bins)] += 1
    return edges, counts


@dataclass
class MarkerMetrics:
    marker: str
    n_wells: int
    n_valid: int
    precision: dict[float, Optional[float]]
    recall: float
    errors_ft: list[float]


@dataclass
class EvalReport:
    tolerances: tuple[float, ...]
    per_marker: list[MarkerMetrics]
    mean_precision: dict[float, Optional[float]]
    mean_recall: float
    f1_at_2ft: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray

    def marker(self, name: str) -> MarkerMetrics:
        for m in self.per_marker:
            if m.marker == name:
                return m
        raise KeyError(name)

    def write_report_csv(self, path) -> None:
        """Per-marker and mean rows, then the F1@2ft summary line."""
        def fmt(v):
            return "NA" if v is None else repr(v)

        with Path(path).open("w") as fh:
            fh.write("marker,d_T,precision,recall\n")
            for m in self.per_marker:
                for d in self.tolerances:
                    fh.write(f"{m.marker},{d!r},{fmt(m.precision[d])},{m.recall!r}\n")
            for d in self.tolerances:
                fh.write(f"MEAN,{d!r},{fmt(self.mean_precision[d])},{self.mean_recall!r}\n")
            fh.write(f"F1@2ft,{self.f1_at_2ft!r}\n")

    def write_histogram_csv(self, path) -> None:
        with Path(path).open("w") as fh:
            fh.write("bin_lo,bin_hi,count\n")
            for i, count in enumerate(self.hist_counts):
                lo = self.hist_edges[i]
                hi = self.hist_edges[i + 1] if i + 1 < len(self.hist_edges) else np.inf
                fh.write(f"{float(lo)!r},{float(hi)!r},{int(count)}\n")


def evaluate_dataset(detections: Sequence[Detection],
                     expert_picks: Sequence[MarkerPick],
                     tolerances: Sequence[float] = DEFAULT_TOLERANCES_FT,
                     ) -> EvalReport:
    """Score detections against expert picks.

    Every detection row counts toward its marker's well total; only valid
    detections contribute to the error list. A marker with zero valid
    detections has undefined (None) precision; such markers are excluded
    from the mean precision, and recall still counts their wells.
    """
    tolerances = tuple(float(t) for t in tolerances)
    truth = {(p.well_id, p.marker): p.depth_ft for p in expert_picks}
    markers: dict[str, list[Detection]] = {}
    for d in detections:
        if (d.well_id, d.marker) not in truth:
            raise ValueError(
                f"no expert pick for detected well {d.well_id}, marker {d.marker}"
            )
        markers.setdefault(d.marker, []).append(d)

    per_marker: list[MarkerMetrics] = []
    f1_tols = tolerances if F1_TOLERANCE_FT in tolerances else tolerances + (F1_TOLERANCE_FT,)
    for name in sorted(markers):
        dets = markers[name]
        errors = [
            abs(truth[(d.well_id, d.marker)] - d.depth_ft)
            for d in dets if d.valid
        ]
        precision: dict[float, Optional[float]] = {}
        for d_t in f1_tols:
            precision[d_t] = precision_at(errors, d_t) if errors else None
        per_marker.append(MarkerMetrics(
            marker=name,
            n_wells=len(dets),
            n_valid=len(errors),
            precision=precision,
            recall=recall(len(errors), len(dets)),
            errors_ft=sorted(errors),
        ))

    mean_precision: dict[float, Optional[float]] = {}
    for d_t in f1_tols:
        defined = [m.precision[d_t] for m in per_marker if m.precision[d_t] is not None]
        mean_precision[d_t] = float(np.mean(defined)) if defined else None
    mean_recall = float(np.mean([m.recall for m in per_marker])) if per_marker else 0.0
    p2 = mean_precision.get(F1_TOLERANCE_FT)
    f1 = f1_score(p2 if p2 is not None else 0.0, mean_recall)

    all_errors = [e for m in per_marker for e in m.errors_ft]
    edges, counts = error_histogram(all_errors)
    return EvalReport(
        tolerances=tolerances,
        per_marker=per_marker,
        mean_precision={d: mean_precision[d] for d in tolerances},
        mean_recall=mean_recall,
        f1_at_2ft=f1,
        hist_edges=edges,
        hist_counts=counts,
    )
