"""End-to-end drivers: train every marker on a dataset, predict the test
wells, score, and sweep the ablation grid.

The test split is a function of (well ids, seed) only, so every marker
model trained with the same seed shares one test set and their metrics
aggregate cleanly into a single report.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .data_io import MarkerPick, WellLog
from .evaluation import EvalReport, evaluate_dataset
from .inference import (
    DEFAULT_MC_PASSES,
    DEFAULT_PROB_THRESHOLD,
    DEFAULT_UNCERTAINTY_THRESHOLD_FT,
    Detection,
    predict_wells,
)
from .network import MarkerNet, MarkerNetConfig
from .training import TrainConfig, TrainHistory, split_dataset, train_marker_model

__all__ = [
    "BenchmarkResult",
    "AblationCell",
    "run_benchmark",
    "run_ablation",
    "summarize_ablation",
    "THREADS_ENV_VAR",
]

log = logging.getLogger(__name__)

THREADS_ENV_VAR = "SEQMARK_THREADS"

ABLATION_MODES = ("combined", "global_only", "local_only")


@dataclass
class BenchmarkResult:
    report: EvalReport
    nets: dict[str, MarkerNet]
    histories: dict[str, TrainHistory]
    detections: list[Detection]
    test_wells: list[WellLog]


def run_benchmark(
    wells: Sequence[WellLog],
    picks: Sequence[MarkerPick],
    markers: Sequence[str],
    net_config: MarkerNetConfig,
    train_config: TrainConfig,
    mc_passes: int = DEFAULT_MC_PASSES,
    prob_threshold: float = DEFAULT_PROB_THRESHOLD,
    uncertainty_threshold_ft: float = DEFAULT_UNCERTAINTY_THRESHOLD_FT,
    tolerances: Sequence[float] = (1.0, 2.0, 5.0, 10.0),
) -> BenchmarkResult:
    """Train one model per marker, detect on the held-out wells, score."""
    ordered = sorted(wells, key=lambda w: w.well_id)
    _, _, test_wells = split_dataset(ordered, train_config)
    truth_keys = {(p.well_id, p.marker) for p in picks}

    nets: dict[str, MarkerNet] = {}
    histories: dict[str, TrainHistory] = {}
    detections: list[Detection] = []
    for marker in markers:
        net, history = train_marker_model(wells, picks, marker, net_config, train_config)
        nets[marker] = net
        histories[marker] = history
        scored = [w for w in test_wells if (w.well_id, marker) in truth_keys]
        detections.extend(predict_wells(
            net, scored, n_passes=mc_passes, master_seed=train_config.seed,
            prob_threshold=prob_threshold,
            uncertainty_threshold_ft=uncertainty_threshold_ft,
        ))
    report = evaluate_dataset(detections, picks, tolerances)
    return BenchmarkResult(report, nets, histories, detections, test_wells)


@dataclass(frozen=True)
class AblationCell:
    mode: str
    smoothing: bool
    seed: int
    f1: Optional[float]  # None when the cell failed


def _cell_key(cell: AblationCell) -> tuple:
    return (ABLATION_MODES.index(cell.mode), not cell.smoothing, cell.seed)


def run_ablation(
    wells: Sequence[WellLog],
    picks: Sequence[MarkerPick],
    markers: Sequence[str],
    net_config: MarkerNetConfig,
    train_config: TrainConfig,
    seeds: Sequence[int],
    modes: Sequence[str] = ABLATION_MODES,
    smoothings: Sequence[bool] = (True, False),
    mc_passes: int = DEFAULT_MC_PASSES,
    max_threads: Optional[int] = None,
) -> list[AblationCell]:
    """Sweep {modes} x {smoothing on/off} x seeds; each cell is one fully
    seeded benchmark run reduced to its F1@2ft.

    Cells are independent; SEQMARK_THREADS (default 1) caps how many run
    concurrently. Failures are logged and recorded as F1=None so the rest
    of the sweep still completes. Results come back sorted by (mode,
    smoothing, seed) regardless of schedule.
    """
    if max_threads is None:
        max_threads = int(os.environ.get(THREADS_ENV_VAR, "1"))
    jobs = [
        (mode, smoothing, seed)
        for mode in modes
        for smoothing in smoothings
        for seed in seeds
    ]

    def run_cell(job) -> AblationCell:
        mode, smoothing, seed = job
        cfg = replace(train_config, ablation_mode=mode, smoothing=smoothing, seed=seed)
        try:
            result = run_benchmark(wells, picks, markers, net_config, cfg,
                                   mc_passes=mc_passes)
            return AblationCell(mode, smoothing, seed, result.report.f1_at_2ft)
        except Exception:
            log.exception("ablation cell %s failed", job)
            return AblationCell(mode, smoothing, seed, None)

    if max_threads > 1:
        with ThreadPoolExecutor(max_workers=max_threads) as pool:
            cells = list(pool.map(run_cell, jobs))
    else:
        cells = [run_cell(j) for j in jobs]
    return sorted(cells, key=_cell_key)


def summarize_ablation(cells: Sequence[AblationCell]) -> list[tuple[str, bool, Optional[float]]]:
    """Mean F1 per (mode, smoothing) cell; None when every seed failed."""
    groups: dict[tuple[str, bool], list[float]] = {}
    order: list[tuple[str, bool]] = []
    for c in cells:
        key = (c.mode, c.smoothing)
        if key not in order:
            order.append(key)
        if c.f1 is not None:
            groups.setdefault(key, []).append(c.f1)
    out = []
    for key in order:
        vals = groups.get(key)
        mean = sum(vals) / len(vals) if vals else None
        out.append((key[0], key[1], mean))
    return out
