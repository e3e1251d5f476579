"""Per-marker training: dataset splitting, Adam, and the early-stopped loop.

Wells train one at a time (they have variable lengths, so a "batch" is a
well). Validation loss decides early stopping and which parameter snapshot
is kept: always the best-validation epoch, never the last.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .autodiff import GradientTape, Tensor
from .data_io import MarkerPick, WellLog, normalize_wells, pick_to_index
from .network import FUSION_MODES, MarkerNet, MarkerNetConfig
from .supervision import bce_loss, gaussian_smooth_label, one_hot_label

__all__ = [
    "TrainConfig",
    "TrainHistory",
    "AdamState",
    "split_dataset",
    "adam_step",
    "train_marker_model",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    test_fraction: float = 0.2
    val_fraction: float = 0.25  # of the train+val pool
    ablation_mode: str = "combined"
    smoothing: bool = True
    label_sigma: float = 3.0

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not 0.0 < self.test_fraction < 1.0 or not 0.0 < self.val_fraction < 1.0:
            raise ValueError("split fractions must be inside (0, 1)")
        if self.ablation_mode not in FUSION_MODES:
            raise ValueError(
                f"ablation_mode must be one of {FUSION_MODES}, got {self.ablation_mode!r}"
            )
        if self.label_sigma <= 0:
            raise ValueError(f"label_sigma must be positive, got {self.label_sigma}")


@dataclass
class TrainHistory:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    best_epoch: int = 0       # 1-based epoch of the kept snapshot
    stopped_epoch: int = 0
    skipped_wells: int = 0

    @property
    def best_val_loss(self) -> float:
        return self.val_losses[self.best_epoch - 1]

    def write_csv(self, path) -> None:
        with Path(path).open("w") as fh:
            fh.write("epoch,train_loss,val_loss\n")
            for i, (tr, va) in enumerate(zip(self.train_losses, self.val_losses), 1):
                fh.write(f"{i},{tr!r},{va!r}\n")


def split_dataset(items: Sequence, config: TrainConfig) -> tuple[list, list, list]:
    """Deterministic seeded shuffle into (train, val, test).

    Test gets floor(n * test_fraction), validation floor of val_fraction of
    the remainder, train everything left over.
    """
    n = len(items)
    if n < 3:
        raise ValueError(f"need at least 3 wells to split, got {n}")
    order = np.random.default_rng(config.seed).permutation(n)
    n_test = int(n * config.test_fraction)
    n_val = int((n - n_test) * config.val_fraction)
    test = [items[i] for i in order[:n_test]]
    val = [items[i] for i in order[n_test : n_test + n_val]]
    train = [items[i] for i in order[n_test + n_val :]]
    return train, val, test


@dataclass
class AdamState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Sequence[tuple[str, Tensor]], grads: dict[int, Tensor],
              state: AdamState, config: TrainConfig) -> None:
    """One bias-corrected Adam update, in place.

    Parameters absent from ``grads`` are treated as zero-gradient: their
    moments decay but a freshly initialized moment stays zero, so untouched
    parameters never move.
    """
    state.step += 1
    b1, b2 = config.beta1, config.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for name, p in params:
        g_t = grads.get(p.tid)
        g = g_t.data if g_t is not None else 0.0
        if g_t is not None and g_t.data.shape != p.data.shape:
            raise ValueError(
                f"gradient shape {g_t.data.shape} does not match parameter "
                f"{name} shape {p.data.shape}"
            )
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p.data -= config.learning_rate * (m / c1) / (np.sqrt(v / c2) + config.adam_eps)


def _labels_for(wells: Sequence[WellLog], pick_by_well: dict[str, MarkerPick],
                config: TrainConfig) -> list[np.ndarray]:
    labels = []
    for w in wells:
        idx = pick_to_index(pick_by_well[w.well_id], w)
        y = one_hot_label(w.n_samples, idx)
        if config.smoothing:
            y = gaussian_smooth_label(y, config.label_sigma).values
        labels.append(y)
    return labels


def train_marker_model(
    wells: Sequence[WellLog],
    picks: Sequence[MarkerPick],
    marker_name: str,
    net_config: MarkerNetConfig,
    train_config: TrainConfig,
) -> tuple[MarkerNet, TrainHistory]:
    """Train one marker's network; returns the best-validation snapshot.

    Wells are split with the config seed, normalization statistics come
    from the training split only (stored on the returned net), and wells
    lacking a pick for this marker are skipped with a warning. The whole
    run is single-threaded and bit-reproducible in (seed, config).
    """
    net_config = _with_mode(net_config, train_config.ablation_mode)
    wells = sorted(wells, key=lambda w: w.well_id)
    train_wells, val_wells, _ = split_dataset(wells, train_config)

    pick_by_well = {p.well_id: p for p in picks if p.marker == marker_name}
    history = TrainHistory()

    def keep(group: list[WellLog]) -> list[WellLog]:
        kept = []
        for w in group:
            if w.well_id in pick_by_well:
                kept.append(w)
            else:
                log.warning("well %s has no %s pick; skipped", w.well_id, marker_name)
                history.skipped_wells += 1
        return kept

    train_wells, val_wells = keep(train_wells), keep(val_wells)
    if not train_wells or not val_wells:
        raise ValueError(
            f"empty split for marker {marker_name}: {len(train_wells)} train / "
            f"{len(val_wells)} val wells with picks"
        )

    normed, stats = normalize_wells(train_wells, list(train_wells) + list(val_wells))
    train_x = [w.samples for w in normed[: len(train_wells)]]
    val_x = [w.samples for w in normed[len(train_wells) :]]
    train_y = _labels_for(train_wells, pick_by_well, train_config)
    val_y = _labels_for(val_wells, pick_by_well, train_config)

    net = MarkerNet(marker_name, net_config, seed=train_config.seed)
    net.norm_stats = stats
    params = net.named_parameters()
    adam = AdamState()
    shuffle_rng = np.random.default_rng([train_config.seed & 0xFFFFFFFF, 0x0DD5])
    drop_rng = np.random.default_rng([train_config.seed & 0xFFFFFFFF, 0xD204])
    tape = GradientTape()

    best_val = np.inf
    snapshot: dict[str, np.ndarray] = {}
    for epoch in range(1, train_config.max_epochs + 1):
        epoch_losses = []
        for i in shuffle_rng.permutation(len(train_x)):
            p = net.forward(train_x[i], mode="train", rng=drop_rng, tape=tape)
            loss = bce_loss(p, train_y[i])
            grads = tape.backward(loss)
            adam_step(params, grads, adam, train_config)
            epoch_losses.append(loss.item())
        history.train_losses.append(float(np.mean(epoch_losses)))

        val_loss = float(np.mean([
            bce_loss(net.forward(x, mode="eval"), y).item()
            for x, y in zip(val_x, val_y)
        ]))
        history.val_losses.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            history.best_epoch = epoch
            snapshot = {name: p.data.copy() for name, p in params}
        history.stopped_epoch = epoch
        if epoch - history.best_epoch >= train_config.patience:
            break

    for name, p in params:
        p.data[...] = snapshot[name]
    return net, history


def _with_mode(cfg: MarkerNetConfig, mode: str) -> MarkerNetConfig:
    return cfg if cfg.fusion_mode == mode else replace(cfg, fusion_mode=mode)
