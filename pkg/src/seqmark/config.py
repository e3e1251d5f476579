"""Flat key=value run configuration.

One schema covers training, network, supervision, inference and
evaluation knobs. Values come from defaults, then an optional config file,
then command-line overrides, in that order. Unknown keys are rejected so
typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .network import GlobalViewConfig, LocalViewConfig, MarkerNetConfig
from .training import TrainConfig

__all__ = ["RunConfig", "ConfigError", "parse_config_file"]


class ConfigError(ValueError):
    """Unknown key or unparsable value in a run configuration."""


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).split(","))


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(","))


@dataclass
class RunConfig:
    # training
    learning_rate: float = 1e-3
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    test_fraction: float = 0.2
    val_fraction: float = 0.25
    ablation_mode: str = "combined"
    smoothing: bool = True
    # supervision
    label_sigma: float = 3.0
    # network
    dropout: float = 0.1
    fusion_channels: int = 32
    global_channels: tuple[int, ...] = (16, 32, 64)
    global_kernels: tuple[int, ...] = (3, 7, 11)
    local_layers: int = 4
    local_channels: int = 32
    local_kernel: int = 3
    local_dilations: tuple[int, ...] = (1, 2, 4)
    # inference / evaluation
    prob_threshold: float = 0.5
    uncertainty_threshold_ft: float = 5.0
    mc_passes: int = 30
    tolerances: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0)

    _PARSERS = {
        "learning_rate": float,
        "max_epochs": int,
        "patience": int,
        "seed": int,
        "test_fraction": float,
        "val_fraction": float,
        "ablation_mode": str,
        "smoothing": _parse_bool,
        "label_sigma": float,
        "dropout": float,
        "fusion_channels": int,
        "global_channels": _parse_ints,
        "global_kernels": _parse_ints,
        "local_layers": int,
        "local_channels": int,
        "local_kernel": int,
        "local_dilations": _parse_ints,
        "prob_threshold": float,
        "uncertainty_threshold_ft": float,
        "mc_passes": int,
        "tolerances": _parse_floats,
    }

    def set(self, key: str, raw_value: str) -> None:
        parser = self._PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"unknown config key {key!r} "
                              f"(known: {', '.join(sorted(self._PARSERS))})")
        try:
            setattr(self, key, parser(raw_value))
        except (ValueError, TypeError) as e:
            raise ConfigError(f"bad value for {key}: {e}") from None

    @classmethod
    def load(cls, path=None, overrides: Optional[dict[str, str]] = None) -> "RunConfig":
        cfg = cls()
        if path is not None:
            for key, value in parse_config_file(path):
                cfg.set(key, value)
        for key, value in (overrides or {}).items():
            cfg.set(key, value)
        return cfg

    def net_config(self, input_channels: int) -> MarkerNetConfig:
        return MarkerNetConfig(
            input_channels=input_channels,
            fusion_channels=self.fusion_channels,
            dropout=self.dropout,
            fusion_mode=self.ablation_mode,
            global_view=GlobalViewConfig(
                stage_channels=self.global_channels,
                kernel_sizes=self.global_kernels,
            ),
            local_view=LocalViewConfig(
                n_layers=self.local_layers,
                channels=self.local_channels,
                kernel_size=self.local_kernel,
                dilations=self.local_dilations,
            ),
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
            test_fraction=self.test_fraction,
            val_fraction=self.val_fraction,
            ablation_mode=self.ablation_mode,
            smoothing=self.smoothing,
            label_sigma=self.label_sigma,
        )


def parse_config_file(path) -> list[tuple[str, str]]:
    """Read ``key = value`` lines; '#' starts a comment, blanks ignored."""
    path = Path(path)
    pairs = []
    for ln, line in enumerate(path.read_text().splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{ln}: expected 'key = value', got {line!r}")
        key, _, value = body.partition("=")
        pairs.append((key.strip(), value.strip()))
    return pairs
