"""The soft-attention marker localization network.

Two views of the same sequence are fused multiplicatively: a U-Net style
encoder-decoder whose pooling stages grow the receptive field to the whole
well (the global view, squashed through tanh), and a length-preserving
stack of dilated inception convolutions (the local view, left linear).
Their elementwise product feeds a 1x1 convolution + sigmoid head that
emits an independent marker probability per depth sample. One network is
trained per marker.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import autodiff as ad
from .autodiff import GradientTape, Tensor
from .layers import (
    Conv1dLayer,
    InceptionBlock,
    LayerNorm,
    avg_pool,
    conv1d,
    crop_length,
    dropout,
    inception,
    layer_norm,
    pad_length,
    upsample_linear,
)

__all__ = [
    "GlobalViewConfig",
    "LocalViewConfig",
    "MarkerNetConfig",
    "MarkerNet",
    "attention_fuse",
    "attention_scores",
    "MODES",
    "FUSION_MODES",
]

MODES = ("train", "eval", "mc_dropout")
FUSION_MODES = ("combined", "global_only", "local_only")


@dataclass(frozen=True)
class GlobalViewConfig:
    """Encoder-decoder view. One pool stage per entry of stage_channels;
    every stage is an inception block over kernel_sizes."""

    stage_channels: tuple[int, ...] = (16, 32, 64)
    kernel_sizes: tuple[int, ...] = (3, 7, 11)

    @property
    def encoder_depth(self) -> int:
        return len(self.stage_channels)

    @property
    def min_length(self) -> int:
        return 2 ** self.encoder_depth


@dataclass(frozen=True)
class LocalViewConfig:
    """Length-preserving dilated stack. Each layer is an inception block
    with one branch per dilation, all sharing kernel_size."""

    n_layers: int = 4
    channels: int = 32
    kernel_size: int = 3
    dilations: tuple[int, ...] = (1, 2, 4)


@dataclass(frozen=True)
class MarkerNetConfig:
    input_channels: int = 1
    fusion_channels: int = 32
    dropout: float = 0.1
    fusion_mode: str = "combined"
    global_view: GlobalViewConfig = field(default_factory=GlobalViewConfig)
    local_view: LocalViewConfig = field(default_factory=LocalViewConfig)

    def __post_init__(self):
        if self.input_channels not in (1, 2, 3):
            raise ValueError(f"input_channels must be 1, 2 or 3, got {self.input_channels}")
        if self.fusion_mode not in FUSION_MODES:
            raise ValueError(f"fusion_mode must be one of {FUSION_MODES}, got {self.fusion_mode!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")


def _split_channels(total: int, n_branches: int) -> list[int]:
    # Spread out_channels across branches as evenly as possible.
    base, rem = divmod(total, n_branches)
    sizes = [base + (1 if i < rem else 0) for i in range(n_branches)]
    if any(s == 0 for s in sizes):
        raise ValueError(f"{total} channels cannot feed {n_branches} branches")
    return sizes


def _init_conv(rng: np.random.Generator, c_out: int, c_in: int, k: int,
               dilation: int = 1, gain: float = 2.0) -> Conv1dLayer:
    # He-style scaling; gain 2 for relu paths, 1 for linear/tanh projections.
    std = np.sqrt(gain / (c_in * k))
    w = Tensor(rng.normal(0.0, std, size=(c_out, c_in, k)))
    b = Tensor(np.zeros(c_out))
    return Conv1dLayer(w, b, dilation)


def _init_inception(rng, c_in: int, c_out: int, kernel_sizes, dilations=None) -> InceptionBlock:
    if dilations is None:
        dilations = [1] * len(kernel_sizes)
    sizes = _split_channels(c_out, len(kernel_sizes))
    branches = [
        _init_conv(rng, s, c_in, k, d)
        for s, k, d in zip(sizes, kernel_sizes, dilations)
    ]
    return InceptionBlock(branches)


def _init_norm(channels: int) -> LayerNorm:
    return LayerNorm(Tensor(np.ones(channels)), Tensor(np.zeros(channels)))


class _Stage:
    """inception conv -> layer norm bundle used by both views."""

    def __init__(self, block: InceptionBlock, norm: LayerNorm):
        self.block = block
        self.norm = norm

    def parameters(self):
        return self.block.parameters() + self.norm.parameters()


class MarkerNet:
    """Full model for one marker: parameters, config and forward passes.

    A constructed net is deterministic in its seed. Instances are treated
    as immutable once trained; concurrent forward passes are safe as long
    as each caller supplies its own tape and RNG stream.
    """

    def __init__(self, marker_name: str, config: MarkerNetConfig, seed: int = 0):
        self.marker_name = marker_name
        self.config = config
        self.seed = seed
        self.norm_stats = None  # set by training, persisted in checkpoints

        rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 0x5EED])
        gv, lv = config.global_view, config.local_view
        f = config.fusion_channels

        # Global view: encoder stages, mirrored decoder stages, tanh projection.
        self.encoder: list[_Stage] = []
        c = config.input_channels
        for ch in gv.stage_channels:
            self.encoder.append(_Stage(_init_inception(rng, c, ch, gv.kernel_sizes),
                                        _init_norm(ch)))
            c = ch
        self.decoder: list[_Stage] = []
        for i in reversed(range(gv.encoder_depth)):
            skip_ch = gv.stage_channels[i]
            out_ch = gv.stage_channels[max(i - 1, 0)]
            self.decoder.append(_Stage(
                _init_inception(rng, c + skip_ch, out_ch, gv.kernel_sizes),
                _init_norm(out_ch)))
            c = out_ch
        self.global_proj = _init_conv(rng, f, c, 1, gain=1.0)
        # Start with the tanh gate open: a zero-initialized gate multiplies
        # local-view gradients by ~0, which stalls early training.
        self.global_proj.bias.data[...] = 1.0

        # Local view: dilated inception stack, linear projection.
        self.local_stack: list[_Stage] = []
        c = config.input_channels
        for _ in range(lv.n_layers):
            self.local_stack.append(_Stage(
                _init_inception(rng, c, lv.channels,
                                [lv.kernel_size] * len(lv.dilations), lv.dilations),
                _init_norm(lv.channels)))
            c = lv.channels
        self.local_proj = _init_conv(rng, f, c, 1, gain=1.0)

        # Detection head: 1x1 conv to a single channel, sigmoid applied in forward.
        self.head = _init_conv(rng, 1, f, 1, gain=1.0)

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        """Stable (name, tensor) list; order fixed by construction."""
        out: list[tuple[str, Tensor]] = []

        def add_stage(prefix: str, stage: _Stage):
            for bi, branch in enumerate(stage.block.branches):
                out.append((f"{prefix}.b{bi}.weight", branch.weights))
                out.append((f"{prefix}.b{bi}.bias", branch.bias))
            out.append((f"{prefix}.norm.gamma", stage.norm.gamma))
            out.append((f"{prefix}.norm.beta", stage.norm.beta))

        for i, st in enumerate(self.encoder):
            add_stage(f"global.enc{i}", st)
        for i, st in enumerate(self.decoder):
            add_stage(f"global.dec{i}", st)
        out.append(("global.proj.weight", self.global_proj.weights))
        out.append(("global.proj.bias", self.global_proj.bias))
        for i, st in enumerate(self.local_stack):
            add_stage(f"local.layer{i}", st)
        out.append(("local.proj.weight", self.local_proj.weights))
        out.append(("local.proj.bias", self.local_proj.bias))
        out.append(("head.weight", self.head.weights))
        out.append(("head.bias", self.head.bias))
        return out

    def parameter_count(self) -> int:
        return sum(p.size for _, p in self.named_parameters())

    # -- forward passes ----------------------------------------------------

    def _check_input(self, x) -> Tensor:
        if not isinstance(x, Tensor):
            x = Tensor(np.asarray(x, dtype=np.float64))
        if x.data.ndim != 2 or x.data.shape[0] != self.config.input_channels:
            raise ValueError(
                f"expected input shape [{self.config.input_channels}, T], got {x.shape}"
            )
        return x

    def global_features(self, x, mode: str = "eval",
                        rng: Optional[np.random.Generator] = None,
                        tape: Optional[GradientTape] = None) -> Tensor:
        """Encoder-decoder view, projected to fusion channels with tanh.

        The input is zero-padded up to the next multiple of 2**depth so the
        pool/upsample ladder stays aligned for any length, then cropped back.
        """
        x = self._attach(self._check_input(x), tape)
        drop = self._drop_active(mode)
        gv = self.config.global_view
        t = x.data.shape[1]
        if t < gv.min_length:
            raise ValueError(
                f"input length {t} below minimum {gv.min_length} for encoder depth "
                f"{gv.encoder_depth}"
            )
        block = gv.min_length
        padded = ((t + block - 1) // block) * block
        h = pad_length(x, padded)

        skips = []
        for st in self.encoder:
            h = self._stage_forward(h, st, drop, rng)
            skips.append(h)
            h = avg_pool(h)
        for st, skip in zip(self.decoder, reversed(skips)):
            h = upsample_linear(h)
            h = ad.concat([h, skip], axis=0)
            h = self._stage_forward(h, st, drop, rng)
        g = ad.tanh(conv1d(h, self.global_proj))
        return crop_length(g, t)

    def local_features(self, x, mode: str = "eval",
                       rng: Optional[np.random.Generator] = None,
                       tape: Optional[GradientTape] = None) -> Tensor:
        """Dilated local view, projected to fusion channels (no squashing)."""
        x = self._attach(self._check_input(x), tape)
        drop = self._drop_active(mode)
        h = x
        for st in self.local_stack:
            h = self._stage_forward(h, st, drop, rng)
        return conv1d(h, self.local_proj)

    def forward(self, x, mode: str = "eval",
                rng: Optional[np.random.Generator] = None,
                tape: Optional[GradientTape] = None) -> Tensor:
        """Per-depth marker probabilities, shape [T], every value in (0, 1).

        mode "train" and "mc_dropout" keep dropout active; "eval" is
        deterministic. fusion_mode picks which view feeds the head
        (the combined ablation fuses both, the others bypass the product).
        """
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        x = self._check_input(x)
        fm = self.config.fusion_mode
        if fm == "global_only":
            a = self.global_features(x, mode, rng, tape)
        elif fm == "local_only":
            a = self.local_features(x, mode, rng, tape)
        else:
            g = self.global_features(x, mode, rng, tape)
            l = self.local_features(x, mode, rng, tape)
            a = attention_fuse(g, l)
        p = ad.sigmoid(conv1d(a, self.head))
        return ad.reshape(p, (p.data.shape[1],))

    # -- helpers -----------------------------------------------------------

    def _drop_active(self, mode: str) -> bool:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        return mode in ("train", "mc_dropout")

    @staticmethod
    def _attach(x: Tensor, tape: Optional[GradientTape]) -> Tensor:
        if tape is None or x.tape is tape:
            return x
        if x.tape is not None:
            raise ValueError("input tensor already belongs to a different tape")
        return Tensor(x.data, tape)

    def _stage_forward(self, h: Tensor, stage: _Stage, drop: bool,
                       rng: Optional[np.random.Generator]) -> Tensor:
        h = inception(h, stage.block)
        h = layer_norm(h, stage.norm)
        h = ad.relu(h)
        return dropout(h, self.config.dropout, rng, active=drop)


def attention_fuse(g: Tensor, l: Tensor) -> Tensor:
    """Soft attention: elementwise product of the two views.

    The tanh-bounded global features gate the unbounded local features, so
    each local feature can be scaled up, damped, or sign-flipped per depth.
    """
    if g.data.shape != l.data.shape:
        raise ValueError(f"attention_fuse: shape {g.data.shape} vs {l.data.shape}")
    return ad.mul(g, l)


def attention_scores(net: MarkerNet, x) -> np.ndarray:
    """Per-depth attention score: the global view averaged over channels.

    Deterministic eval-mode pass; scores live in (-1, 1).
    """
    g = net.global_features(x, mode="eval")
    return g.data.mean(axis=0)
