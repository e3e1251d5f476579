"""1D neural building blocks: convolution, pooling, upsampling, layer norm,
dropout and inception blocks.

All forwards operate on ``[channels, length]`` tensors, preserve sequence
length unless stated otherwise ("same" zero padding, stride 1 everywhere)
and wire their backward closures through the input's gradient tape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .autodiff import Tensor, concat

__all__ = [
    "Conv1dLayer",
    "InceptionBlock",
    "LayerNorm",
    "conv1d",
    "avg_pool",
    "upsample_linear",
    "layer_norm",
    "dropout",
    "inception",
    "pad_length",
    "crop_length",
]


@dataclass
class Conv1dLayer:
    """Same-padded, stride-1 1D convolution parameters.

    weights: [out_channels, in_channels, kernel_size], bias: [out_channels].
    Kernel size must be odd so the zero padding is symmetric.
    """

    weights: Tensor
    bias: Tensor
    dilation: int = 1

    def __post_init__(self):
        if self.weights.data.ndim != 3:
            raise ValueError(f"conv weights must be rank 3, got {self.weights.shape}")
        if self.bias.data.shape != (self.weights.data.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match out_channels "
                f"{self.weights.data.shape[0]}"
            )
        if self.kernel_size % 2 == 0:
            raise ValueError(f"kernel size must be odd, got {self.kernel_size}")
        if self.dilation < 1:
            raise ValueError(f"dilation must be >= 1, got {self.dilation}")

    @property
    def out_channels(self) -> int:
        return self.weights.data.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.data.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weights.data.shape[2]

    def parameters(self) -> list[Tensor]:
        return [self.weights, self.bias]


@dataclass
class InceptionBlock:
    """Parallel convolutions over the same input, concatenated channelwise.

    Branches must share in_channels; the block's out_channels is the sum of
    the branch out_channels.
    """

    branches: list[Conv1dLayer]

    def __post_init__(self):
        if not self.branches:
            raise ValueError("inception block needs at least one branch")
        c_in = self.branches[0].in_channels
        for b in self.branches[1:]:
            if b.in_channels != c_in:
                raise ValueError(
                    f"inception branches disagree on in_channels: {c_in} vs {b.in_channels}"
                )

    @property
    def out_channels(self) -> int:
        return sum(b.out_channels for b in self.branches)

    def parameters(self) -> list[Tensor]:
        return [p for b in self.branches for p in b.parameters()]


@dataclass
class LayerNorm:
    """Per-position normalization across channels, with affine rescale."""

    gamma: Tensor
    beta: Tensor
    eps: float = 1e-5

    def parameters(self) -> list[Tensor]:
        return [self.gamma, self.beta]


def conv1d(x: Tensor, layer: Conv1dLayer) -> Tensor:
    """out[o, t] = bias[o] + sum_{c,k} w[o,c,k] * x[c, t + (k - K//2) * dilation].

    Zero outside [0, T); output length equals input length. Implemented as
    an im2col gather followed by one matmul.
    """
    if x.data.ndim != 2:
        raise ValueError(f"conv1d expects [channels, length], got shape {x.shape}")
    c_in, t = x.data.shape
    if c_in != layer.in_channels:
        raise ValueError(
            f"conv1d: input has {c_in} channels but layer expects {layer.in_channels}"
        )
    k, dil = layer.kernel_size, layer.dilation
    pad = (k // 2) * dil
    # manual zero padding: np.pad costs more Python time than the matmul
    xp = np.zeros((c_in, t + 2 * pad), dtype=np.float64)
    xp[:, pad : pad + t] = x.data
    patches = np.empty((c_in, k, t), dtype=np.float64)
    for kk in range(k):
        patches[:, kk, :] = xp[:, kk * dil : kk * dil + t]
    cols = patches.reshape(c_in * k, t)
    w2 = layer.weights.data.reshape(layer.out_channels, c_in * k)
    out = Tensor(w2 @ cols + layer.bias.data[:, None], x.tape)
    if x.tape is not None:
        def backward(g, acc, x=x, layer=layer, cols=cols, w2=w2,
                     c_in=c_in, t=t, k=k, dil=dil, pad=pad):
            acc(layer.bias, g.sum(axis=1))
            acc(layer.weights, (g @ cols.T).reshape(layer.weights.data.shape))
            dcols = (w2.T @ g).reshape(c_in, k, t)
            dxp = np.zeros((c_in, t + 2 * pad), dtype=np.float64)
            for kk in range(k):
                dxp[:, kk * dil : kk * dil + t] += dcols[:, kk, :]
            acc(x, dxp[:, pad : pad + t] if pad else dxp)
        x.tape.record(out, backward)
    return out


def avg_pool(x: Tensor) -> Tensor:
    """Factor-2 average pooling; a trailing odd sample is its own window."""
    c, t = x.data.shape
    n_pairs = t // 2
    d = x.data
    pairs = 0.5 * (d[:, 0 : 2 * n_pairs : 2] + d[:, 1 : 2 * n_pairs : 2])
    if t % 2:
        out_data = np.concatenate([pairs, d[:, -1:]], axis=1)
    else:
        out_data = pairs
    out = Tensor(out_data, x.tape)
    if x.tape is not None:
        def backward(g, acc, x=x, t=t, n_pairs=n_pairs):
            dx = np.zeros_like(x.data)
            gp = 0.5 * g[:, :n_pairs]
            dx[:, 0 : 2 * n_pairs : 2] = gp
            dx[:, 1 : 2 * n_pairs : 2] = gp
            if t % 2:
                dx[:, -1] = g[:, -1]
            acc(x, dx)
        x.tape.record(out, backward)
    return out


def upsample_linear(x: Tensor) -> Tensor:
    """Factor-2 linear interpolation: out[2t] = x[t], out[2t+1] = midpoint,
    with the final sample edge-clamped."""
    c, t = x.data.shape
    d = x.data
    out_data = np.empty((c, 2 * t), dtype=np.float64)
    out_data[:, 0::2] = d
    out_data[:, 1:-1:2] = 0.5 * (d[:, :-1] + d[:, 1:])
    out_data[:, -1] = d[:, -1]
    out = Tensor(out_data, x.tape)
    if x.tape is not None:
        def backward(g, acc, x=x, t=t):
            g_even = g[:, 0::2]
            g_odd = g[:, 1::2]
            dx = np.array(g_even)
            dx[:, : t - 1] += 0.5 * g_odd[:, : t - 1]
            dx[:, 1:] += 0.5 * g_odd[:, : t - 1]
            dx[:, -1] += g_odd[:, -1]
            acc(x, dx)
        x.tape.record(out, backward)
    return out


def layer_norm(x: Tensor, ln: LayerNorm) -> Tensor:
    """Normalize each depth position across channels, then rescale.

    y[:, t] = gamma * (x[:, t] - mu_t) / sqrt(var_t + eps) + beta
    """
    d = x.data
    c = d.shape[0]
    mu = d.mean(axis=0)
    var = d.var(axis=0)
    inv = 1.0 / np.sqrt(var + ln.eps)
    xhat = (d - mu) * inv
    out = Tensor(ln.gamma.data[:, None] * xhat + ln.beta.data[:, None], x.tape)
    if x.tape is not None:
        def backward(g, acc, x=x, ln=ln, xhat=xhat, inv=inv, c=c):
            acc(ln.gamma, (g * xhat).sum(axis=1))
            acc(ln.beta, g.sum(axis=1))
            dxhat = g * ln.gamma.data[:, None]
            dx = (inv / c) * (
                c * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
            )
            acc(x, dx)
        x.tape.record(out, backward)
    return out


def dropout(x: Tensor, rate: float, rng: Optional[np.random.Generator],
            active: bool = True) -> Tensor:
    """Inverted dropout: kept units are scaled by 1/(1-rate).

    Identity when inactive or rate == 0 (no RNG draw, so disabled dropout
    does not perturb the caller's random stream).
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not active or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("active dropout needs an RNG stream")
    keep = 1.0 - rate
    mask = (rng.random(x.data.shape) >= rate) / keep
    out = Tensor(x.data * mask, x.tape)
    if x.tape is not None:
        def backward(g, acc, x=x, mask=mask):
            acc(x, g * mask)
        x.tape.record(out, backward)
    return out


def inception(x: Tensor, block: InceptionBlock) -> Tensor:
    """Run every branch on ``x`` and concatenate along the channel axis."""
    outs = [conv1d(x, b) for b in block.branches]
    if len(outs) == 1:
        return outs[0]
    return concat(outs, axis=0)


def pad_length(x: Tensor, total: int) -> Tensor:
    """Zero-pad the sequence axis on the right up to length ``total``."""
    c, t = x.data.shape
    if total < t:
        raise ValueError(f"pad_length: target {total} shorter than input {t}")
    if total == t:
        return x
    padded = np.zeros((c, total), dtype=np.float64)
    padded[:, :t] = x.data
    out = Tensor(padded, x.tape)
    if x.tape is not None:
        def backward(g, acc, x=x, t=t):
            acc(x, g[:, :t])
        x.tape.record(out, backward)
    return out


def crop_length(x: Tensor, length: int) -> Tensor:
    """Keep the first ``length`` samples of the sequence axis."""
    c, t = x.data.shape
    if length > t:
        raise ValueError(f"crop_length: target {length} longer than input {t}")
    if length == t:
        return x
    out = Tensor(x.data[:, :length].copy(), x.tape)
    if x.tape is not None:
        def backward(g, acc, x=x, length=length, t=t):
            dx = np.zeros_like(x.data)
            dx[:, :length] = g
            acc(x, dx)
        x.tape.record(out, backward)
    return out
