"""Label construction and the training loss.

A marker depth becomes a one-hot vector over samples; to soften the
extreme positive/negative imbalance the one-hot label is convolved with a
Gaussian kernel and peak-normalized, so the expert depth keeps target 1
and nearby depths get smoothly decaying partial credit. Training minimizes
mean binary cross entropy between the per-depth probabilities and the
(smoothed or raw) target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor

__all__ = ["SmoothedLabel", "one_hot_label", "gaussian_smooth_label", "bce_loss"]

# Targets outside +/- 4 sigma of the peak are exactly zero.
_SUPPORT_SIGMAS = 4.0

_CLAMP = 1e-12


@dataclass(frozen=True)
class SmoothedLabel:
    """Gaussian-smoothed target: peak of exactly 1 at marker_index."""

    values: np.ndarray
    marker_index: int
    sigma: float


def one_hot_label(length: int, marker_index: int) -> np.ndarray:
    """Vector of zeros with a single 1 at the marker sample."""
    if not 0 <= marker_index < length:
        raise ValueError(f"marker index {marker_index} out of range for length {length}")
    y = np.zeros(length, dtype=np.float64)
    y[marker_index] = 1.0
    return y


def gaussian_smooth_label(one_hot: np.ndarray, sigma: float = 3.0) -> SmoothedLabel:
    """Convolve a one-hot label with a Gaussian and renormalize the peak to 1.

    values[t] = exp(-(t - m)^2 / (2 sigma^2)) within +/- 4 sigma of the
    marker index m, zero beyond. Convolving a delta with the kernel and
    dividing by the peak gives exactly this closed form.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    one_hot = np.asarray(one_hot, dtype=np.float64)
    m = int(np.argmax(one_hot))
    t = np.arange(one_hot.size, dtype=np.float64)
    offsets = t - m
    values = np.where(
        np.abs(offsets) <= _SUPPORT_SIGMAS * sigma,
        np.exp(-(offsets * offsets) / (2.0 * sigma * sigma)),
        0.0,
    )
    return SmoothedLabel(values=values, marker_index=m, sigma=float(sigma))


def bce_loss(p, y) -> Tensor:
    """Mean binary cross entropy of probabilities ``p`` against targets ``y``.

    p is clamped into [1e-12, 1 - 1e-12] before the logs, which keeps the
    loss finite (and the gradient zero) at saturated predictions. The mean
    reduction makes the magnitude comparable across variable-length wells.
    """
    if not isinstance(p, Tensor):
        p = Tensor(np.asarray(p, dtype=np.float64))
    y = y.values if isinstance(y, SmoothedLabel) else np.asarray(y, dtype=np.float64)
    if p.data.shape != y.shape:
        raise ValueError(f"bce_loss: prediction shape {p.data.shape} vs target {y.shape}")
    pc = np.clip(p.data, _CLAMP, 1.0 - _CLAMP)
    # log(1-pc) rather than log1p(-pc): at pc = 0.5 both logs are then the
    # same call on the same argument, so the factored form below gives
    # exactly ln 2 for any y.
    log_p = np.log(pc)
    log_q = np.log(1.0 - pc)
    terms = -(log_q + y * (log_p - log_q))
    out = Tensor(terms.mean(), p.tape)
    if p.tape is not None:
        n = y.size
        inside = (p.data > _CLAMP) & (p.data < 1.0 - _CLAMP)
        def backward(g, acc, p=p, y=y, pc=pc, inside=inside, n=n):
            dp = np.where(inside, (pc - y) / (pc * (1.0 - pc) * n), 0.0)
            acc(p, g * dp)
        p.tape.record(out, backward)
    return out
