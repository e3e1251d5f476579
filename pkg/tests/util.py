"""Shared test oracles and gradient-check plumbing.

Everything here is deliberately independent of the implementation paths it
checks: the convolution oracle is a literal quadruple loop, and gradients
are checked against central finite differences of forward passes only.
"""

from __future__ import annotations

import numpy as np

from seqmark.autodiff import GradientTape, Tensor, finite_difference_gradient


def rel_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """Worst-case elementwise relative error.

    Positions where both gradients are below ``floor`` count as matching:
    they are numerically zero, and central differences cannot resolve
    them to any relative accuracy.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    assert analytic.shape == numeric.shape
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    mask = scale >= floor
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(analytic - numeric)[mask] / scale[mask]))


def check_input_gradient(forward, x_data, rtol: float = 1e-5, eps: float = 1e-5) -> float:
    """Compare tape gradient of sum(forward(x)) w.r.t. x against finite
    differences. ``forward`` maps a Tensor to a Tensor of any shape."""
    from seqmark.autodiff import reduce_sum

    tape = GradientTape()
    x = Tensor(np.asarray(x_data, dtype=np.float64), tape)
    loss = reduce_sum(forward(x))
    grads = tape.backward(loss)
    analytic = grads[x.tid].data
    fd = finite_difference_gradient(
        lambda v: reduce_sum(forward(v)), Tensor(np.asarray(x_data, dtype=np.float64)),
        eps=eps,
    ).data
    err = rel_error(analytic, fd)
    assert err < rtol, f"input gradient off by {err:.3g} (limit {rtol})"
    return err


def check_param_gradients(loss_with_tape, params, rtol: float = 1e-5,
                          eps: float = 1e-5) -> float:
    """Check d(loss)/d(param) for every (name, Tensor) pair.

    ``loss_with_tape(tape)`` must rebuild the forward pass on the given
    tape (or deterministically without one when tape is None) and return
    the scalar loss Tensor.
    """
    tape = GradientTape()
    loss = loss_with_tape(tape)
    grads = tape.backward(loss)
    worst = 0.0
    for name, p in params:
        g = grads.get(p.tid)
        analytic = g.data if g is not None else np.zeros_like(p.data)

        def f(v, p=p):
            saved = p.data.copy()
            p.data[...] = v.data
            try:
                return loss_with_tape(None)
            finally:
                p.data[...] = saved

        fd = finite_difference_gradient(f, Tensor(p.data.copy()), eps=eps).data
        err = rel_error(analytic, fd)
        assert err < rtol, f"gradient of {name} off by {err:.3g} (limit {rtol})"
        worst = max(worst, err)
    return worst


def conv1d_reference(x: np.ndarray, w: np.ndarray, b: np.ndarray,
                     dilation: int) -> np.ndarray:
    """Quadruple-loop same-padded stride-1 convolution, straight from the
    definition: out[o,t] = b[o] + sum_{c,k} w[o,c,k] * x[c, t+(k-K//2)*dil]."""
    c_out, c_in, kk = w.shape
    t_len = x.shape[1]
    out = np.zeros((c_out, t_len))
    for o in range(c_out):
        for t in range(t_len):
            acc = b[o]
            for c in range(c_in):
                for k in range(kk):
                    src = t + (k - kk // 2) * dilation
                    if 0 <= src < t_len:
                        acc += w[o, c, k] * x[c, src]
            out[o, t] = acc
    return out


def recount_metrics(detections, picks, tolerances):
    """Brute-force recount of the evaluation protocol, kept deliberately
    naive: loops and explicit counting, no shared code with the library.

    Returns (per_marker, mean_precision, mean_recall, f1_at_2ft) where
    per_marker maps name -> (n_wells, n_valid, {tol: precision or None},
    recall).
    """
    truth = {}
    for p in picks:
        truth[(p.well_id, p.marker)] = p.depth_ft
    names = sorted({d.marker for d in detections})
    per_marker = {}
    for name in names:
        dets = [d for d in detections if d.marker == name]
        errors = []
        for d in dets:
            if d.valid:
                errors.append(abs(truth[(d.well_id, d.marker)] - d.depth_ft))
        prec = {}
        for tol in tolerances:
            if len(errors) == 0:
                prec[tol] = None
            else:
                hits = 0
                for e in errors:
                    if e <= tol:
                        hits += 1
                prec[tol] = hits / len(errors)
        per_marker[name] = (len(dets), len(errors), prec, len(errors) / len(dets))

    mean_precision = {}
    for tol in tolerances:
        vals = [per_marker[n][2][tol] for n in names if per_marker[n][2][tol] is not None]
        mean_precision[tol] = sum(vals) / len(vals) if vals else None
    mean_recall = sum(per_marker[n][3] for n in names) / len(names) if names else 0.0
    p2 = mean_precision.get(2.0)
    p2 = 0.0 if p2 is None else p2
    f1 = 0.0 if p2 + mean_recall == 0 else 2 * p2 * mean_recall / (p2 + mean_recall)
    return per_marker, mean_precision, mean_recall, f1
