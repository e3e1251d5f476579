"""Reverse-mode automatic differentiation over dense float64 tensors.

A flat :class:`GradientTape` records every differentiable operation in
execution order, which for a feed-forward network is already a topological
order, so ``backward()`` is a single reverse sweep over the node list.
Only the operations the sequence models need are provided: elementwise
arithmetic, tanh/sigmoid/relu, sum/mean reductions, concatenation and
reshape. Layer kernels register their own backward closures through
``GradientTape.record``.

Everything is float64: the models are small and the extra precision keeps
finite-difference gradient checks sharp.
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "GradientTape",
    "add",
    "sub",
    "mul",
    "tanh",
    "sigmoid",
    "relu",
    "reduce_sum",
    "reduce_mean",
    "concat",
    "reshape",
    "finite_difference_gradient",
    "set_finite_checks",
]

_next_id = itertools.count(1)

# Debug switch: when on, every op output is checked for NaN/Inf.
_check_finite = False


def set_finite_checks(enabled: bool) -> None:
    """Toggle NaN/Inf checking of op outputs (off by default; costs time)."""
    global _check_finite
    _check_finite = bool(enabled)


class Tensor:
    """Dense float64 array of rank <= 3, optionally tracked by a tape.

    Treat instances as immutable once they participate in a forward pass;
    the only sanctioned mutation is the optimizer updating parameter
    buffers in place between steps.
    """

    __slots__ = ("data", "tape", "tid")

    def __init__(self, data, tape: Optional["GradientTape"] = None):
        # asarray, not ascontiguousarray: the latter promotes scalars to rank 1
        arr = np.asarray(data, dtype=np.float64, order="C")
        if arr.ndim > 3:
            raise ValueError(f"rank {arr.ndim} tensor not supported (max rank 3)")
        if any(n == 0 for n in arr.shape):
            raise ValueError(f"zero extent in shape {arr.shape}")
        self.data = arr
        self.tape = tape
        self.tid = next(_next_id)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() on tensor of shape {self.data.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, tid={self.tid})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__


# Backward closures receive (grad_wrt_output, accumulate) where accumulate
# adds a gradient contribution for one input tensor.
Accumulator = Callable[[Tensor, np.ndarray], None]
BackwardFn = Callable[[np.ndarray, Accumulator], None]


class GradientTape:
    """Append-only record of differentiable ops, replayed in reverse.

    Nodes are appended in execution order, so the list is a topological
    order of the forward DAG and a single reverse sweep implements the
    chain rule. After ``backward()`` the node list is cleared so the same
    tape can record the next step; ``gradients`` stays readable until the
    next call. A tape must stay confined to one thread.
    """

    def __init__(self):
        self._nodes: list[tuple[int, BackwardFn]] = []
        self.gradients: dict[int, Tensor] = {}

    def __len__(self) -> int:
        return len(self._nodes)

    def record(self, out: Tensor, backward: BackwardFn) -> None:
        """Register the backward closure for op output ``out``.

        This is the extension point layer kernels use; closures must add
        contributions via the accumulator they are handed, never assign.
        """
        self._nodes.append((out.tid, backward))

    def backward(self, loss: Tensor) -> dict[int, Tensor]:
        """Populate and return gradients of ``loss`` w.r.t. every tensor.

        ``loss`` must be a scalar recorded on this tape. Gradients are
        keyed by tensor id and have the shape of the tensor they belong
        to. The tape is cleared and reusable afterwards.
        """
        if loss.data.shape != ():
            raise ValueError(f"backward() needs a scalar loss, got shape {loss.data.shape}")
        raw: dict[int, np.ndarray] = {loss.tid: np.ones((), dtype=np.float64)}

        def accumulate(t: Tensor, g: np.ndarray) -> None:
            if g.shape != t.data.shape:
                raise ValueError(
                    f"gradient shape {g.shape} does not match tensor shape {t.data.shape}"
                )
            cur = raw.get(t.tid)
            if cur is None:
                # Copy: closures may hand out views into shared buffers.
                raw[t.tid] = np.array(g, dtype=np.float64)
            else:
                cur += g

        for out_tid, backward_fn in reversed(self._nodes):
            g = raw.get(out_tid)
            if g is not None:
                backward_fn(g, accumulate)

        self._nodes.clear()
        self.gradients = {tid: Tensor(arr) for tid, arr in raw.items()}
        return self.gradients


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _tape_of(*tensors: Tensor) -> Optional[GradientTape]:
    tape = None
    for t in tensors:
        if t.tape is not None:
            if tape is not None and tape is not t.tape:
                raise ValueError("operands were recorded on different tapes")
            tape = t.tape
    return tape


def _make(data: np.ndarray, tape: Optional[GradientTape], opname: str) -> Tensor:
    if _check_finite and not np.all(np.isfinite(data)):
        raise FloatingPointError(f"{opname} produced non-finite values")
    return Tensor(data, tape)


def _grad_for(t: Tensor, g: np.ndarray) -> np.ndarray:
    # Reduce a broadcast gradient back to a scalar operand.
    if t.data.shape == g.shape:
        return g
    return np.asarray(g.sum(), dtype=np.float64)


def _check_binary_shapes(a: Tensor, b: Tensor, opname: str) -> None:
    # Only scalar-with-tensor broadcasting is allowed.
    if a.data.shape != b.data.shape and a.data.shape != () and b.data.shape != ():
        raise ValueError(f"{opname}: shape {a.data.shape} does not match shape {b.data.shape}")


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_binary_shapes(a, b, "add")
    tape = _tape_of(a, b)
    out = _make(a.data + b.data, tape, "add")
    if tape is not None:
        def backward(g, acc, a=a, b=b):
            acc(a, _grad_for(a, g))
            acc(b, _grad_for(b, g))
        tape.record(out, backward)
    return out


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_binary_shapes(a, b, "sub")
    tape = _tape_of(a, b)
    out = _make(a.data - b.data, tape, "sub")
    if tape is not None:
        def backward(g, acc, a=a, b=b):
            acc(a, _grad_for(a, g))
            acc(b, _grad_for(b, -g))
        tape.record(out, backward)
    return out


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_binary_shapes(a, b, "mul")
    tape = _tape_of(a, b)
    out = _make(a.data * b.data, tape, "mul")
    if tape is not None:
        ad, bd = a.data, b.data
        def backward(g, acc, a=a, b=b):
            acc(a, _grad_for(a, g * bd))
            acc(b, _grad_for(b, g * ad))
        tape.record(out, backward)
    return out


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    out = _make(y, x.tape, "tanh")
    if x.tape is not None:
        def backward(g, acc, x=x, y=y):
            acc(x, g * (1.0 - y * y))
        x.tape.record(out, backward)
    return out


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    # Branch on sign so exp() never sees a large positive argument.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x: Tensor) -> Tensor:
    y = _stable_sigmoid(x.data)
    out = _make(y, x.tape, "sigmoid")
    if x.tape is not None:
        def backward(g, acc, x=x, y=y):
            acc(x, g * y * (1.0 - y))
        x.tape.record(out, backward)
    return out


def relu(x: Tensor) -> Tensor:
    y = np.maximum(x.data, 0.0)
    out = _make(y, x.tape, "relu")
    if x.tape is not None:
        mask = x.data > 0
        def backward(g, acc, x=x, mask=mask):
            acc(x, g * mask)
        x.tape.record(out, backward)
    return out


def _check_axis(x: Tensor, axis: int, opname: str) -> int:
    rank = x.data.ndim
    if not -rank <= axis < rank:
        raise ValueError(f"{opname}: axis {axis} out of range for rank {rank}")
    return axis % rank if rank else 0


def reduce_sum(x: Tensor, axis: Optional[int] = None) -> Tensor:
    if axis is not None:
        axis = _check_axis(x, axis, "reduce_sum")
    out = _make(x.data.sum(axis=axis), x.tape, "reduce_sum")
    if x.tape is not None:
        def backward(g, acc, x=x, axis=axis):
            if axis is None:
                acc(x, np.broadcast_to(g, x.data.shape).copy())
            else:
                acc(x, np.broadcast_to(np.expand_dims(g, axis), x.data.shape).copy())
        x.tape.record(out, backward)
    return out


def reduce_mean(x: Tensor, axis: Optional[int] = None) -> Tensor:
    if axis is not None:
        axis = _check_axis(x, axis, "reduce_mean")
    n = x.data.size if axis is None else x.data.shape[axis]
    out = _make(x.data.mean(axis=axis), x.tape, "reduce_mean")
    if x.tape is not None:
        def backward(g, acc, x=x, axis=axis, n=n):
            if axis is None:
                acc(x, np.broadcast_to(g / n, x.data.shape).copy())
            else:
                acc(x, np.broadcast_to(np.expand_dims(g / n, axis), x.data.shape).copy())
        x.tape.record(out, backward)
    return out


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not parts:
        raise ValueError("concat: no parts given")
    parts = [_as_tensor(p) for p in parts]
    axis = _check_axis(parts[0], axis, "concat")
    ref = parts[0].data.shape
    for p in parts[1:]:
        s = p.data.shape
        if len(s) != len(ref) or any(
            i != axis and s[i] != ref[i] for i in range(len(ref))
        ):
            raise ValueError(f"concat: incompatible extents {ref} vs {s} along axis {axis}")
    tape = _tape_of(*parts)
    out = _make(np.concatenate([p.data for p in parts], axis=axis), tape, "concat")
    if tape is not None:
        sizes = [p.data.shape[axis] for p in parts]
        splits = np.cumsum(sizes)[:-1]
        def backward(g, acc, parts=parts, splits=splits, axis=axis):
            for p, piece in zip(parts, np.split(g, splits, axis=axis)):
                acc(p, piece)
        tape.record(out, backward)
    return out


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = _make(x.data.reshape(shape), x.tape, "reshape")
    if x.tape is not None:
        def backward(g, acc, x=x):
            acc(x, g.reshape(x.data.shape))
        x.tape.record(out, backward)
    return out


def finite_difference_gradient(
    f: Callable[[Tensor], "Tensor | float"], x: Tensor, eps: float = 1e-5
) -> Tensor:
    """Central-difference gradient of a scalar-valued function at ``x``.

    The test-suite oracle: uses only forward evaluations of ``f``, so it is
    independent of every backward closure it is used to check.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    base = np.array(x.data, dtype=np.float64)
    grad = np.zeros_like(base)
    flat_base = base.reshape(-1)
    flat_grad = grad.reshape(-1)
    work = base.copy()
    flat_work = work.reshape(-1)
    for i in range(flat_base.size):
        flat_work[i] = flat_base[i] + eps
        hi = _scalar(f(Tensor(work.copy())))
        flat_work[i] = flat_base[i] - eps
        lo = _scalar(f(Tensor(work.copy())))
        flat_work[i] = flat_base[i]
        flat_grad[i] = (hi - lo) / (2.0 * eps)
    return Tensor(grad)


def _scalar(v) -> float:
    if isinstance(v, Tensor):
        return v.item()
    return float(v)
