"""Tensor type, computation tape, and the differentiable operation set."""

from __future__ import annotations

import contextlib

import numpy as np

DTYPE = np.float64


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible for an operation."""


class GradientError(RuntimeError):
    """Raised when a gradient-dependent step cannot proceed (NaN, non-scalar loss)."""


_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the context (pure inference)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    """A dense float64 array plus optional gradient bookkeeping.

    ``_parents`` and ``_backward`` form the tape entry for the operation
    that produced this tensor; leaves have neither.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.op = None
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data.copy(), requires_grad=False)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}, op={self.op})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self):
        """Replay the tape from this scalar loss, filling leaf gradients.

        Each recorded operation is visited exactly once (reverse topological
        order); every reachable ``requires_grad`` leaf ends with a defined
        gradient, zero if the loss does not depend on it.
        """
        if self.data.size != 1:
            raise GradientError(
                f"backward requires a scalar loss, got shape {self.shape}"
            )
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                order.append(node)
            else:
                stack.append((node, True))
                for p in node._parents:
                    if id(p) not in seen:
                        stack.append((p, False))
        for node in order:
            if node.requires_grad or node._parents:
                node.grad = np.zeros_like(node.data)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data, op, parents, backward):
    """Build an op result, recording it on the tape only if grads are needed."""
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = True
        out.op = op
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(grad, shape):
    """Reduce a broadcasted gradient back to the original operand shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _check_broadcast(a, b, op):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


# Registry of differentiable op kinds, used by the finite-difference check
# harness to make sure no op escapes gradient verification.
OP_REGISTRY = {}


def _register(name):
    def deco(fn):
        OP_REGISTRY[name] = fn
        return fn

    return deco


@_register("add")
def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def backward(g):
        if a.grad is not None:
            a.grad += _unbroadcast(g, a.shape)
        if b.grad is not None:
            b.grad += _unbroadcast(g, b.shape)

    return _result(a.data + b.data, "add", (a, b), backward)


@_register("sub")
def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward(g):
        if a.grad is not None:
            a.grad += _unbroadcast(g, a.shape)
        if b.grad is not None:
            b.grad -= _unbroadcast(g, b.shape)

    return _result(a.data - b.data, "sub", (a, b), backward)


@_register("mul")
def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def backward(g):
        if a.grad is not None:
            a.grad += _unbroadcast(g * b.data, a.shape)
        if b.grad is not None:
            b.grad += _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, "mul", (a, b), backward)


@_register("div")
def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "div")

    def backward(g):
        if a.grad is not None:
            a.grad += _unbroadcast(g / b.data, a.shape)
        if b.grad is not None:
            b.grad += _unbroadcast(-g * a.data / (b.data * b.data), b.shape)

    return _result(a.data / b.data, "div", (a, b), backward)


@_register("neg")
def neg(a):
    a = as_tensor(a)

    def backward(g):
        if a.grad is not None:
            a.grad -= g

    return _result(-a.data, "neg", (a,), backward)


@_register("matmul")
def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        if a.grad is not None:
            a.grad += g @ b.data.T
        if b.grad is not None:
            b.grad += a.data.T @ g

    return _result(a.data @ b.data, "matmul", (a, b), backward)


@_register("sigmoid")
def sigmoid(a):
    a = as_tensor(a)
    out = np.empty_like(a.data)
    pos = a.data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a.data[pos]))
    ex = np.exp(a.data[~pos])
    out[~pos] = ex / (1.0 + ex)

    def backward(g):
        if a.grad is not None:
            a.grad += g * out * (1.0 - out)

    return _result(out, "sigmoid", (a,), backward)


@_register("tanh")
def tanh(a):
    a = as_tensor(a)
    out = np.tanh(a.data)

    def backward(g):
        if a.grad is not None:
            a.grad += g * (1.0 - out * out)

    return _result(out, "tanh", (a,), backward)


@_register("relu")
def relu(a):
    a = as_tensor(a)
    mask = a.data > 0

    def backward(g):
        if a.grad is not None:
            a.grad += g * mask

    return _result(a.data * mask, "relu", (a,), backward)


@_register("softplus")
def softplus(a):
    """log(1 + e^x), computed without overflow."""
    a = as_tensor(a)
    out = np.maximum(a.data, 0.0) + np.log1p(np.exp(-np.abs(a.data)))

    def backward(g):
        if a.grad is not None:
            x = a.data
            s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-x)), np.exp(x) / (1.0 + np.exp(x)))
            a.grad += g * s

    return _result(out, "softplus", (a,), backward)


@_register("exp")
def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)

    def backward(g):
        if a.grad is not None:
            a.grad += g * out

    return _result(out, "exp", (a,), backward)


@_register("log")
def log(a):
    a = as_tensor(a)

    def backward(g):
        if a.grad is not None:
            a.grad += g / a.data

    return _result(np.log(a.data), "log", (a,), backward)


@_register("mean")
def mean(a, axis=None):
    a = as_tensor(a)
    out = a.data.mean(axis=axis)
    count = a.data.size if axis is None else a.data.shape[axis]

    def backward(g):
        if a.grad is not None:
            if axis is None:
                a.grad += np.broadcast_to(g, a.shape) / count
            else:
                a.grad += np.expand_dims(g, axis) / count

    return _result(out, "mean", (a,), backward)


@_register("sum")
def tsum(a, axis=None):
    a = as_tensor(a)
    out = a.data.sum(axis=axis)

    def backward(g):
        if a.grad is not None:
            if axis is None:
                a.grad += np.broadcast_to(g, a.shape)
            else:
                a.grad += np.broadcast_to(np.expand_dims(g, axis), a.shape)

    return _result(out, "sum", (a,), backward)


@_register("concat")
def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    base = list(tensors[0].shape)
    for t in tensors[1:]:
        other = list(t.shape)
        if len(other) != len(base) or any(
            o != b for i, (o, b) in enumerate(zip(other, base)) if i != axis
        ):
            raise ShapeError(
                f"concat: shapes {tensors[0].shape} and {t.shape} differ off axis {axis}"
            )
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        pieces = np.split(g, splits, axis=axis)
        for t, piece in zip(tensors, pieces):
            if t.grad is not None:
                t.grad += piece

    return _result(
        np.concatenate([t.data for t in tensors], axis=axis), "concat", tensors, backward
    )


@_register("gather_rows")
def gather_rows(a, idx):
    """Select rows by index (e.g. an in-batch permutation); rows may repeat."""
    a = as_tensor(a)
    idx = np.asarray(idx, dtype=int)
    if idx.ndim != 1:
        raise ShapeError(f"gather_rows: index must be 1D, got shape {idx.shape}")

    def backward(g):
        if a.grad is not None:
            np.add.at(a.grad, idx, g)

    return _result(a.data[idx], "gather_rows", (a,), backward)


@_register("reshape")
def reshape(a, shape):
    a = as_tensor(a)
    out = a.data.reshape(shape)

    def backward(g):
        if a.grad is not None:
            a.grad += g.reshape(a.shape)

    return _result(out, "reshape", (a,), backward)


def log_mean_exp(a):
    """Numerically stable log(mean(exp(a))) over all elements.

    The max shift is treated as a constant, which leaves the gradient exact
    (the shift terms cancel in d/dx log-mean-exp).
    """
    a = as_tensor(a)
    m = float(a.data.max())
    shifted = exp(sub(a, m))
    return add(log(mean(shifted)), m)
