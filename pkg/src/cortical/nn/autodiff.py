"""Small reverse-mode automatic differentiation over dense float64 arrays.

Every operation on :class:`Tensor` records a closure that maps the output
gradient onto its inputs.  :func:`grad` walks the recorded graph in reverse
topological order.  Broadcasting follows numpy rules and gradients are summed
back onto the original operand shapes.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np


class GraphError(RuntimeError):
    """Raised when a gradient is requested from an unusable graph."""


class NonFiniteError(FloatingPointError):
    """Raised when a computation produces NaN or infinity."""


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


class Tensor:
    """A dense real array that remembers how it was computed."""

    __slots__ = ("data", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data)
        if arr.dtype != np.float32:
            arr = arr.astype(np.float64, copy=False)
        self.data = arr
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], Sequence[np.ndarray | None]] | None = None
        self.name = name

    # -- bookkeeping ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def recorded(self) -> bool:
        """True when this tensor is the output of a recorded operation."""
        return self._backward is not None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> Tensor:
        return Tensor(self.data)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag})"

    def __len__(self) -> int:
        return len(self.data)

    @staticmethod
    def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
        out = Tensor.__new__(Tensor)
        out.data = data
        out.name = None
        live = any(p.requires_grad for p in parents)
        out.requires_grad = live
        if live:
            out._parents = parents
            out._backward = backward
        else:
            out._parents = ()
            out._backward = None
        return out

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other) -> Tensor:
        other = _lift(other, self)
        a_shape, b_shape = self.shape, other.shape
        return Tensor._make(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)),
        )

    __radd__ = __add__

    def __neg__(self) -> Tensor:
        return Tensor._make(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other) -> Tensor:
        other = _lift(other, self)
        a_shape, b_shape = self.shape, other.shape
        return Tensor._make(
            self.data - other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(-g, b_shape)),
        )

    def __rsub__(self, other) -> Tensor:
        return _lift(other, self) - self

    def __mul__(self, other) -> Tensor:
        other = _lift(other, self)
        a, b = self.data, other.data
        return Tensor._make(
            a * b,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> Tensor:
        other = _lift(other, self)
        a, b = self.data, other.data
        out = a / b
        return Tensor._make(
            out,
            (self, other),
            lambda g: (_unbroadcast(g / b, a.shape), _unbroadcast(-g * out / b, b.shape)),
        )

    def __rtruediv__(self, other) -> Tensor:
        return _lift(other, self) / self

    def __matmul__(self, other) -> Tensor:
        other = _lift(other, self)
        a, b = self.data, other.data
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
        return Tensor._make(a @ b, (self, other), lambda g: (g @ b.T, a.T @ g))

    def __pow__(self, exponent: float) -> Tensor:
        a = self.data
        return Tensor._make(
            a**exponent, (self,), lambda g: (g * exponent * a ** (exponent - 1),)
        )

    def reshape(self, *shape) -> Tensor:
        a_shape = self.shape
        return Tensor._make(self.data.reshape(*shape), (self,), lambda g: (g.reshape(a_shape),))

    def __getitem__(self, index) -> Tensor:
        a_shape = self.shape

        def backward(g):
            full = np.zeros(a_shape)
            np.add.at(full, index, g)
            return (full,)

        return Tensor._make(self.data[index], (self,), backward)

    # -- reductions --------------------------------------------------------------

    def sum(self, axis: int | None = None, keepdims: bool = False) -> Tensor:
        a_shape = self.shape

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, a_shape),)

        return Tensor._make(
            np.asarray(self.data.sum(axis=axis, keepdims=keepdims)), (self,), backward
        )

    def mean(self, axis: int | None = None, keepdims: bool = False) -> Tensor:
        n = self.size if axis is None else self.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # -- elementwise functions -----------------------------------------------------

    def relu(self) -> Tensor:
        mask = self.data > 0
        return Tensor._make(self.data * mask, (self,), lambda g: (g * mask,))

    def tanh(self) -> Tensor:
        t = np.tanh(self.data)
        return Tensor._make(t, (self,), lambda g: (g * (1.0 - t * t),))

    def sigmoid(self) -> Tensor:
        s = _sigmoid(self.data)
        return Tensor._make(s, (self,), lambda g: (g * s * (1.0 - s),))

    def softplus(self) -> Tensor:
        a = self.data
        out = np.logaddexp(0.0, a)
        return Tensor._make(out, (self,), lambda g: (g * _sigmoid(a),))

    def exp(self) -> Tensor:
        out = np.exp(self.data)
        return Tensor._make(out, (self,), lambda g: (g * out,))

    def log(self) -> Tensor:
        a = self.data
        if np.any(a <= 0):
            raise NonFiniteError("log of a non-positive value")
        return Tensor._make(np.log(a), (self,), lambda g: (g / a,))

    def sqrt(self) -> Tensor:
        out = np.sqrt(self.data)
        return Tensor._make(out, (self,), lambda g: (g * 0.5 / np.where(out > 0, out, np.inf),))

    def clamp_min(self, floor: float) -> Tensor:
        """max(x, floor); the gradient is zero where the floor is active."""
        mask = self.data > floor
        out = np.where(mask, self.data, self.data.dtype.type(floor))
        return Tensor._make(out, (self,), lambda g: (g * mask,))

    def hinge(self) -> Tensor:
        """max(x, 0)."""
        return self.relu()

    def square(self) -> Tensor:
        a = self.data
        return Tensor._make(a * a, (self,), lambda g: (2.0 * g * a,))


def _sigmoid(a: np.ndarray) -> np.ndarray:
    # split on sign to avoid overflow in exp
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _lift(value, like: Tensor) -> Tensor:
    # python scalars take the dtype of the tensor they combine with
    if isinstance(value, Tensor):
        return value
    if isinstance(value, (int, float)):
        return Tensor(np.asarray(value, dtype=like.data.dtype))
    return Tensor(value)


def parameter(data, name: str | None = None) -> Tensor:
    """Leaf tensor that gradients are taken with respect to (copies ``data``)."""
    return Tensor(np.array(data), requires_grad=True, name=name)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    """Concatenate along ``axis``."""
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor._make(
        np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward
    )


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Fused ``x @ weight + bias`` for row batches."""
    x = as_tensor(x)
    a, w = x.data, weight.data
    if a.ndim != 2 or a.shape[1] != w.shape[0]:
        raise ValueError(f"batch of shape {a.shape} does not match weight {w.shape}")

    need_x = x.requires_grad

    def backward(g):
        return (g @ w.T if need_x else None, a.T @ g, g.sum(axis=0))

    return Tensor._make(a @ w + bias.data, (x, weight, bias), backward)


def row_norm_sq(x: Tensor) -> Tensor:
    """Squared Euclidean norm of each row, shape (m,)."""
    return x.square().sum(axis=1)


def check_finite(t: Tensor, what: str = "tensor") -> Tensor:
    if not np.all(np.isfinite(t.data)):
        raise NonFiniteError(f"non-finite values in {what}")
    return t


def _toposort(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen and p.requires_grad:
                stack.append((p, False))
    return order


def grad(loss: Tensor, wrt: Iterable[Tensor]) -> list[np.ndarray]:
    """Gradients of a scalar ``loss`` with respect to each tensor in ``wrt``.

    Tensors that ``loss`` does not depend on get a zero gradient.
    """
    wrt = list(wrt)
    if loss.size != 1:
        raise GraphError(f"loss must be a scalar, got shape {loss.shape}")
    if not loss.recorded:
        raise GraphError("loss has no recorded computation; run a forward pass first")
    check_finite(loss, "loss")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_toposort(loss)):
        g = grads.get(id(node))
        if g is None or node._backward is None:
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
    return [
        np.asarray(grads[id(t)]).reshape(t.shape) if id(t) in grads
        else np.zeros(t.shape, dtype=t.data.dtype)
        for t in wrt
    ]
