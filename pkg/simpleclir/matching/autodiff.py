"""Minimal reverse-mode automatic differentiation over numpy arrays.

Every operation returns a new ``Tensor`` that remembers its parents and a closure
accumulating gradients into them. ``Tensor.backward`` walks the graph in reverse
topological order, so each node's gradient is complete before it is propagated.
Gradient arrays are allocated lazily: only trainable tensors and tensors on the
backward path ever get one.
"""

from collections.abc import Callable, Iterator, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Tensor:
    """A float64 array with optional gradient storage."""

    __slots__ = ("values", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(
        self,
        values: "np.ndarray | float | Sequence[float]",
        requires_grad: bool = False,
        name: str | None = None,
        parents: tuple["Tensor", ...] = (),
        backward: Callable[[np.ndarray], None] | None = None,
    ):
        self.values = np.asarray(values, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.name = name
        self._parents = parents
        self._backward = backward

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        return f"Tensor{label}(shape={self.shape})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        return float(self.values)

    def accumulate(self, grad: np.ndarray) -> None:
        """Add ``grad`` into this tensor's gradient, allocating it on first use."""
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        self.grad += grad

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Back-propagate from a scalar output, accumulating into trainable tensors."""
        if self.size != 1:
            raise ValueError(f"backward() needs a scalar output, got shape {self.shape}")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            stack.extend((p, False) for p in node._parents if p.requires_grad)

        self.accumulate(np.ones_like(self.values))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
        # intermediate nodes are single-use; only leaves keep their gradient
        for node in order:
            if node._parents:
                node.grad = None

    def __add__(self, other: "Tensor | float") -> "Tensor":
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other: "Tensor | float") -> "Tensor":
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other: "Tensor | float") -> "Tensor":
        return add(as_tensor(other), neg(self))

    def __mul__(self, other: "Tensor | float") -> "Tensor":
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        return neg(self)


def as_tensor(value: "Tensor | np.ndarray | float") -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _node(values: np.ndarray, parents: tuple[Tensor, ...], backward: Callable[[np.ndarray], None]) -> Tensor:
    if any(p.requires_grad for p in parents):
        return Tensor(values, parents=parents, backward=backward)
    return Tensor(values)


def add(a: "Tensor | float", b: "Tensor | float") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(g, b.shape))

    return _node(a.values + b.values, (a, b), backward)


def mul(a: "Tensor | float", b: "Tensor | float") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(_unbroadcast(g * b.values, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(g * a.values, b.shape))

    return _node(a.values * b.values, (a, b), backward)


def neg(a: Tensor) -> Tensor:
    return _node(-a.values, (a,), lambda g: a.accumulate(-g))


def total(a: Tensor, axis: int | None = None) -> Tensor:
    """Sum of all entries (a 0-d tensor) or along one axis."""
    if axis is None:
        return _node(np.asarray(a.values.sum()), (a,), lambda g: a.accumulate(np.broadcast_to(g, a.shape).copy()))
    return _node(
        a.values.sum(axis=axis),
        (a,),
        lambda g: a.accumulate(np.broadcast_to(np.expand_dims(g, axis), a.shape).copy()),
    )


def mean(tensors: Sequence[Tensor]) -> Tensor:
    """Mean of scalar tensors."""
    if not tensors:
        raise ValueError("mean() of no tensors")
    out = tensors[0]
    for t in tensors[1:]:
        out = add(out, t)
    return mul(out, 1.0 / len(tensors))


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    return _node(a.values.reshape(shape), (a,), lambda g: a.accumulate(g.reshape(a.shape)))


def flatten(a: Tensor) -> Tensor:
    return reshape(a, (a.size,))


def concat(tensors: Sequence[Tensor]) -> Tensor:
    """Concatenate flattened tensors into one vector."""
    sizes = [t.size for t in tensors]
    values = np.concatenate([t.values.ravel() for t in tensors])

    def backward(g: np.ndarray) -> None:
        offset = 0
        for t, n in zip(tensors, sizes, strict=True):
            if t.requires_grad:
                t.accumulate(g[offset : offset + n].reshape(t.shape))
            offset += n

    return _node(values, tuple(tensors), backward)


def relu(a: Tensor) -> Tensor:
    active = a.values > 0.0
    return _node(np.where(active, a.values, 0.0), (a,), lambda g: a.accumulate(g * active))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.values)
    return _node(out, (a,), lambda g: a.accumulate(g * (1.0 - out**2)))


def log_clamp(a: Tensor, floor: float = 1e-10) -> Tensor:
    """ln(max(a, floor)); the gradient is 0 where the floor applies."""
    if floor <= 0:
        raise ValueError("floor must be positive")
    clamped = np.maximum(a.values, floor)
    passes = a.values > floor
    return _node(np.log(clamped), (a,), lambda g: a.accumulate(np.where(passes, g / clamped, 0.0)))


def softmax(a: Tensor) -> Tensor:
    """Softmax over a vector (the query-term axis for gating)."""
    if a.values.ndim != 1:
        raise ValueError(f"softmax expects a vector, got shape {a.shape}")
    shifted = np.exp(a.values - a.values.max())
    out = shifted / shifted.sum()
    return _node(out, (a,), lambda g: a.accumulate(out * (g - np.dot(g, out))))


def dense(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """x @ W + b for a vector or a batch of row vectors."""
    if x.shape[-1] != weight.shape[0] or weight.values.ndim != 2 or bias.shape != (weight.shape[1],):
        raise ValueError(f"dense: input {x.shape} does not fit weight {weight.shape} and bias {bias.shape}")
    out = x.values @ weight.values + bias.values

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x.accumulate(g @ weight.values.T)
        if weight.requires_grad:
            weight.accumulate(np.outer(x.values, g) if x.values.ndim == 1 else x.values.T @ g)
        if bias.requires_grad:
            bias.accumulate(g if g.ndim == 1 else g.sum(axis=0))

    return _node(out, (x, weight, bias), backward)


def conv2d(x: Tensor, kernels: Tensor, bias: Tensor) -> Tensor:
    """Same-size cross-correlation of a single-channel H x W input with C kernels.

    The input is zero-padded by ``k // 2`` on each side; the output is C x H x W.
    """
    if x.values.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"conv2d needs a non-empty H x W input, got shape {x.shape}")
    channels, k, k2 = kernels.shape
    if k != k2 or k % 2 == 0 or bias.shape != (channels,):
        raise ValueError(f"conv2d needs odd square kernels and one bias per channel, got {kernels.shape}")
    height, width = x.shape
    pad = k // 2
    padded = np.pad(x.values, pad)
    cols = sliding_window_view(padded, (k, k)).reshape(height * width, k * k)
    flat_kernels = kernels.values.reshape(channels, k * k)
    out = (cols @ flat_kernels.T).T.reshape(channels, height, width) + bias.values[:, None, None]

    def backward(g: np.ndarray) -> None:
        g_flat = g.reshape(channels, height * width)
        if kernels.requires_grad:
            kernels.accumulate((g_flat @ cols).reshape(channels, k, k))
        if bias.requires_grad:
            bias.accumulate(g_flat.sum(axis=1))
        if x.requires_grad:
            g_cols = (g_flat.T @ flat_kernels).reshape(height, width, k, k)
            g_padded = np.zeros_like(padded)
            for a in range(k):
                for b in range(k):
                    g_padded[a : a + height, b : b + width] += g_cols[:, :, a, b]
            x.accumulate(g_padded[pad : pad + height, pad : pad + width])

    return _node(out, (x, kernels, bias), backward)


def pool_groups(length: int, groups: int) -> list[tuple[int, int]]:
    """Split ``range(length)`` into ``groups`` contiguous, non-empty, near-equal spans.

    When ``length < groups`` spans repeat so that every group still covers a row.
    """
    if length < 1 or groups < 1:
        raise ValueError("pool_groups needs length >= 1 and groups >= 1")
    spans = []
    for g in range(groups):
        start = min(g * length // groups, length - 1)
        end = max(start + 1, (g + 1) * length // groups)
        spans.append((start, end))
    return spans


def dynamic_pool(x: Tensor, rows: int = 5, cols: int = 1, row_mask: np.ndarray | None = None) -> Tensor:
    """Max-pool a C x H x W input onto a fixed C x rows x cols grid.

    Only rows where ``row_mask`` is true are pooled, split into spans in their original
    order; masked rows never win a cell. The gradient goes to the first argmax of every cell.
    """
    channels, height, width = x.shape
    if row_mask is None:
        kept = np.arange(height)
    else:
        row_mask = np.asarray(row_mask, dtype=bool)
        if row_mask.shape != (height,):
            raise ValueError(f"row_mask must have shape ({height},), got {row_mask.shape}")
        kept = np.flatnonzero(row_mask)
        if kept.size == 0:
            raise ValueError("row_mask keeps no rows")
    row_spans = pool_groups(kept.size, rows)
    col_spans = pool_groups(width, cols)
    out = np.empty((channels, rows, cols), dtype=np.float64)
    argmax: list[tuple[int, int, np.ndarray, np.ndarray]] = []
    channel_index = np.arange(channels)
    for r, (r0, r1) in enumerate(row_spans):
        span_rows = kept[r0:r1]
        for c, (c0, c1) in enumerate(col_spans):
            block = x.values[:, span_rows, c0:c1].reshape(channels, -1)
            best = block.argmax(axis=1)
            out[:, r, c] = block[channel_index, best]
            br, bc = np.divmod(best, c1 - c0)
            argmax.append((r, c, span_rows[br], bc + c0))

    def backward(g: np.ndarray) -> None:
        grad = np.zeros_like(x.values)
        for r, c, src_rows, src_cols in argmax:
            np.add.at(grad, (channel_index, src_rows, src_cols), g[:, r, c])
        x.accumulate(grad)

    return _node(out, (x,), backward)


def hinge(s_pos: "Tensor | float", s_neg: "Tensor | float", margin: float = 1.0) -> Tensor:
    """max(0, margin - s_pos + s_neg); zero gradient at and below the kink."""
    s_pos, s_neg = as_tensor(s_pos), as_tensor(s_neg)
    value = margin - s_pos.values + s_neg.values
    active = value > 0.0

    def backward(g: np.ndarray) -> None:
        scale = np.where(active, g, 0.0)
        if s_pos.requires_grad:
            s_pos.accumulate(_unbroadcast(-scale, s_pos.shape))
        if s_neg.requires_grad:
            s_neg.accumulate(_unbroadcast(scale, s_neg.shape))

    return _node(np.maximum(value, 0.0), (s_pos, s_neg), backward)


class ModelParams:
    """Ordered, named set of trainable tensors."""

    def __init__(self) -> None:
        self._tensors: dict[str, Tensor] = {}

    def add(self, name: str, values: np.ndarray) -> Tensor:
        if name in self._tensors:
            raise ValueError(f"Duplicate parameter '{name}'")
        tensor = Tensor(values, requires_grad=True, name=name)
        self._tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self) -> list[tuple[str, Tensor]]:
        return list(self._tensors.items())

    @property
    def size(self) -> int:
        """Total number of scalar parameters."""
        return sum(t.size for t in self._tensors.values())

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def grads(self) -> dict[str, np.ndarray]:
        """Current gradients; parameters off the backward path get zeros."""
        return {
            name: t.grad.copy() if t.grad is not None else np.zeros_like(t.values)
            for name, t in self._tensors.items()
        }

    def state(self) -> dict[str, np.ndarray]:
        """Copy of every parameter array."""
        return {name: t.values.copy() for name, t in self._tensors.items()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        missing = set(self._tensors) ^ set(state)
        if missing:
            raise ValueError(f"Parameter names do not match: {sorted(missing)}")
        for name, tensor in self._tensors.items():
            values = np.asarray(state[name], dtype=np.float64)
            if values.shape != tensor.shape:
                raise ValueError(f"Shape mismatch for '{name}': {values.shape} vs {tensor.shape}")
            tensor.values = values.copy()


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: ModelParams,
    step: float = 1e-4,
    skip_kinks: bool = True,
    tolerance: float = 1e-4,
) -> int:
    """Compare ``backward()`` with central differences on every scalar parameter.

    With ``skip_kinks``, entries whose left and right slopes disagree sit on a kink
    (relu, max pooling, hinge) and are skipped. Returns the number of entries compared;
    raises ValueError on the first entry whose relative error exceeds ``tolerance``.
    """
    params.zero_grad()
    loss_fn().backward()
    analytic = params.grads()
    checked = 0
    for name, tensor in params.items():
        flat = tensor.values.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            up = loss_fn().item()
            flat[i] = original - step
            down = loss_fn().item()
            flat[i] = original
            mid = loss_fn().item()
            right, left = (up - mid) / step, (mid - down) / step
            if skip_kinks and abs(right - left) > 1e-5 + 1e-2 * (abs(right) + abs(left)):
                continue
            numeric = (up - down) / (2 * step)
            a = analytic[name].reshape(-1)[i]
            error = abs(a - numeric) / max(abs(a) + abs(numeric), 1e-7)
            if error >= tolerance and abs(a - numeric) >= 1e-7:
                raise ValueError(f"Gradient mismatch at {name}[{i}]: analytic {a}, numeric {numeric}")
            checked += 1
    return checked
