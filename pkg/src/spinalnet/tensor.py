"""Dense float64 tensors with reverse-mode autodiff on a dynamic tape.

Every tensor created by an op remembers its parents and a backward rule.
`backward(loss)` replays the tape in reverse creation order, so each node
is visited exactly once and gradients accumulate additively on leaves.
Storage is always C-contiguous float64; parameters are mutated only
outside the tape (see train.py).
"""

import itertools

import numpy as np

from . import kernels


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


class ContractError(RuntimeError):
    """Raised when an operation's calling contract is violated."""


_ids = itertools.count()


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_id")

    def __init__(self, data, requires_grad=False):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None
        self._id = next(_ids)

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        if self.data.size != 1:
            raise ContractError("item() requires a scalar tensor, got shape %s" % (self.shape,))
        return float(self.data.reshape(-1)[0])

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return "Tensor(shape=%s, requires_grad=%s)" % (self.shape, self.requires_grad)


def _needs_tape(*tensors):
    return any(t.requires_grad or t._parents for t in tensors)


def _make(data, parents, backward_fn):
    """Wrap an op result; record it on the tape only if a parent needs grad."""
    out = Tensor(data)
    if _needs_tape(*parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _accum(t, g):
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64, copy=True)
    else:
        t.grad += g


# ---------------------------------------------------------------------------
# arithmetic


def matmul(a, b):
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul shape mismatch: %s x %s" % (a.shape, b.shape))

    def backward(g):
        _accum(a, g @ b.data.T)
        _accum(b, a.data.T @ g)

    return _make(a.data @ b.data, (a, b), backward)


def transpose2d(x):
    if x.data.ndim != 2:
        raise ShapeError("transpose2d requires a 2-d tensor, got %s" % (x.shape,))

    def backward(g):
        _accum(x, g.T)

    return _make(x.data.T, (x,), backward)


def add(a, b):
    if a.shape != b.shape:
        raise ShapeError("add shape mismatch: %s vs %s" % (a.shape, b.shape))

    def backward(g):
        _accum(a, g)
        _accum(b, g)

    return _make(a.data + b.data, (a, b), backward)


def sub(a, b):
    if a.shape != b.shape:
        raise ShapeError("sub shape mismatch: %s vs %s" % (a.shape, b.shape))

    def backward(g):
        _accum(a, g)
        _accum(b, -g)

    return _make(a.data - b.data, (a, b), backward)


def mul_elementwise(a, b):
    if a.shape != b.shape:
        raise ShapeError("mul shape mismatch: %s vs %s" % (a.shape, b.shape))

    def backward(g):
        _accum(a, g * b.data)
        _accum(b, g * a.data)

    return _make(a.data * b.data, (a, b), backward)


def scale(x, c):
    c = float(c)

    def backward(g):
        _accum(x, g * c)

    return _make(x.data * c, (x,), backward)


def broadcast_add_bias(a, b):
    """a + b with b a 1-d bias broadcast over a's last dimension."""
    if b.data.ndim != 1 or a.shape[-1] != b.shape[0]:
        raise ShapeError("bias broadcast mismatch: %s + %s" % (a.shape, b.shape))

    def backward(g):
        _accum(a, g)
        _accum(b, g.reshape(-1, b.shape[0]).sum(axis=0))

    return _make(a.data + b.data, (a, b), backward)


# ---------------------------------------------------------------------------
# activations


def relu(x):
    def backward(g):
        _accum(x, g * (x.data > 0))

    return _make(np.maximum(x.data, 0.0), (x,), backward)


def tanh_act(x):
    out_data = np.tanh(x.data)

    def backward(g):
        _accum(x, g * (1.0 - out_data * out_data))

    return _make(out_data, (x,), backward)


def identity_act(x):
    def backward(g):
        _accum(x, g)

    return _make(x.data, (x,), backward)


ACTIVATIONS = {"relu": relu, "tanh": tanh_act, "identity": identity_act}


def log_softmax(x):
    if x.data.ndim != 2:
        raise ShapeError("log_softmax requires a 2-d tensor, got %s" % (x.shape,))
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    out_data = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

    def backward(g):
        _accum(x, g - np.exp(out_data) * g.sum(axis=1, keepdims=True))

    return _make(out_data, (x,), backward)


# ---------------------------------------------------------------------------
# shape ops


def reshape(x, shape):
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != x.size:
        raise ShapeError("cannot reshape %s to %s" % (x.shape, shape))

    def backward(g):
        _accum(x, g.reshape(x.shape))

    return _make(x.data.reshape(shape), (x,), backward)


def slice_last_dim(x, start, length):
    n = x.shape[-1]
    if start < 0 or length < 0 or start + length > n:
        raise ShapeError("slice [%d:%d) out of range for last dim %d" % (start, start + length, n))

    def backward(g):
        full = np.zeros_like(x.data)
        full[..., start : start + length] = g
        _accum(x, full)

    return _make(np.ascontiguousarray(x.data[..., start : start + length]), (x,), backward)


def concat_last_dim(parts):
    parts = list(parts)
    if not parts:
        raise ShapeError("concat of zero tensors")
    lead = parts[0].shape[:-1]
    for p in parts:
        if p.shape[:-1] != lead:
            raise ShapeError(
                "concat leading-dim mismatch: %s vs %s" % (parts[0].shape, p.shape)
            )
    widths = [p.shape[-1] for p in parts]
    offsets = np.cumsum([0] + widths)

    def backward(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            _accum(p, g[..., lo:hi])

    return _make(np.concatenate([p.data for p in parts], axis=-1), tuple(parts), backward)


# ---------------------------------------------------------------------------
# reductions and indexing


def sum_all(x):
    def backward(g):
        _accum(x, np.full_like(x.data, np.asarray(g).item()))

    return _make(x.data.sum(), (x,), backward)


def mean_all(x):
    n = x.size

    def backward(g):
        _accum(x, np.full_like(x.data, np.asarray(g).item() / n))

    return _make(x.data.mean(), (x,), backward)


def take_per_row(x, idx):
    """x[i, idx[i]] for each row i; idx is an integer array."""
    if x.data.ndim != 2:
        raise ShapeError("take_per_row requires a 2-d tensor, got %s" % (x.shape,))
    idx = np.asarray(idx, dtype=np.intp)
    if idx.ndim != 1 or idx.shape[0] != x.shape[0]:
        raise ShapeError("index length %s does not match rows %d" % (idx.shape, x.shape[0]))
    rows = np.arange(x.shape[0])

    def backward(g):
        full = np.zeros_like(x.data)
        full[rows, idx] = g
        _accum(x, full)

    return _make(x.data[rows, idx], (x,), backward)


def apply_mask(x, mask):
    """Element-wise product with a constant (non-differentiated) mask."""
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != x.shape:
        raise ShapeError("mask shape %s does not match %s" % (mask.shape, x.shape))

    def backward(g):
        _accum(x, g * mask)

    return _make(x.data * mask, (x,), backward)


# ---------------------------------------------------------------------------
# spatial ops (hot kernels live in spinalnet.kernels)


def conv2d(x, w, b):
    """Valid cross-correlation, stride 1, plus per-channel bias."""
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ShapeError("conv2d expects 4-d input/weight, got %s, %s" % (x.shape, w.shape))
    n, c, h, wd = x.shape
    out_ch, in_ch, k, k2 = w.shape
    if k != k2:
        raise ShapeError("conv2d kernel must be square, got %s" % (w.shape,))
    if c != in_ch:
        raise ShapeError("conv2d channel mismatch: input %d vs weight %d" % (c, in_ch))
    if h < k or wd < k:
        raise ShapeError("conv2d input %dx%d smaller than kernel %d" % (h, wd, k))
    if b.shape != (out_ch,):
        raise ShapeError("conv2d bias shape %s, expected (%d,)" % (b.shape, out_ch))

    out_data = kernels.conv2d_forward(x.data, w.data) + b.data[None, :, None, None]

    def backward(g):
        g = np.ascontiguousarray(g)
        _accum(x, kernels.conv2d_backward_input(g, w.data, h, wd))
        _accum(w, kernels.conv2d_backward_weight(x.data, g, k))
        _accum(b, g.sum(axis=(0, 2, 3)))

    return _make(out_data, (x, w, b), backward)


def maxpool2d(x):
    """2x2 max pooling, stride 2; gradient routes to the first max in
    row-major window order."""
    if x.data.ndim != 4:
        raise ShapeError("maxpool2d expects 4-d input, got %s" % (x.shape,))
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError("maxpool2d needs even spatial dims, got %dx%d" % (h, w))

    out_data, argmax = kernels.maxpool2d_forward(x.data)

    def backward(g):
        _accum(x, kernels.maxpool2d_backward(np.ascontiguousarray(g), argmax, h, w))

    return _make(out_data, (x,), backward)


# ---------------------------------------------------------------------------
# backward pass


def backward(loss):
    """Populate grad on every requires_grad leaf reachable from `loss`."""
    if loss.data.size != 1:
        raise ContractError("backward requires a scalar loss, got shape %s" % (loss.shape,))
    if loss._backward is None and not loss.requires_grad:
        return  # constant graph: nothing to differentiate

    # Reachable tape nodes in reverse creation order; creation order is a
    # topological order by construction.
    nodes = []
    seen = set()
    stack = [loss]
    while stack:
        t = stack.pop()
        if id(t) in seen:
            continue
        seen.add(id(t))
        if t._backward is not None:
            nodes.append(t)
            stack.extend(t._parents)
    nodes.sort(key=lambda t: t._id, reverse=True)

    loss.grad = np.ones_like(loss.data)
    for node in nodes:
        if node.grad is None:
            continue  # no gradient flowed to this node
        node._backward(node.grad)
        if node is not loss:
            node.grad = None  # interior grads are transient
