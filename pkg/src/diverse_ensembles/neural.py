"""Reverse-mode differentiation over 2-D float64 arrays, and a small MLP.

Every ``Tensor`` is a matrix; scalars are stored as 1x1 and 1-D inputs
become column vectors. Graph edges are only recorded for results that
depend on a tensor with ``requires_grad=True``. ``backward`` accumulates
into the ``grad`` of leaf tensors, so repeated calls add up until
``zero_grad``.
"""
import contextlib
import json
import math

import numpy as np

from .errors import NotScalar, ShapeMismatch

PEARSON_EPS = 1e-12

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def _as_matrix(data):
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeMismatch(f"tensors are 2-D, got shape {arr.shape}")
    return arr


def _unbroadcast(grad, shape):
    if grad.shape == shape:
        return grad
    for axis in (0, 1):
        if shape[axis] == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = _as_matrix(data)
        self.requires_grad = bool(requires_grad)
        self.grad = np.zeros_like(self.data) if self.requires_grad else None
        self._parents = ()
        self._backward = None

    @classmethod
    def _result(cls, data, parents, backward):
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        track = _grad_enabled and any(p.requires_grad for p in parents)
        out.requires_grad = track
        out._parents = parents if track else ()
        out._backward = backward if track else None
        return out

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def item(self):
        if self.data.size != 1:
            raise NotScalar(f"tensor of shape {self.shape} is not a scalar")
        return float(self.data[0, 0])

    def numpy(self):
        return self.data

    # -- elementwise arithmetic --------------------------------------------

    def __add__(self, other):
        other = _wrap(other)
        a, b = self.shape, other.shape
        return Tensor._result(
            self.data + other.data, (self, other),
            lambda g: (_unbroadcast(g, a), _unbroadcast(g, b)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Tensor._result(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        other = _wrap(other)
        a, b = self.shape, other.shape
        return Tensor._result(
            self.data - other.data, (self, other),
            lambda g: (_unbroadcast(g, a), _unbroadcast(-g, b)),
        )

    def __rsub__(self, other):
        return _wrap(other) - self

    def __mul__(self, other):
        other = _wrap(other)
        x, y = self.data, other.data
        return Tensor._result(
            x * y, (self, other),
            lambda g: (_unbroadcast(g * y, x.shape), _unbroadcast(g * x, y.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _wrap(other)
        x, y = self.data, other.data
        out = x / y
        return Tensor._result(
            out, (self, other),
            lambda g: (_unbroadcast(g / y, x.shape), _unbroadcast(-g * out / y, y.shape)),
        )

    def __rtruediv__(self, other):
        return _wrap(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, Tensor):
            raise TypeError("only constant exponents are supported")
        e = float(exponent)
        x = self.data
        return Tensor._result(x**e, (self,), lambda g: (g * e * x ** (e - 1.0),))

    def __matmul__(self, other):
        other = _wrap(other)
        if self.shape[1] != other.shape[0]:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        x, y = self.data, other.data
        return Tensor._result(x @ y, (self, other), lambda g: (g @ y.T, x.T @ g))

    @property
    def T(self):
        return Tensor._result(self.data.T, (self,), lambda g: (g.T,))

    def __getitem__(self, index):
        out = self.data[index]
        shape = self.shape
        if out.ndim != 2:
            out = _as_matrix(out)

        def backward(g):
            full = np.zeros(shape)
            np.add.at(full, index, g.reshape(full[index].shape))
            return (full,)

        return Tensor._result(out, (self,), backward)

    # -- reductions ---------------------------------------------------------

    def sum(self, axis=None):
        shape = self.shape
        if axis is None:
            out = np.array([[self.data.sum()]])
        else:
            out = self.data.sum(axis=axis, keepdims=True)
        return Tensor._result(out, (self,), lambda g: (np.broadcast_to(g, shape).copy(),))

    def mean(self, axis=None):
        count = self.data.size if axis is None else self.shape[axis]
        return self.sum(axis) * (1.0 / count)

    # -- elementwise functions ---------------------------------------------

    def sqrt(self):
        out = np.sqrt(self.data)
        return Tensor._result(out, (self,), lambda g: (g * 0.5 / out,))

    def exp(self):
        out = np.exp(self.data)
        return Tensor._result(out, (self,), lambda g: (g * out,))

    def log(self):
        x = self.data
        return Tensor._result(np.log(x), (self,), lambda g: (g / x,))

    def relu(self):
        mask = self.data > 0.0
        return Tensor._result(self.data * mask, (self,), lambda g: (g * mask,))

    def softmax(self):
        """Row-wise softmax."""
        z = self.data - self.data.max(axis=1, keepdims=True)
        e = np.exp(z)
        s = e / e.sum(axis=1, keepdims=True)
        return Tensor._result(s, (self,), lambda g: (s * (g - (g * s).sum(axis=1, keepdims=True)),))

    # -- graph traversal ------------------------------------------------------

    def backward(self):
        if self.data.shape != (1, 1):
            raise NotScalar(f"backward needs a scalar, got shape {self.shape}")
        if not self.requires_grad:
            return
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        grads = {id(self): np.ones((1, 1))}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if not node._parents:
                if node.grad is None:
                    node.grad = np.zeros_like(node.data)
                node.grad += g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                prev = grads.get(id(parent))
                grads[id(parent)] = pg if prev is None else prev + pg


def _wrap(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def concat(tensors, axis=1):
    """Concatenate along ``axis``; the gradient is split back in pieces."""
    tensors = [_wrap(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    cuts = np.cumsum(sizes)[:-1]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor._result(out, tuple(tensors), lambda g: tuple(np.split(g, cuts, axis=axis)))


def softmax_cross_entropy(logits, Y):
    """Mean cross-entropy between row-wise softmax of ``logits`` and targets ``Y``."""
    Y = np.asarray(Y.data if isinstance(Y, Tensor) else Y, dtype=np.float64)
    if Y.shape != logits.shape:
        raise ShapeMismatch(f"targets {Y.shape} vs logits {logits.shape}")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logsum
    n = Y.shape[0]
    loss = -(Y * logp).sum() / n
    probs = np.exp(logp)
    return Tensor._result(np.array([[loss]]), (logits,), lambda g: (g * (probs * Y.sum(axis=1, keepdims=True) - Y) / n,))


def differentiable_pearson(x, y, eps=PEARSON_EPS):
    """Pearson correlation of two columns with a stabilized denominator.

    cov / sqrt(var_x * var_y + eps); a constant input gives ~0 instead of
    dividing by zero.
    """
    x, y = _wrap(x), _wrap(y)
    if x.shape != y.shape or x.shape[1] != 1:
        raise ShapeMismatch(f"expected two equal column vectors, got {x.shape} and {y.shape}")
    if x.shape[0] < 2:
        raise ShapeMismatch("columns need at least 2 rows")
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    cov = (xc * yc).mean()
    var = (xc * xc).mean() * (yc * yc).mean()
    return cov / (var + eps).sqrt()


# -- networks -------------------------------------------------------------


class MlpNetwork:
    """Fully connected network with rectifier hidden layers and linear output.

    Weights start uniform in +-sqrt(6 / (fan_in + fan_out)) drawn from a
    generator seeded by ``(seed, index)``, so ensemble members differ.
    Biases start at zero.
    """

    def __init__(self, layer_sizes, seed=0, index=0):
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ShapeMismatch(f"invalid layer sizes {layer_sizes}")
        self.layer_sizes = sizes
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, int(index)])
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            s = math.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(Tensor(rng.uniform(-s, s, size=(fan_in, fan_out)), requires_grad=True))
            self.biases.append(Tensor(np.zeros((1, fan_out)), requires_grad=True))

    def parameters(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def __call__(self, X):
        X = _wrap(X)
        if X.shape[1] != self.layer_sizes[0]:
            raise ShapeMismatch(f"input has {X.shape[1]} columns, network expects {self.layer_sizes[0]}")
        h = X
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = h.relu()
        return h

    def predict_proba(self, X):
        with no_grad():
            return forward_softmax(self, X).data

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def copy(self):
        return MlpNetwork.from_dict(self.to_dict())

    def to_dict(self):
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.data.ravel().tolist() for w in self.weights],
            "biases": [b.data.ravel().tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, doc):
        net = cls.__new__(cls)
        net.layer_sizes = [int(s) for s in doc["layer_sizes"]]
        net.weights, net.biases = [], []
        for (fan_in, fan_out), w, b in zip(
            zip(net.layer_sizes[:-1], net.layer_sizes[1:]), doc["weights"], doc["biases"]
        ):
            net.weights.append(Tensor(np.asarray(w, dtype=np.float64).reshape(fan_in, fan_out), requires_grad=True))
            net.biases.append(Tensor(np.asarray(b, dtype=np.float64).reshape(1, fan_out), requires_grad=True))
        return net

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def forward_softmax(net, X):
    """Row-wise class probabilities of ``net`` on ``X``."""
    return net(X).softmax()


def zero_grad(params):
    for p in params:
        if p.grad is None:
            p.grad = np.zeros_like(p.data)
        else:
            p.grad.fill(0.0)


def sgd_step(params, learning_rate):
    for p in params:
        if p.grad is not None:
            p.data -= learning_rate * p.grad


class SGD:
    """Plain gradient descent over a fixed parameter list."""

    def __init__(self, params, learning_rate):
        self.params = list(params)
        self.learning_rate = learning_rate

    def zero_grad(self):
        zero_grad(self.params)

    def step(self):
        sgd_step(self.params, self.learning_rate)


# -- gradient checking ------------------------------------------------------


def numerical_gradient(fn, array, h=1e-6):
    """Central differences of scalar ``fn()`` with respect to ``array`` (edited in place)."""
    grad = np.zeros_like(array)
    it = np.nditer(array, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = array[idx]
        array[idx] = orig + h
        up = fn()
        array[idx] = orig - h
        down = fn()
        array[idx] = orig
        grad[idx] = (up - down) / (2.0 * h)
    return grad


def relative_error(analytic, numeric):
    """max |a - n| scaled by the larger of the two gradients' max magnitudes."""
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-8)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def gradient_check(build_loss, tensors, h=1e-6):
    """Worst relative error between backprop and central differences.

    ``build_loss`` maps the list ``tensors`` (leaves with requires_grad) to a
    scalar Tensor.
    """
    zero_grad(tensors)
    build_loss(tensors).backward()
    worst = 0.0
    for t in tensors:
        analytic = t.grad.copy()
        with no_grad():
            numeric = numerical_gradient(lambda: build_loss(tensors).item(), t.data, h)
        worst = max(worst, relative_error(analytic, numeric))
    return worst
