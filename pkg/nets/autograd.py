# -*- coding: UTF-8 -*-

"""
 *
 *    Particle Push - entity-centric goal-conditioned RL on a planar push table
 *
 *    Copyright (C) 2026 Particle Push contributors
 *
 *    This program is free software: you can redistribute it and/or modify
 *    it under the terms of the GNU General Public License as published by
 *    the Free Software Foundation, either version 3 of the License, or
 *    any later version.
 *
 *    This program is distributed in the hope that it will be useful,
 *    but WITHOUT ANY WARRANTY; without even the implied warranty of
 *    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
 *    GNU General Public License for more details.
 *
 *    You should have received a copy of the GNU General Public License
 *    along with this program.  If not, see <https://www.gnu.org/licenses/>.
 *
 */
"""


import numpy as np


def _unbroadcast(grad, shape):
    # Sum the gradient back down to the operand shape after numpy broadcasting
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """ndarray value with reverse-mode gradient tracking.

    Every operation records its parents and a closure that pushes the output
    gradient back into them. backward() walks the graph in reverse topological
    order, so a node that feeds several consumers accumulates all of them.
    """

    __array_ufunc__ = None

    def __init__(self, value, _children=(), _op='', requires_grad=False):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(c.requires_grad for c in _children)
        self._backward = lambda: None
        self._prev = tuple(_children)
        self._op = _op

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def _accumulate(self, grad):
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad = self.grad + grad

    def __add__(self, other):
        other = as_tensor(other)
        out = Tensor(self.value + other.value, (self, other), '+')

        def _backward():
            self._accumulate(_unbroadcast(out.grad, self.shape))
            other._accumulate(_unbroadcast(out.grad, other.shape))
        out._backward = _backward
        return out

    def __mul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.value * other.value, (self, other), '*')

        def _backward():
            self._accumulate(_unbroadcast(out.grad * other.value, self.shape))
            other._accumulate(_unbroadcast(out.grad * self.value, other.shape))
        out._backward = _backward
        return out

    def __truediv__(self, other):
        other = as_tensor(other)
        out = Tensor(self.value / other.value, (self, other), '/')

        def _backward():
            self._accumulate(_unbroadcast(out.grad / other.value, self.shape))
            other._accumulate(_unbroadcast(-out.grad * self.value / other.value ** 2, other.shape))
        out._backward = _backward
        return out

    def __pow__(self, exponent):
        assert isinstance(exponent, (int, float)), 'only scalar powers are supported'
        out = Tensor(self.value ** exponent, (self,), '**%s' % exponent)

        def _backward():
            self._accumulate(out.grad * exponent * self.value ** (exponent - 1))
        out._backward = _backward
        return out

    def __matmul__(self, other):
        # Both operands at least 2-D, leading axes broadcast
        other = as_tensor(other)
        out = Tensor(np.matmul(self.value, other.value), (self, other), '@')

        def _backward():
            a, b = self.value, other.value
            grad_a = np.matmul(out.grad, np.swapaxes(b, -1, -2))
            grad_b = np.matmul(np.swapaxes(a, -1, -2), out.grad)
            self._accumulate(_unbroadcast(grad_a, a.shape))
            other._accumulate(_unbroadcast(grad_b, b.shape))
        out._backward = _backward
        return out

    def __neg__(self):
        return self * -1.0

    def __radd__(self, other):
        return self + other

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __rmul__(self, other):
        return self * other

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def sum(self, axis=None, keepdims=False):
        out = Tensor(self.value.sum(axis=axis, keepdims=keepdims), (self,), 'sum')

        def _backward():
            grad = out.grad
            if axis is not None and not keepdims:
                grad = np.expand_dims(grad, axis)
            self._accumulate(np.broadcast_to(grad, self.shape))
        out._backward = _backward
        return out

    def mean(self, axis=None, keepdims=False):
        count = self.value.size if axis is None else np.prod([self.shape[a] for a in np.atleast_1d(axis)])
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape):
        out = Tensor(self.value.reshape(*shape), (self,), 'reshape')

        def _backward():
            self._accumulate(out.grad.reshape(self.shape))
        out._backward = _backward
        return out

    def transpose(self, *axes):
        out = Tensor(self.value.transpose(*axes), (self,), 'transpose')

        def _backward():
            self._accumulate(out.grad.transpose(np.argsort(axes)))
        out._backward = _backward
        return out

    def relu(self):
        out = Tensor(np.maximum(self.value, 0.0), (self,), 'ReLU')

        def _backward():
            self._accumulate(out.grad * (self.value > 0))
        out._backward = _backward
        return out

    def tanh(self):
        out = Tensor(np.tanh(self.value), (self,), 'tanh')

        def _backward():
            self._accumulate(out.grad * (1.0 - out.value ** 2))
        out._backward = _backward
        return out

    def exp(self):
        out = Tensor(np.exp(self.value), (self,), 'exp')

        def _backward():
            self._accumulate(out.grad * out.value)
        out._backward = _backward
        return out

    def log(self):
        out = Tensor(np.log(self.value), (self,), 'log')

        def _backward():
            self._accumulate(out.grad / self.value)
        out._backward = _backward
        return out

    def backward(self, grad=None):
        # Iterative topological sort, attention stacks are deep enough to hit the recursion limit
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for child in node._prev:
                if id(child) not in visited:
                    stack.append((child, False))

        self.grad = np.ones_like(self.value) if grad is None else np.asarray(grad, dtype=np.float64)
        for node in reversed(topo):
            if node.grad is not None:
                node._backward()

    def __repr__(self):
        return 'Tensor(shape=%s, op=%s)' % (self.shape, self._op or 'leaf')


def as_tensor(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(array):
    """Leaf tensor that collects a gradient."""
    return Tensor(array, requires_grad=True)


def concat(tensors, axis=0):
    out = Tensor(np.concatenate([t.value for t in tensors], axis=axis), tuple(tensors), 'concat')

    def _backward():
        offsets = np.cumsum([0] + [t.shape[axis] for t in tensors])
        for t, start, stop in zip(tensors, offsets[:-1], offsets[1:]):
            index = [slice(None)] * out.grad.ndim
            index[axis] = slice(start, stop)
            t._accumulate(out.grad[tuple(index)])
    out._backward = _backward
    return out


def masked_softmax(scores, mask, axis=-1):
    """Softmax over `axis` where entries with mask False get exactly zero weight.

    `mask` broadcasts against the scores. Callers must guarantee that every
    softmax row keeps at least one entry.
    """
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), scores.shape)
    logits = np.where(mask, scores.value, -np.inf)
    logits = logits - logits.max(axis=axis, keepdims=True)
    weights = np.where(mask, np.exp(logits), 0.0)
    weights = weights / weights.sum(axis=axis, keepdims=True)
    out = Tensor(weights, (scores,), 'softmax')

    def _backward():
        inner = (out.grad * out.value).sum(axis=axis, keepdims=True)
        scores._accumulate(out.value * (out.grad - inner))
    out._backward = _backward
    return out


def gather_rows(table, index):
    """table[index] for an integer index array of any shape."""
    index = np.asarray(index)
    out = Tensor(table.value[index], (table,), 'gather')

    def _backward():
        grad = np.zeros_like(table.value)
        np.add.at(grad, index, out.grad)
        table._accumulate(grad)
    out._backward = _backward
    return out
