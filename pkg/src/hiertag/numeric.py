"""Dense float64 primitives shared by every layer.

Arrays are plain ``numpy.ndarray`` objects of dtype float64. The helpers here
add the shape checks the layers rely on and keep reductions numerically
stable.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

DTYPE = np.float64


class DimensionError(ValueError):
    """Operand shapes do not conform."""


def _check_same_shape(a, b, what):
    if a.shape != b.shape:
        raise DimensionError(f"{what}: shapes {a.shape} and {b.shape} differ")


def affine(W, x, W2, x2):
    """Return ``W @ x + W2 @ x2`` for two matrix-vector pairs."""
    W, x, W2, x2 = (np.asarray(a, dtype=DTYPE) for a in (W, x, W2, x2))
    if W.ndim != 2 or W2.ndim != 2 or x.ndim != 1 or x2.ndim != 1:
        raise DimensionError("affine expects two matrices and two vectors")
    if W.shape[1] != x.shape[0] or W2.shape[1] != x2.shape[0]:
        raise DimensionError(
            f"affine: {W.shape} @ {x.shape} / {W2.shape} @ {x2.shape}")
    if W.shape[0] != W2.shape[0]:
        raise DimensionError("affine: output sizes differ")
    return W @ x + W2 @ x2


def sigmoid(x):
    return expit(np.asarray(x, dtype=DTYPE))


def tanh(x):
    return np.tanh(np.asarray(x, dtype=DTYPE))


def hadamard(a, b):
    a = np.asarray(a, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    _check_same_shape(a, b, "hadamard")
    return a * b


def logsumexp(v, axis=None):
    """Stable ``log(sum(exp(v)))``.

    With ``axis=None`` the input must be a non-empty vector and a float is
    returned; otherwise the reduction runs along ``axis``.
    """
    v = np.asarray(v, dtype=DTYPE)
    if v.size == 0:
        raise ValueError("logsumexp of an empty array")
    if axis is None:
        m = v.max()
        return float(m + np.log(np.exp(v - m).sum()))
    m = v.max(axis=axis, keepdims=True)
    out = m + np.log(np.exp(v - m).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


@dataclass
class AdaGradState:
    accumulator: np.ndarray
    learning_rate: float = 0.01
    epsilon: float = 1e-6

    @classmethod
    def like(cls, param, learning_rate=0.01, epsilon=1e-6):
        return cls(np.zeros_like(param, dtype=DTYPE), learning_rate, epsilon)


def adagrad_update(param, grad, state):
    """In-place AdaGrad step on ``param`` and its accumulator."""
    _check_same_shape(param, grad, "adagrad_update")
    _check_same_shape(param, state.accumulator, "adagrad_update")
    state.accumulator += grad * grad
    if state.learning_rate == 0:
        return
    param -= state.learning_rate * grad / (np.sqrt(state.accumulator) + state.epsilon)


def adagrad_update_rows(param, rows, grads, state):
    """AdaGrad step restricted to ``rows`` of a 2-d parameter.

    Untouched rows receive a zero gradient, for which the dense update is a
    no-op, so this is equivalent to :func:`adagrad_update` with a dense
    gradient that is zero outside ``rows``.
    """
    rows = np.asarray(rows, dtype=np.intp)
    if len(rows) == 0:
        return
    grads = np.asarray(grads, dtype=DTYPE)
    if grads.shape != (len(rows),) + param.shape[1:]:
        raise DimensionError("adagrad_update_rows: gradient block shape")
    acc = state.accumulator[rows] + grads * grads
    state.accumulator[rows] = acc
    if state.learning_rate == 0:
        return
    param[rows] -= state.learning_rate * grads / (np.sqrt(acc) + state.epsilon)


def finite_diff_gradient(f, x, h=1e-5):
    """Central-difference gradient of scalar ``f`` at ``x``.

    ``x`` is perturbed in place and restored, so ``f`` may close over it.
    """
    x = np.asarray(x, dtype=DTYPE)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f(x)
        flat[i] = old - h
        fm = f(x)
        flat[i] = old
        gflat[i] = (fp - fm) / (2 * h)
    return grad
