"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and bit-identical results, except ``sigmoid`` which agrees to rounding
(libm ``exp`` against scipy's). Ray kernels take arrays with the ray axis
last.
"""

import numpy as np
from scipy.special import expit


def ray_extrema(vm):
    """Per-ray maximum, first and last index attaining it (exact equality)."""
    n = vm.shape[-1]
    mx = vm.max(axis=-1)
    first = vm.argmax(axis=-1)
    last = (n - 1) - vm[..., ::-1].argmax(axis=-1)
    return mx, first.astype(np.int64), last.astype(np.int64)


def ray_argmax(vm):
    """Per-ray maximum and first maximizer."""
    idx = vm.argmax(axis=-1)
    mx = np.take_along_axis(vm, idx[..., None], axis=-1)[..., 0]
    return mx, idx.astype(np.int64)


def fill_spans(vm, ann, z_fw, z_bw, mx, tau):
    """Lift annotated rays into a depth mask (ray axis last).

    Marks ``z_fw`` and ``z_bw`` on every annotated ray, and the whole span
    between them when ``max - min(span) <= tau``.
    """
    n = vm.shape[-1]
    z = np.arange(n)
    span = (z >= z_fw[..., None]) & (z <= z_bw[..., None])
    lowest = np.where(span, vm, np.inf).min(axis=-1)
    fill = ann & ((mx.astype(np.float64) - lowest.astype(np.float64)) <= tau)
    ends = (z == z_fw[..., None]) | (z == z_bw[..., None])
    return (ann[..., None] & ends) | (fill[..., None] & span)


def adam_step(theta, grad, m, v, lr, beta1, beta2, eps, t):
    """One in-place Adam update with bias correction at step ``t`` (1-based)."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def sigmoid_backward(grad, y):
    """grad * y * (1 - y): pull a gradient back through the logistic."""
    return grad * (y * (1.0 - y))


def sigmoid(x):
    """Logistic function; agrees with the compiled twin to rounding."""
    return expit(x)
