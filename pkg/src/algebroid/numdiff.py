"""Central finite differences used whenever an analytic derivative is absent.

Gradient-level derivatives use ``h = max(1e-6, 1e-6 |x_j|)`` per axis.
Second derivatives built from nested differences use the larger base step
``1e-4`` so that cancellation error stays below truncation error.
"""

import numpy as np

GRAD_STEP = 1e-6
NESTED_STEP = 1e-4


def steps(x, base=GRAD_STEP):
    x = np.asarray(x, dtype=float)
    return np.maximum(base, base * np.abs(x))


def derivative(f, x, base=GRAD_STEP):
    """Derivative of an array-valued ``f`` at ``x``.

    Returns an array of shape ``f(x).shape + (len(x),)`` whose last axis
    indexes the coordinate being differentiated.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    f0 = np.asarray(f(x), dtype=float)
    out = np.empty(f0.shape + (n,))
    if n == 0:
        return out
    h = steps(x, base)
    for j in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h[j]
        xm[j] -= h[j]
        out[..., j] = (np.asarray(f(xp)) - np.asarray(f(xm))) / (2.0 * h[j])
    return out


def gradient(f, x, base=GRAD_STEP):
    return derivative(f, x, base)


def hessian(f, x, base=NESTED_STEP):
    """Hessian of a scalar ``f`` by nested central differences."""
    return derivative(lambda z: derivative(f, z, base), x, base)
