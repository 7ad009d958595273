"""so(3) helpers: hat map, left-trivialised exponential-chart derivative.

In exponential coordinates ``g = exp(hat(x))`` the body angular velocity is
``g^{-1} g' = dexp_{-x}(x')`` with

    dexp_{-x} = I - a(|x|) hat(x) + b(|x|) hat(x)^2,
    a(t) = (1 - cos t) / t^2,   b(t) = (t - sin t) / t^3.

Near zero the coefficients and their derivatives are evaluated from their
Taylor series to avoid cancellation.
"""

from math import factorial

import numpy as np
from scipy.linalg import expm

from .core import Chart, LieAlgebroid, levi_civita

SERIES_RADIUS = 0.5
_TERMS = 9

# domain of the exponential chart; well inside the injectivity radius pi
CHART_RADIUS = 3.0


def hat(v):
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(M):
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def _coefficients(t):
    """a, b and a'(t)/t, b'(t)/t."""
    if t < SERIES_RADIUS:
        t2 = t * t
        a = sum((-1) ** k * t2 ** k / factorial(2 * k + 2) for k in range(_TERMS))
        b = sum((-1) ** k * t2 ** k / factorial(2 * k + 3) for k in range(_TERMS))
        da = sum((-1) ** k * 2 * k * t2 ** (k - 1) / factorial(2 * k + 2) for k in range(1, _TERMS))
        db = sum((-1) ** k * 2 * k * t2 ** (k - 1) / factorial(2 * k + 3) for k in range(1, _TERMS))
        return a, b, da, db
    s, c = np.sin(t), np.cos(t)
    a = (1 - c) / t ** 2
    b = (t - s) / t ** 3
    da = (t * s - 2 * (1 - c)) / t ** 4
    db = ((1 - c) * t - 3 * (t - s)) / t ** 5
    return a, b, da, db


def body_map(x):
    """``dexp_{-x}``: exponential-chart velocity to body angular velocity."""
    x = np.asarray(x, dtype=float)
    a, b, _, _ = _coefficients(float(np.linalg.norm(x)))
    X = hat(x)
    return np.eye(3) - a * X + b * X @ X


def body_map_derivative(x):
    """Derivative of :func:`body_map`, shape ``(3, 3, 3)`` with the
    differentiated coordinate last."""
    x = np.asarray(x, dtype=float)
    a, b, da, db = _coefficients(float(np.linalg.norm(x)))
    X = hat(x)
    X2 = X @ X
    out = np.empty((3, 3, 3))
    for k in range(3):
        Ek = hat(np.eye(3)[k])
        out[:, :, k] = -da * x[k] * X - a * Ek + db * x[k] * X2 + b * (Ek @ X + X @ Ek)
    return out


def rotation(x):
    return expm(hat(x))


def exponential_chart_algebroid():
    """TSO(3) in exponential coordinates: a tangent algebroid on a ball-box."""
    I = np.eye(3)
    return LieAlgebroid(Chart.cube(3, CHART_RADIUS), 3,
                        rho=lambda x: I,
                        c=lambda x: np.zeros((3, 3, 3)),
                        drho=lambda x: np.zeros((3, 3, 3)),
                        dc=lambda x: np.zeros((3, 3, 3, 3)),
                        name="TSO(3) exp chart")


def action_algebroid(half_width=2.0):
    """so(3) acting on R^3 by rotations: anchor ``rho(x) e_a = x cross e_a``."""
    eps = levi_civita()
    # rho[i, a] = (x cross e_a)_i = eps[i, j, a] x_j
    drho = np.einsum("ija->iaj", eps)
    return LieAlgebroid(Chart.cube(3, half_width), 3,
                        rho=lambda x: np.einsum("ija,j->ia", eps, x),
                        c=lambda x: eps,
                        drho=lambda x: drho,
                        dc=lambda x: np.zeros((3, 3, 3, 3)),
                        name="so(3) x R^3 action")
