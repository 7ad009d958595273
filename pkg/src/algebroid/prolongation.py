"""The prolongation algebroid and the canonical objects on T^E E and T^E E*.

Elements of T^E E are written in the basis ``{X_a, V_a}`` at a point
``(x, y)`` of E: ``z`` is the X-part (the E component) and ``v`` the
vertical part.  On T^E E* the basis is ``{X_a, P^a}`` at ``(x, mu)``.
"""

from dataclasses import dataclass

import numpy as np

from .core import AlgebroidForm, Chart, LieAlgebroid
from .errors import GridError
from .trajectory import time_derivative


@dataclass(frozen=True, eq=False)
class ProlongationAlgebroid:
    base: LieAlgebroid
    fiber_dim: int
    realized: LieAlgebroid


def prolong(E, k, fiber_domain=None):
    """Prolongation of ``E`` to a fibration with ``k`` fibre coordinates.

    The result is an ordinary algebroid over the ``(n + k)``-dimensional total
    chart with anchor ``[[rho, 0], [0, I]]`` and the structure functions of E
    in the leading block.  Fibre coordinates are unbounded unless a box is given.
    """
    n, m = E.n, E.m
    if k < 0:
        raise ValueError("fiber dimension must be non-negative")
    if fiber_domain is None:
        fiber = Chart(np.full(k, -np.inf), np.full(k, np.inf))
    else:
        fiber = Chart.box(fiber_domain)
    N, M = n + k, m + k

    def rho(p):
        out = np.zeros((N, M))
        out[:n, :m] = E.anchor(p[:n])
        out[n:, m:] = np.eye(k)
        return out

    def c(p):
        out = np.zeros((M, M, M))
        out[:m, :m, :m] = E.structure(p[:n])
        return out

    def drho(p):
        out = np.zeros((N, M, N))
        out[:n, :m, :n] = E.anchor_derivative(p[:n])
        return out

    def dc(p):
        out = np.zeros((M, M, M, N))
        out[:m, :m, :m, :n] = E.structure_derivative(p[:n])
        return out

    realized = LieAlgebroid(E.chart.product(fiber), M, rho, c,
                            drho if E.analytic else None,
                            dc if E.analytic else None,
                            name=f"T^E P over {E.name}")
    return ProlongationAlgebroid(E, k, realized)


@dataclass(frozen=True, eq=False)
class TEEPoint:
    """Coordinates ``(x, y, z, v)`` of an element of T^E E."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "z", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))

    def to_list(self):
        return [self.x.tolist(), self.y.tolist(), self.z.tolist(), self.v.tolist()]

    def allclose(self, other, atol=1e-12):
        return all(np.allclose(getattr(self, f), getattr(other, f), rtol=0, atol=atol)
                   for f in ("x", "y", "z", "v"))


def vertical_endomorphism(ep):
    return TEEPoint(ep.x, ep.y, np.zeros_like(ep.z), ep.z)


def liouville_element(x, y):
    y = np.asarray(y, dtype=float)
    return TEEPoint(x, y, np.zeros_like(y), y)


def canonical_involution(E, ep):
    C = E.structure(ep.x)
    return TEEPoint(ep.x, ep.z, ep.y, ep.v + np.einsum("abg,b,g->a", C, ep.z, ep.y))


def complete_lift(E, eta, x, y):
    """Complete lift of the section ``eta`` at the point ``(x, y)`` of E."""
    x = E.check(x)
    y = np.asarray(y, dtype=float)
    eta_dot = eta.jacobian(x) @ (E.anchor(x) @ y)
    vertical = eta_dot + np.einsum("abg,b,g->a", E.structure(x), y, eta(x))
    return TEEPoint(x, y, eta(x), vertical)


def xi_variation(E, traj, sigma, sigma_dot=None):
    """Infinitesimal variation of an admissible curve generated by ``sigma(t)``.

    Returns ``(dx, dy)`` per sample: ``dx = rho sigma`` and
    ``dy = sigma' + C(a, sigma)``.  ``sigma'`` is taken by centered differences
    on the trajectory grid unless supplied.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != traj.y.shape:
        raise GridError(f"variation shape {sigma.shape} does not match trajectory {traj.y.shape}")
    if sigma_dot is None:
        sigma_dot = time_derivative(sigma, traj.times)
    dx = np.empty_like(traj.x)
    dy = np.empty_like(traj.y)
    for k in range(len(traj)):
        x = traj.x[k]
        dx[k] = E.anchor(x) @ sigma[k]
        dy[k] = sigma_dot[k] + np.einsum("abg,b,g->a", E.structure(x), traj.y[k], sigma[k])
    return dx, dy


def liouville_one_form(mu, z):
    """Liouville 1-form on T^E E*: pairs the momentum with the E part."""
    return float(np.dot(mu, z))


def canonical_symplectic(E, x, mu):
    """Canonical symplectic 2-form on T^E E* as a ``(2m, 2m)`` matrix in ``{X_a, P^a}``."""
    m = E.m
    mu = np.asarray(mu, dtype=float)
    out = np.zeros((2 * m, 2 * m))
    out[:m, :m] = np.tensordot(mu, E.structure(x), axes=([0], [0]))
    out[:m, m:] = np.eye(m)
    out[m:, :m] = -np.eye(m)
    return out


def liouville_form(E):
    """Liouville 1-form as a form field on ``prolong(E, m).realized``."""
    n, m = E.n, E.m

    def deriv(p):
        out = np.zeros((2 * m, n + m))
        out[:m, n:] = np.eye(m)
        return out

    return AlgebroidForm(1, lambda p: np.concatenate([p[n:], np.zeros(m)]), deriv)


def symplectic_form(E):
    """Canonical symplectic 2-form as a form field on ``prolong(E, m).realized``."""
    n, m = E.n, E.m

    def deriv(p):
        x = p[:n]
        out = np.zeros((2 * m, 2 * m, n + m))
        C = E.structure(x)
        dC = E.structure_derivative(x)
        out[:m, :m, :n] = np.tensordot(p[n:], dC, axes=([0], [0]))
        out[:m, :m, n:] = np.moveaxis(C, 0, -1)
        return out

    return AlgebroidForm(2, lambda p: canonical_symplectic(E, p[:n], p[n:]), deriv)
