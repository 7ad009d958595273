"""Lagrangian and Hamiltonian dynamics on a Lie algebroid.

Sign and index conventions:

* ``cartan_two_form`` returns the matrix of omega_L in the basis
  ``{X_a, V_a}``: ``[[A, W], [-W, 0]]``.
* A Hamiltonian section solves ``i_s Omega = dH``, i.e. ``Omega^T s = dH``.
* ``poisson_bracket(F, G) = -dF . Omega^{-1} dG`` which makes
  ``{x^i, H}`` and ``{mu_a, H}`` equal to the Hamilton equations.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .errors import ChartExitError, RegularityError
from .prolongation import canonical_symplectic
from .trajectory import Trajectory, time_derivative, uniform_grid

REGULARITY_THRESHOLD = 1e-10
FD_REGULARITY_THRESHOLD = 1e-6
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


@dataclass(frozen=True, eq=False)
class LagrangianSystem:
    """A Lagrangian ``L(x, y)`` on the algebroid ``E``.

    ``dL(x, y)`` returns ``(L_x, L_y)``; ``d2L(x, y)`` returns
    ``(L_xy, L_yy)`` with ``L_xy[i, a] = d^2 L / dx^i dy^a``.
    """

    E: object
    L: Callable
    dL: Optional[Callable] = None
    d2L: Optional[Callable] = None
    name: str = ""

    def value(self, x, y):
        return float(self.L(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def _joint(self, z):
        n = self.E.n
        return self.L(z[:n], z[n:])

    def gradients(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.dL is not None:
            Lx, Ly = self.dL(x, y)
            return np.asarray(Lx, dtype=float), np.asarray(Ly, dtype=float)
        g = numdiff.gradient(self._joint, np.concatenate([x, y]))
        return g[:x.size], g[x.size:]

    def second(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        n = x.size
        if self.d2L is not None:
            Lxy, Lyy = self.d2L(x, y)
            return np.asarray(Lxy, dtype=float).reshape(n, y.size), np.asarray(Lyy, dtype=float)
        z = np.concatenate([x, y])
        if self.dL is not None:
            H = numdiff.derivative(lambda w: self.gradients(w[:n], w[n:])[1], z)
            return H[:, :n].T.copy(), 0.5 * (H[:, n:] + H[:, n:].T)
        H = numdiff.hessian(self._joint, z)
        return H[:n, n:], 0.5 * (H[n:, n:] + H[n:, n:].T)


@dataclass(frozen=True, eq=False)
class PhaseFunction:
    """Scalar field ``F(x, mu)`` on E* with optional gradient ``(F_x, F_mu)``."""

    f: Callable
    grad: Optional[Callable] = None

    def __call__(self, x, mu):
        return float(self.f(np.asarray(x, dtype=float), np.asarray(mu, dtype=float)))

    def gradients(self, x, mu):
        x, mu = np.asarray(x, dtype=float), np.asarray(mu, dtype=float)
        if self.grad is not None:
            gx, gm = self.grad(x, mu)
            return np.asarray(gx, dtype=float), np.asarray(gm, dtype=float)
        g = numdiff.gradient(lambda z: self.f(z[:x.size], z[x.size:]), np.concatenate([x, mu]))
        return g[:x.size], g[x.size:]


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    E: object
    H: Callable
    dH: Optional[Callable] = None
    name: str = ""

    @property
    def function(self):
        return PhaseFunction(self.H, self.dH)

    def value(self, x, mu):
        return self.function(x, mu)

    def gradients(self, x, mu):
        return self.function.gradients(x, mu)


# Lagrangian side


def energy(LS, x, y):
    y = np.asarray(y, dtype=float)
    return float(y @ LS.gradients(x, y)[1] - LS.value(x, y))


def energy_gradients(LS, x, y):
    """``(dE_L/dx, dE_L/dy)``."""
    y = np.asarray(y, dtype=float)
    Lx, _ = LS.gradients(x, y)
    Lxy, W = LS.second(x, y)
    return Lxy @ y - Lx, W @ y


def cartan_one_form(LS, x, y):
    return LS.gradients(x, y)[1]


def legendre(LS, x, y):
    return np.asarray(x, dtype=float), cartan_one_form(LS, x, y)


def cartan_two_form(LS, x, y):
    E = LS.E
    m = E.m
    _, Ly = LS.gradients(x, y)
    Lxy, W = LS.second(x, y)
    M = Lxy.T @ E.anchor(x)
    A = M - M.T + np.tensordot(Ly, E.structure(x), axes=([0], [0]))
    out = np.zeros((2 * m, 2 * m))
    out[:m, :m] = A
    out[:m, m:] = W
    out[m:, :m] = -W.T
    return out


def is_regular(LS, x, y):
    """Whether the fibre Hessian ``W`` is nondegenerate.

    The smallest singular value is compared with ``max(1, |W|)`` times a
    threshold that is looser when ``W`` comes from finite differences.  The
    returned condition number uses the same ``max(1, |W|)`` scale.
    """
    _, W = LS.second(x, y)
    sv = np.linalg.svd(W, compute_uv=False)
    threshold = REGULARITY_THRESHOLD if LS.d2L is not None else FD_REGULARITY_THRESHOLD
    regular = sv[-1] > threshold * max(1.0, sv[0])
    cond = float(max(1.0, sv[0]) / sv[-1]) if sv[-1] > 0 else float("inf")
    return bool(regular), cond


def euler_lagrange_rhs(LS, x, y):
    """``(x', y')`` of the Euler-Lagrange section at ``(x, y)``."""
    E = LS.E
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    regular, cond = is_regular(LS, x, y)
    if not regular:
        raise RegularityError(f"Lagrangian is singular at x={x.tolist()}, y={y.tolist()}", cond)
    rho = E.anchor(x)
    Lx, Ly = LS.gradients(x, y)
    Lxy, W = LS.second(x, y)
    b = (rho.T @ Lx - Lxy.T @ (rho @ y)
         - np.einsum("g,gab,b->a", Ly, E.structure(x), y))
    return rho @ y, np.linalg.solve(W, b)


def symplectic_residual(LS, x, y):
    """``max_Z |omega_L(Gamma_L, Z) - dE_L(Z)|`` over the basis ``{X_a, V_a}``."""
    E = LS.E
    xdot, f = euler_lagrange_rhs(LS, x, y)
    gamma = np.concatenate([np.asarray(y, dtype=float), f])
    omega = cartan_two_form(LS, x, y)
    Ex, Ey = energy_gradients(LS, x, y)
    dE = np.concatenate([E.anchor(x).T @ Ex, Ey])
    return float(np.max(np.abs(omega.T @ gamma - dE)))


def rk4(rhs, z0, times, on_step=None):
    """Classical fourth-order Runge-Kutta on a fixed grid."""
    z = np.asarray(z0, dtype=float).copy()
    out = np.empty((len(times), z.size))
    out[0] = z
    for k in range(len(times) - 1):
        t, h = times[k], times[k + 1] - times[k]
        k1 = rhs(t, z)
        k2 = rhs(t + h / 2, z + h / 2 * k1)
        k3 = rhs(t + h / 2, z + h / 2 * k2)
        k4 = rhs(t + h, z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if on_step is not None:
            on_step(times[k + 1], z)
        out[k + 1] = z
    return out


def _chart_guard(E):
    def guard(t, z):
        if not E.chart.contains(z[:E.n]):
            raise ChartExitError(f"trajectory left the chart at t={t:.6g}", time=t)
    return guard


def _with_time(fn, exc_types):
    def wrapped(t, z):
        try:
            return fn(t, z)
        except exc_types as exc:
            if getattr(exc, "time", None) is None:
                exc.time = t
            raise
    return wrapped


def lagrangian_trajectory(LS, times, x, y):
    """Wrap samples as a trajectory with energy and admissibility series."""
    E = LS.E
    xdot = time_derivative(x, times)
    resid = np.array([np.max(np.abs(xdot[k] - E.anchor(x[k]) @ y[k]), initial=0.0)
                      for k in range(len(times))])
    energies = np.array([energy(LS, x[k], y[k]) for k in range(len(times))])
    return Trajectory(times, x, y, "lagrangian", energies, resid)


def integrate_lagrangian(LS, x0, y0, t0, t1, dt):
    E = LS.E
    n = E.n
    x0 = E.check(x0)
    times = uniform_grid(t0, t1, dt)

    def rhs(t, z):
        xd, yd = euler_lagrange_rhs(LS, z[:n], z[n:])
        return np.concatenate([xd, yd])

    states = rk4(_with_time(rhs, (RegularityError,)),
                 np.concatenate([x0, np.asarray(y0, dtype=float)]), times, _chart_guard(E))
    return lagrangian_trajectory(LS, times, states[:, :n], states[:, n:])


def legendre_inverse(LS, x, mu, y_guess=None):
    """Solve ``dL/dy(x, y) = mu`` for ``y`` by Newton iteration."""
    x, mu = np.asarray(x, dtype=float), np.asarray(mu, dtype=float)
    y = np.zeros_like(mu) if y_guess is None else np.asarray(y_guess, dtype=float).copy()
    for _ in range(NEWTON_MAXITER):
        r = LS.gradients(x, y)[1] - mu
        if np.max(np.abs(r), initial=0.0) < NEWTON_TOL:
            return y
        _, W = LS.second(x, y)
        y = y - np.linalg.solve(W, r)
    r = LS.gradients(x, y)[1] - mu
    if np.max(np.abs(r), initial=0.0) < 1e3 * NEWTON_TOL:
        return y
    raise RegularityError(f"Legendre inversion did not converge at x={x.tolist()}, mu={mu.tolist()}")


def hamiltonian_from_lagrangian(LS):
    """``H = E_L o FL^{-1}`` with gradients ``(-L_x, y)`` from the Legendre identities."""

    def H(x, mu):
        y = legendre_inverse(LS, x, mu)
        return energy(LS, x, y)

    def dH(x, mu):
        y = legendre_inverse(LS, x, mu)
        return -LS.gradients(x, y)[0], y

    return HamiltonianSystem(LS.E, H, dH, name=f"Legendre({LS.name})")


# Hamiltonian side


def hamilton_rhs(HS, x, mu):
    return _hamilton_rhs(HS, HS.E.check(x), mu)


def _hamilton_rhs(HS, x, mu):
    E = HS.E
    mu = np.asarray(mu, dtype=float)
    Hx, Hmu = HS.gradients(x, mu)
    rho = E.anchor(x)
    mudot = -rho.T @ Hx - np.einsum("g,gab,b->a", mu, E.structure(x), Hmu)
    return rho @ Hmu, mudot


def hamiltonian_trajectory(HS, times, x, mu):
    E = HS.E
    xdot = time_derivative(x, times)
    resid = np.empty(len(times))
    energies = np.empty(len(times))
    for k in range(len(times)):
        resid[k] = np.max(np.abs(xdot[k] - E.anchor(x[k]) @ HS.gradients(x[k], mu[k])[1]), initial=0.0)
        energies[k] = HS.value(x[k], mu[k])
    return Trajectory(times, x, mu, "hamiltonian", energies, resid)


def integrate_hamiltonian(HS, x0, mu0, t0, t1, dt):
    E = HS.E
    n = E.n
    x0 = E.check(x0)
    times = uniform_grid(t0, t1, dt)

    def rhs(t, z):
        xd, md = _hamilton_rhs(HS, z[:n], z[n:])
        return np.concatenate([xd, md])

    states = rk4(rhs, np.concatenate([x0, np.asarray(mu0, dtype=float)]), times, _chart_guard(E))
    return hamiltonian_trajectory(HS, times, states[:, :n], states[:, n:])


def differential(E, F, x, mu):
    """Components of ``dF`` in the dual basis ``{X^a, P_a}``."""
    Fx, Fmu = F.gradients(x, mu)
    return np.concatenate([E.anchor(x).T @ Fx, Fmu])


def hamiltonian_section(E, F, x, mu):
    """Solution ``s`` of ``i_s Omega = dF``."""
    Omega = canonical_symplectic(E, x, mu)
    return np.linalg.solve(Omega.T, differential(E, F, x, mu))


def poisson_bracket(E, F, G, x, mu):
    Omega = canonical_symplectic(E, x, mu)
    v = np.linalg.solve(Omega, differential(E, G, x, mu))
    return float(-differential(E, F, x, mu) @ v)


def coordinate_function(E, i):
    """Base coordinate ``x^i`` as a phase function."""
    def grad(x, mu):
        g = np.zeros(E.n)
        g[i] = 1.0
        return g, np.zeros(E.m)
    return PhaseFunction(lambda x, mu: x[i], grad)


def momentum_function(E, a):
    """Fibre coordinate ``mu_a`` as a phase function."""
    def grad(x, mu):
        g = np.zeros(E.m)
        g[a] = 1.0
        return np.zeros(E.n), g
    return PhaseFunction(lambda x, mu: mu[a], grad)
