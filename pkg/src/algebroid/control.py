"""Regular optimal control on a Lie algebroid.

The control Hamiltonian is ``H(x, mu, u) = mu . sigma(x, u) - L(x, u)``.
Critical trajectories solve

    x'   = rho(x) sigma(x, u)
    mu'  = -(rho^T H_x + mu_g C^g_{ab} sigma^b)
    0    = H_u

which is treated as an index-1 system: ``u`` is eliminated by Newton's method
at every Runge-Kutta stage, warm-started from the previous solve.
"""

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .core import Chart
from .dynamics import _chart_guard, rk4
from .errors import CompatibilityError, DomainError, MorphismError, RegularityError, StationarityError
from .morphism import check_morphism, contragredient
from .trajectory import CriticalTrajectory, time_derivative, uniform_grid

STATIONARITY_TOL = 1e-11
NEWTON_MAXITER = 50
CONDITION_LIMIT = 1e12
COMPATIBILITY_TOL = 1e-8


class ControlBoxWarning(UserWarning):
    """A Newton iterate was clamped to the control box."""


@dataclass(frozen=True, eq=False)
class OptimalControlProblem:
    """Control system ``sigma(x, u)`` with cost density ``L(x, u)``.

    Optional analytic derivatives: ``dsigma -> (sigma_x (m, n), sigma_u (m, k))``,
    ``dindex -> (L_x, L_u)``, ``sigma_uu -> (m, k, k)`` and ``index_uu -> (k, k)``.
    """

    E: object
    control_dim: int
    control_box: Chart
    sigma: Callable
    index: Callable
    dsigma: Optional[Callable] = None
    dindex: Optional[Callable] = None
    sigma_uu: Optional[Callable] = None
    index_uu: Optional[Callable] = None
    name: str = ""

    def sigma_at(self, x, u):
        return np.asarray(self.sigma(np.asarray(x, dtype=float), np.asarray(u, dtype=float)),
                          dtype=float).reshape(self.E.m)

    def index_at(self, x, u):
        return float(self.index(np.asarray(x, dtype=float), np.asarray(u, dtype=float)))

    def sigma_derivatives(self, x, u):
        x, u = np.asarray(x, dtype=float), np.asarray(u, dtype=float)
        if self.dsigma is not None:
            sx, su = self.dsigma(x, u)
            return (np.asarray(sx, dtype=float).reshape(self.E.m, self.E.n),
                    np.asarray(su, dtype=float).reshape(self.E.m, self.control_dim))
        n = self.E.n
        D = numdiff.derivative(lambda z: self.sigma_at(z[:n], z[n:]), np.concatenate([x, u]))
        return D[:, :n], D[:, n:]

    def index_gradients(self, x, u):
        x, u = np.asarray(x, dtype=float), np.asarray(u, dtype=float)
        if self.dindex is not None:
            lx, lu = self.dindex(x, u)
            return np.asarray(lx, dtype=float).reshape(self.E.n), np.asarray(lu, dtype=float)
        n = self.E.n
        g = numdiff.gradient(lambda z: self.index_at(z[:n], z[n:]), np.concatenate([x, u]))
        return g[:n], g[n:]

    def hamiltonian_uu(self, x, mu, u):
        x, mu, u = (np.asarray(v, dtype=float) for v in (x, mu, u))
        if self.sigma_uu is not None and self.index_uu is not None:
            return np.tensordot(mu, self.sigma_uu(x, u), axes=([0], [0])) - np.asarray(self.index_uu(x, u))
        D = numdiff.derivative(lambda w: hamiltonian_gradients(self, x, mu, w)[2], u)
        return 0.5 * (D + D.T)


def control_hamiltonian(P, x, mu, u):
    return float(np.dot(mu, P.sigma_at(x, u)) - P.index_at(x, u))


def hamiltonian_gradients(P, x, mu, u):
    """``(H_x, H_mu, H_u)``; ``H_mu`` is ``sigma`` itself."""
    mu = np.asarray(mu, dtype=float)
    sx, su = P.sigma_derivatives(x, u)
    lx, lu = P.index_gradients(x, u)
    return sx.T @ mu - lx, P.sigma_at(x, u), su.T @ mu - lu


def _clamp(P, u):
    box = P.control_box
    clamped = np.clip(u, box.lower, box.upper)
    if np.any(clamped != u):
        warnings.warn("stationarity iterate reached the control box boundary", ControlBoxWarning,
                      stacklevel=3)
    return clamped


def solve_stationarity(P, x, mu, u_guess):
    """Newton solve of ``H_u = 0``; returns ``(u, cond(H_uu))``."""
    u = _clamp(P, np.asarray(u_guess, dtype=float).reshape(P.control_dim).copy())
    cond = 1.0
    for _ in range(NEWTON_MAXITER + 1):
        Hu = hamiltonian_gradients(P, x, mu, u)[2]
        if np.linalg.norm(Hu) < STATIONARITY_TOL:
            return u, cond
        Huu = P.hamiltonian_uu(x, mu, u)
        cond = float(np.linalg.cond(Huu))
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise RegularityError(f"control Hessian is singular (cond {cond:.3e})", cond)
        u = _clamp(P, u - np.linalg.solve(Huu, Hu))
    raise StationarityError(f"stationarity Newton did not converge, |H_u| = {np.linalg.norm(Hu):.3e}")


def critical_rhs(P, x, mu, u):
    E = P.E
    x = E.check(x)
    return _critical_rhs(P, x, np.asarray(mu, dtype=float), u)


def _critical_rhs(P, x, mu, u):
    E = P.E
    Hx, sigma, _ = hamiltonian_gradients(P, x, mu, u)
    rho = E.anchor(x)
    mudot = -(rho.T @ Hx + np.einsum("g,gab,b->a", mu, E.structure(x), sigma))
    return rho @ sigma, mudot


def _stationarity_series(P, xs, mus, us):
    return np.array([np.linalg.norm(hamiltonian_gradients(P, x, mu, u)[2]) for x, mu, u in zip(xs, mus, us)])


def integrate_critical(P, x0, mu0, u0_guess, t0, t1, dt):
    E = P.E
    n = E.n
    x0 = E.check(x0)
    times = uniform_grid(t0, t1, dt)
    state = {"u": np.asarray(u0_guess, dtype=float), "t": t0}

    def solve(t, x, mu):
        try:
            u, _ = solve_stationarity(P, x, mu, state["u"])
        except (RegularityError, StationarityError) as exc:
            exc.time = t
            raise
        state["u"] = u
        return u

    def rhs(t, z):
        x, mu = z[:n], z[n:]
        u = solve(t, x, mu)
        return np.concatenate(_critical_rhs(P, x, mu, u))

    guard = _chart_guard(E)
    controls = [solve(t0, x0, np.asarray(mu0, dtype=float))]

    def on_step(t, z):
        guard(t, z)
        controls.append(solve(t, z[:n], z[n:]))

    states = rk4(rhs, np.concatenate([x0, np.asarray(mu0, dtype=float)]), times, on_step)
    xs, mus, us = states[:, :n], states[:, n:], np.array(controls)
    H = np.array([control_hamiltonian(P, x, mu, u) for x, mu, u in zip(xs, mus, us)])
    return CriticalTrajectory(times, xs, mus, us, H, _stationarity_series(P, xs, mus, us))


def criticality_residuals(P, traj, factor=50.0, stationarity_tol=1e-10):
    """Finite-difference DAE defects and stationarity along a sampled curve."""
    if len(traj) < 2:
        return {"x_defect": 0.0, "mu_defect": 0.0, "stationarity": 0.0, "H_drift": 0.0,
                "dae_bound": 0.0, "stationarity_bound": stationarity_tol, "pass": True}
    xdot = time_derivative(traj.x, traj.times)
    mudot = time_derivative(traj.mu, traj.times)
    xd_err = mu_err = 0.0
    for k in range(len(traj)):
        xd, md = _critical_rhs(P, traj.x[k], traj.mu[k], traj.u[k])
        xd_err = max(xd_err, float(np.max(np.abs(xdot[k] - xd), initial=0.0)))
        mu_err = max(mu_err, float(np.max(np.abs(mudot[k] - md), initial=0.0)))
    stat = float(np.max(_stationarity_series(P, traj.x, traj.mu, traj.u)))
    H = np.array([control_hamiltonian(P, x, mu, u) for x, mu, u in zip(traj.x, traj.mu, traj.u)])
    bound = factor * traj.dt ** 2
    return {"x_defect": xd_err, "mu_defect": mu_err, "stationarity": stat,
            "H_drift": float(np.max(np.abs(H - H[0]))),
            "dae_bound": bound, "stationarity_bound": stationarity_tol,
            "pass": bool(xd_err < bound and mu_err < bound and stat < stationarity_tol)}


def compatibility_residuals(M, psi, P, P_target, count=200, seed=0):
    """``max |L - L' o (phi, psi)|`` and ``max |Phi sigma - sigma' o (phi, psi)|``."""
    xs = M.source.chart.sample(count, seed=seed)
    us = P.control_box.sample(count, seed=seed + 1)
    index_err = sigma_err = 0.0
    for x, u in zip(xs, us):
        xp, up = M.base_map(x), np.asarray(psi(x, u), dtype=float)
        index_err = max(index_err, abs(P.index_at(x, u) - P_target.index_at(xp, up)))
        sigma_err = max(sigma_err, float(np.max(np.abs(
            M.fiber_matrix(x) @ P.sigma_at(x, u) - P_target.sigma_at(xp, up)), initial=0.0)))
    return {"index": index_err, "sigma": sigma_err}


def reduce_control(M, psi, P, P_target, traj, morphism_tol=1e-6):
    """Map a critical trajectory through ``(phi, Phi^c, psi)`` and certify the image."""
    compat = compatibility_residuals(M, psi, P, P_target)
    if max(compat.values()) > COMPATIBILITY_TOL:
        raise CompatibilityError(f"control systems are not compatible: {compat}")
    morph = check_morphism(M)
    if morph["max_residual"] > morphism_tol:
        raise MorphismError(f"map is not a Lie algebroid morphism (residual {morph['max_residual']:.3e})")
    xs, mus, us = [], [], []
    for x, mu, u in zip(traj.x, traj.mu, traj.u):
        xp, mup, _ = contragredient(M, x, mu)
        up = np.asarray(psi(x, u), dtype=float)
        if not P_target.control_box.contains(up):
            raise DomainError(f"mapped control {up.tolist()} outside target control box")
        xs.append(xp)
        mus.append(mup)
        us.append(up)
    xs = np.array(xs).reshape(len(traj), M.target.n)
    mus, us = np.array(mus), np.array(us)
    H = np.array([control_hamiltonian(P_target, x, mu, u) for x, mu, u in zip(xs, mus, us)])
    stat = _stationarity_series(P_target, xs, mus, us)
    image = CriticalTrajectory(traj.times, xs, mus, us, H, stat)
    resid = criticality_residuals(P_target, image)
    report = {"compatibility": compat, "morphism_residual": morph["max_residual"],
              "image_stationarity": float(np.max(stat, initial=0.0)),
              "target_residuals": resid,
              "pass": bool(resid["pass"] and np.max(stat, initial=0.0) < COMPATIBILITY_TOL)}
    return image, report


def problem_from_lagrangian(LS, control_box=None):
    """The case ``sigma = id``: controls are the fibre coordinates of E."""
    E = LS.E
    m = E.m
    box = control_box or Chart.cube(m, 1e6)
    eye = np.eye(m)

    def dsigma(x, u):
        return np.zeros((m, E.n)), eye

    return OptimalControlProblem(
        E, m, box,
        sigma=lambda x, u: u,
        index=LS.L,
        dsigma=dsigma,
        dindex=LS.gradients,
        sigma_uu=lambda x, u: np.zeros((m, m, m)),
        index_uu=lambda x, u: LS.second(x, u)[1],
        name=f"control({LS.name})",
    )
