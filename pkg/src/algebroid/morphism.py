"""Lie algebroid morphisms, trajectory pushforward and reduction checks.

A vector bundle map is given by its base map ``phi(x)`` and fibre matrix
``Phi(x)`` (shape ``(m', m)``).  Admissibility is checked in the intrinsic
form ``Dphi(x) rho(x) = rho'(phi(x)) Phi(x)``; the morphism property is
checked as commutation of pullback with d on the generators ``x'^k`` and
``e'^g``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .dynamics import euler_lagrange_rhs, lagrangian_trajectory, rk4, symplectic_residual
from .errors import BijectivityError, DomainError, LagrangianMismatchError, MorphismError
from .trajectory import Trajectory, time_derivative, uniform_grid
from .variational import criticality_certificate

SURJECTIVITY_TOL = 1e-8
MISMATCH_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class AlgebroidMorphism:
    source: object
    target: object
    phi: Callable
    Phi: Callable
    dphi: Optional[Callable] = None
    dPhi: Optional[Callable] = None
    fiberwise_surjective: bool = False
    fiberwise_bijective: bool = False
    name: str = ""

    def base_map(self, x):
        return np.asarray(self.phi(np.asarray(x, dtype=float)), dtype=float).reshape(self.target.n)

    def fiber_matrix(self, x):
        return np.asarray(self.Phi(np.asarray(x, dtype=float)), dtype=float).reshape(self.target.m, self.source.m)

    def base_jacobian(self, x):
        if self.dphi is not None:
            return np.asarray(self.dphi(x), dtype=float).reshape(self.target.n, self.source.n)
        return numdiff.derivative(self.base_map, x)

    def fiber_derivative(self, x):
        if self.dPhi is not None:
            return np.asarray(self.dPhi(x), dtype=float)
        return numdiff.derivative(self.fiber_matrix, x)

    def image_point(self, x):
        xp = self.base_map(x)
        if not self.target.chart.contains(xp):
            raise DomainError(f"image {xp.tolist()} of {np.asarray(x).tolist()} outside target chart")
        return xp


def identity_morphism(E):
    return AlgebroidMorphism(E, E, lambda x: x, lambda x: np.eye(E.m),
                             lambda x: np.eye(E.n), lambda x: np.zeros((E.m, E.m, E.n)),
                             True, True, name="identity")


def projection_morphism(E1, E2, product):
    """Projection of ``product_algebroid(E1, E2)`` onto its first factor."""
    n1, m1 = E1.n, E1.m
    P = np.hstack([np.eye(m1), np.zeros((m1, E2.m))])
    D = np.hstack([np.eye(n1), np.zeros((n1, E2.n))])
    return AlgebroidMorphism(product, E1, lambda x: np.asarray(x)[:n1], lambda x: P,
                             lambda x: D, lambda x: np.zeros((m1, product.m, product.n)),
                             True, False, name="projection")


def compose(M2, M1):
    """``M2 o M1``."""
    if M1.target is not M2.source:
        raise MorphismError("morphisms are not composable")

    def Phi(x):
        return M2.fiber_matrix(M1.base_map(x)) @ M1.fiber_matrix(x)

    def dphi(x):
        return M2.base_jacobian(M1.base_map(x)) @ M1.base_jacobian(x)

    def dPhi(x):
        xm = M1.base_map(x)
        outer = np.einsum("gmj,ji,ma->gai", M2.fiber_derivative(xm), M1.base_jacobian(x), M1.fiber_matrix(x))
        return outer + np.einsum("gm,mai->gai", M2.fiber_matrix(xm), M1.fiber_derivative(x))

    return AlgebroidMorphism(M1.source, M2.target, lambda x: M2.base_map(M1.base_map(x)), Phi, dphi, dPhi,
                             fiberwise_surjective=M1.fiberwise_surjective and M2.fiberwise_surjective,
                             fiberwise_bijective=M1.fiberwise_bijective and M2.fiberwise_bijective,
                             name=f"{M2.name} o {M1.name}")


def _samples(M, samples):
    if samples is None:
        samples = M.source.chart.sample(100)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 2:
        return samples
    return samples.reshape(-1, M.source.n) if M.source.n else samples.reshape(1, 0)


def admissibility_residual(M, x):
    xp = M.image_point(x)
    lhs = M.base_jacobian(x) @ M.source.anchor(x)
    rhs = M.target.anchor(xp) @ M.fiber_matrix(x)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def morphism_residual(M, x):
    """``max |Phi^*(d e'^g) - d(Phi^* e'^g)|`` over the basis 1-forms."""
    E, Ep = M.source, M.target
    xp = M.image_point(x)
    Phi, dPhi = M.fiber_matrix(x), M.fiber_derivative(x)
    rho = E.anchor(x)
    pulled = -np.einsum("gmn,ma,nb->gab", Ep.structure(xp), Phi, Phi)
    d_of_pull = (np.einsum("ia,gbi->gab", rho, dPhi) - np.einsum("ib,gai->gab", rho, dPhi)
                 - np.einsum("gm,mab->gab", Phi, E.structure(x)))
    return float(np.max(np.abs(pulled - d_of_pull), initial=0.0))


def check_admissible(M, samples=None):
    pts = _samples(M, samples)
    worst = max(admissibility_residual(M, x) for x in pts)
    return {"max_residual": worst, "samples": len(pts)}


def check_morphism(M, samples=None):
    pts = _samples(M, samples)
    functions = max(admissibility_residual(M, x) for x in pts)
    forms = max(morphism_residual(M, x) for x in pts)
    return {"function_generators": functions, "form_generators": forms,
            "max_residual": max(functions, forms), "samples": len(pts)}


def check_fiberwise(M, samples=None):
    """Minimum singular value and rank of ``Phi`` over the samples."""
    pts = _samples(M, samples)
    smin = np.inf
    rank = M.target.m
    for x in pts:
        sv = np.linalg.svd(M.fiber_matrix(x), compute_uv=False)
        smin = min(smin, float(sv.min()) if sv.size else np.inf)
        rank = min(rank, int(np.sum(sv > SURJECTIVITY_TOL)))
    square = M.source.m == M.target.m
    return {"min_singular_value": smin, "min_rank": rank,
            "surjective": rank == M.target.m,
            "bijective": square and rank == M.target.m and smin > SURJECTIVITY_TOL}


def pushforward_trajectory(M, traj, target_lagrangian=None):
    xs = np.array([M.image_point(x) for x in traj.x]).reshape(len(traj), M.target.n)
    ys = np.array([M.fiber_matrix(x) @ y for x, y in zip(traj.x, traj.y)])
    if target_lagrangian is not None:
        return lagrangian_trajectory(target_lagrangian, traj.times, xs, ys)
    xdot = time_derivative(xs, traj.times)
    resid = np.array([np.max(np.abs(xdot[k] - M.target.anchor(xs[k]) @ ys[k]), initial=0.0)
                      for k in range(len(traj))])
    return Trajectory(traj.times, xs, ys, "lagrangian", None, resid)


def euler_lagrange_defect(LS, traj):
    """Pointwise ``|y'_fd - f(x, y)|`` and ``|x'_fd - rho(x) y|`` along a sampled curve."""
    ydot = time_derivative(traj.y, traj.times)
    xdot = time_derivative(traj.x, traj.times)
    out = np.empty(len(traj))
    for k in range(len(traj)):
        xd, f = euler_lagrange_rhs(LS, traj.x[k], traj.y[k])
        out[k] = max(np.max(np.abs(ydot[k] - f), initial=0.0), np.max(np.abs(xdot[k] - xd), initial=0.0))
    return out


def lagrangian_mismatch(M, LS, LS_target, count=200, seed=0, velocity_scale=1.0):
    """``max |L - L' o Phi|`` at random ``(x, y)`` samples."""
    rng = np.random.default_rng(seed)
    xs = M.source.chart.sample(count, seed=seed)
    worst = 0.0
    for x in xs:
        y = velocity_scale * rng.uniform(-1, 1, M.source.m)
        xp = M.base_map(x)
        worst = max(worst, abs(LS.value(x, y) - LS_target.value(xp, M.fiber_matrix(x) @ y)))
    return worst


def verify_reduction(M, LS, LS_target, traj, samples=None, defect_factor=50.0):
    """Certify that the image of a solution for ``L`` solves the equations for ``L'``."""
    mismatch = lagrangian_mismatch(M, LS, LS_target)
    if mismatch > MISMATCH_TOL:
        raise LagrangianMismatchError(f"L differs from L' o Phi by {mismatch:.3e}")
    fiber = check_fiberwise(M, samples)
    if not fiber["surjective"]:
        raise MorphismError("reduction requires a fiberwise surjective morphism")
    bound = defect_factor * traj.dt ** 2
    source_defect = float(np.max(euler_lagrange_defect(LS, traj)))
    image = pushforward_trajectory(M, traj, LS_target)
    target_defect = float(np.max(euler_lagrange_defect(LS_target, image)))
    cert = criticality_certificate(LS_target, image)
    return {
        "lagrangian_mismatch": mismatch,
        "source_defect": source_defect,
        "target_defect": target_defect,
        "defect_bound": bound,
        "target_admissibility": float(np.max(image.residual)),
        "certificate": {k: v for k, v in cert.items() if k != "per_variation"},
        "pass": bool(source_defect < bound and target_defect < bound and cert["pass"]),
    }, image


def contragredient(M, x, mu):
    """``(phi(x), Phi(x)^{-T} mu)`` and the condition number of ``Phi(x)``."""
    Phi = M.fiber_matrix(x)
    if Phi.shape[0] != Phi.shape[1]:
        raise BijectivityError("contragredient needs a square fibre matrix")
    sv = np.linalg.svd(Phi, compute_uv=False)
    if sv.size and sv.min() <= SURJECTIVITY_TOL:
        raise BijectivityError(f"fibre matrix is singular at x={np.asarray(x).tolist()}")
    cond = float(sv.max() / sv.min()) if sv.size else 1.0
    return M.base_map(x), np.linalg.solve(Phi.T, np.asarray(mu, dtype=float)), cond


def prolonged_contragredient(M, x, mu, b, mu_dot):
    """Image of the element ``(b, v)`` of T^E E* at ``(x, mu)``, where the
    tangent vector ``v`` has base part ``rho(x) b`` and fibre part ``mu_dot``."""
    xp, mup, _ = contragredient(M, x, mu)
    Phi = M.fiber_matrix(x)
    xdot = M.source.anchor(x) @ b
    dPhi = np.tensordot(M.fiber_derivative(x), xdot, axes=([2], [0]))
    mup_dot = np.linalg.solve(Phi.T, mu_dot - dPhi.T @ mup)
    return xp, mup, Phi @ b, M.base_jacobian(x) @ xdot, mup_dot


def lift_solution(M, LS, LS_target, x0, y0_target, t0, t1, dt):
    """Reconstruct a source curve from a target solution through a fibrewise
    bijective morphism: integrate ``x' = rho(x) Phi(x)^{-1} y'`` together with
    the target dynamics ``y'' = f'(phi(x), y')``."""
    if not M.fiberwise_bijective:
        raise BijectivityError("reconstruction needs a fiberwise bijective morphism")
    n = M.source.n
    times = uniform_grid(t0, t1, dt)

    def rhs(t, z):
        x, yp = z[:n], z[n:]
        xd = M.source.anchor(x) @ np.linalg.solve(M.fiber_matrix(x), yp)
        _, ypd = euler_lagrange_rhs(LS_target, M.base_map(x), yp)
        return np.concatenate([xd, ypd])

    states = rk4(rhs, np.concatenate([np.asarray(x0, dtype=float), np.asarray(y0_target, dtype=float)]), times)
    xs = states[:, :n]
    ys = np.array([np.linalg.solve(M.fiber_matrix(x), yp) for x, yp in zip(xs, states[:, n:])])
    lifted = lagrangian_trajectory(LS, times, xs, ys)
    sympl = max(symplectic_residual(LS, x, y) for x, y in zip(xs, ys))
    defect = float(np.max(euler_lagrange_defect(LS, lifted)))
    return lifted, {"symplectic_residual": sympl, "source_defect": defect}
