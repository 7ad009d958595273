"""Concrete Lagrangians and morphisms with analytic derivatives."""

import numpy as np

from .core import (Chart, levi_civita, lie_algebra_algebroid, product_algebroid, so3_algebroid,
                   tangent_algebroid)
from .dynamics import LagrangianSystem
from .morphism import AlgebroidMorphism
from .so3 import body_map, body_map_derivative, exponential_chart_algebroid

RIGID_BODY_INERTIA = (1.0, 2.0, 3.0)


def pendulum(E=None):
    """``L = y^2/2 + cos x`` on the tangent bundle of the line."""
    E = E or tangent_algebroid(1)
    return LagrangianSystem(
        E,
        lambda x, y: 0.5 * y[0] ** 2 + np.cos(x[0]),
        lambda x, y: (np.array([-np.sin(x[0])]), y.copy()),
        lambda x, y: (np.zeros((1, 1)), np.eye(1)),
        name="pendulum",
    )


def rigid_body(inertia=RIGID_BODY_INERTIA, E=None):
    """``L = y . I y / 2`` on so(3)."""
    E = E or so3_algebroid()
    I = np.diag(np.asarray(inertia, dtype=float))
    n = E.n
    return LagrangianSystem(
        E,
        lambda x, y: 0.5 * y @ I @ y,
        lambda x, y: (np.zeros(n), I @ y),
        lambda x, y: (np.zeros((n, 3)), I),
        name="rigid body",
    )


def tso3_rigid_body(inertia=RIGID_BODY_INERTIA):
    """Left-invariant rigid body on SO(3) in exponential coordinates:
    ``L = |Phi(x) v|_I^2 / 2`` with ``Phi = dexp_{-x}``."""
    E = exponential_chart_algebroid()
    I = np.diag(np.asarray(inertia, dtype=float))

    def L(x, v):
        w = body_map(x) @ v
        return 0.5 * w @ I @ w

    def dL(x, v):
        P = body_map(x)
        dP = body_map_derivative(x)
        Iw = I @ (P @ v)
        return np.einsum("g,gai,a->i", Iw, dP, v), P.T @ Iw

    def d2L(x, v):
        P = body_map(x)
        dP = body_map_derivative(x)
        Iw = I @ (P @ v)
        dPv = np.einsum("gai,a->gi", dP, v)
        Lxy = np.einsum("gbi,g->ib", dP, Iw) + (P.T @ I @ dPv).T
        return Lxy, P.T @ I @ P

    return LagrangianSystem(E, L, dL, d2L, name="TSO(3) rigid body")


def tso3_to_so3():
    """Left trivialisation ``TSO(3) -> so(3)`` in the exponential chart."""
    return AlgebroidMorphism(
        exponential_chart_algebroid(), so3_algebroid(),
        phi=lambda x: np.zeros(0), Phi=body_map,
        dphi=lambda x: np.zeros((0, 3)), dPhi=body_map_derivative,
        fiberwise_surjective=True, fiberwise_bijective=True,
        name="left trivialisation",
    )


def atiyah_source():
    """Configuration space R x S^1 with coordinates ``(x, theta)``."""
    return tangent_algebroid(2, domain=[(-10.0, 10.0), (-100.0, 100.0)])


def atiyah_target():
    """``TM x g`` for M = R and the abelian circle algebra."""
    return product_algebroid(tangent_algebroid(1, domain=[(-10.0, 10.0)]),
                             lie_algebra_algebroid(np.zeros((1, 1, 1)), name="u(1)"))


def atiyah_lagrangians(E_source=None, E_target=None):
    """``L = (x'^2 + theta'^2)/2 + cos x`` and its reduced form."""
    E_source = E_source or atiyah_source()
    E_target = E_target or atiyah_target()

    def d2(x, y):
        return np.zeros((len(x), 2)), np.eye(2)

    src = LagrangianSystem(
        E_source,
        lambda x, y: 0.5 * y @ y + np.cos(x[0]),
        lambda x, y: (np.array([-np.sin(x[0]), 0.0]), y.copy()),
        d2, name="circle-invariant")
    tgt = LagrangianSystem(
        E_target,
        lambda x, y: 0.5 * y @ y + np.cos(x[0]),
        lambda x, y: (np.array([-np.sin(x[0])]), y.copy()),
        d2, name="reduced circle-invariant")
    return src, tgt


def atiyah_morphism(E_source=None, E_target=None):
    """Quotient by the circle: ``(x, theta) -> x``, fibre map the identity."""
    return AlgebroidMorphism(
        E_source or atiyah_source(), E_target or atiyah_target(),
        phi=lambda x: x[:1], Phi=lambda x: np.eye(2),
        dphi=lambda x: np.array([[1.0, 0.0]]), dPhi=lambda x: np.zeros((2, 2, 2)),
        fiberwise_surjective=True, fiberwise_bijective=True,
        name="circle quotient",
    )


def bracket_mismatch_morphism():
    """Identity fibre map from the abelian rank-3 bundle over the line to the
    so(3) bundle over the line: admissible but not a morphism."""
    base = Chart.box([(-1.0, 1.0)])
    zero = np.zeros((3, 3, 3))
    src = lie_algebra_algebroid(zero, base=base, name="trivial rank 3")
    tgt = lie_algebra_algebroid(levi_civita(), base=base, name="so(3) bundle")
    return AlgebroidMorphism(src, tgt, lambda x: x, lambda x: np.eye(3),
                             lambda x: np.eye(1), lambda x: np.zeros((3, 3, 1)),
                             True, True, name="bracket mismatch")
