import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebroid import control as oc
from algebroid import dynamics as dy
from algebroid import systems
from algebroid.core import Chart, so3_algebroid, tangent_algebroid
from algebroid.errors import CompatibilityError, RegularityError
from algebroid.morphism import AlgebroidMorphism, identity_morphism
from algebroid.scenarios import rigid_body_problem, tangent_classical_hamiltonian, tangent_classical_problem

from conftest import momentum_euler_oracle

I = np.array([1.0, 2.0, 3.0])


def quadratic_problem(E, weights=None):
    w = np.ones(E.m) if weights is None else np.asarray(weights, dtype=float)
    m = E.m
    return oc.OptimalControlProblem(E, m, Chart.cube(m, 1e3), lambda x, u: u,
                                    lambda x, u: 0.5 * np.sum(w * u ** 2),
                                    dsigma=lambda x, u: (np.zeros((m, E.n)), np.eye(m)),
                                    dindex=lambda x, u: (np.zeros(E.n), w * u),
                                    sigma_uu=lambda x, u: np.zeros((m, m, m)),
                                    index_uu=lambda x, u: np.diag(w))


def bilinear_problem():
    """sigma = (u1, x1 u2) on the plane with L = |u|^2 / 2."""
    E = tangent_algebroid(2)
    return oc.OptimalControlProblem(
        E, 2, Chart.cube(2, 1e3),
        sigma=lambda x, u: np.array([u[0], x[0] * u[1]]),
        index=lambda x, u: 0.5 * u @ u,
        dsigma=lambda x, u: (np.array([[0.0, 0.0], [u[1], 0.0]]), np.array([[1.0, 0.0], [0.0, x[0]]])),
        dindex=lambda x, u: (np.zeros(2), u.copy()),
        sigma_uu=lambda x, u: np.zeros((2, 2, 2)), index_uu=lambda x, u: np.eye(2))


def test_control_hamiltonian_value():
    P = bilinear_problem()
    assert oc.control_hamiltonian(P, [2.0, 0.0], [1.0, 1.0], [1.0, 3.0]) == pytest.approx(1 + 6 - 5)


def test_stationary_control_of_bilinear_problem():
    P = bilinear_problem()
    x, mu = np.array([1.5, -0.3]), np.array([0.7, -0.4])
    u, cond = oc.solve_stationarity(P, x, mu, [0.0, 0.0])
    assert np.allclose(u, [mu[0], x[0] * mu[1]], atol=1e-11)
    assert cond == pytest.approx(1.0)  # H_uu = -I since sigma is linear in u


def test_critical_rhs_of_bilinear_problem():
    P = bilinear_problem()
    x, mu, u = np.array([1.5, -0.3]), np.array([0.7, -0.4]), np.array([0.2, 0.5])
    xd, md = oc.critical_rhs(P, x, mu, u)
    assert np.allclose(xd, [0.2, 1.5 * 0.5])
    # H_x1 = mu2 u2, nothing else depends on x
    assert np.allclose(md, [-mu[1] * u[1], 0.0], atol=1e-8)


def test_critical_rhs_on_so3_is_coadjoint():
    P = rigid_body_problem(I)
    mu = np.array([1.0, -0.5, 0.3])
    u, _ = oc.solve_stationarity(P, [], mu, np.zeros(3))
    assert np.allclose(u, mu / I)
    _, md = oc.critical_rhs(P, [], mu, u)
    assert np.allclose(md, np.cross(mu, mu / I))


def test_free_so3_flow_is_constant():
    P = quadratic_problem(so3_algebroid())
    traj = oc.integrate_critical(P, [], [0.3, -0.2, 0.9], [0.0, 0.0, 0.0], 0.0, 1.0, 0.1)
    assert np.allclose(traj.mu, [0.3, -0.2, 0.9], atol=1e-14)
    assert np.allclose(traj.u, traj.mu, atol=1e-14)


def test_hamiltonian_mu_gradient_is_sigma(rng):
    P = bilinear_problem()
    for _ in range(5):
        x, mu, u = rng.normal(size=(3, 2))
        h = 1e-6
        fd = np.array([(oc.control_hamiltonian(P, x, mu + h * e, u) - oc.control_hamiltonian(P, x, mu - h * e, u))
                       / (2 * h) for e in np.eye(2)])
        assert np.allclose(fd, oc.hamiltonian_gradients(P, x, mu, u)[1], atol=1e-7)


def test_rigid_body_critical_flow_matches_oracle():
    P = rigid_body_problem(I)
    traj = oc.integrate_critical(P, [], [1.0, 0.2, 0.3], np.zeros(3), 0.0, 2.0, 1e-3)
    oracle = momentum_euler_oracle(I, [1.0, 0.2, 0.3], 1e-3, 2000)
    assert np.max(np.abs(traj.mu - oracle)) < 1e-10
    resid = oc.criticality_residuals(P, traj)
    assert resid["pass"] and resid["H_drift"] < 1e-9


def test_classical_elimination_agrees_with_hamiltonian_flow():
    P = tangent_classical_problem()
    traj = oc.integrate_critical(P, [0.5], [0.2], [0.2], 0.0, 3.0, 1e-3)
    ham = dy.integrate_hamiltonian(tangent_classical_hamiltonian(), [0.5], [0.2], 0.0, 3.0, 1e-3)
    assert np.max(np.abs(traj.x - ham.x)) < 1e-8
    assert np.max(np.abs(traj.mu - ham.y)) < 1e-8


def test_frozen_control_fails_stationarity():
    P = rigid_body_problem(I)
    traj = oc.integrate_critical(P, [], [1.0, 0.2, 0.3], np.zeros(3), 0.0, 1.0, 1e-2)
    frozen = type(traj)(traj.times, traj.x, traj.mu, np.tile(traj.u[0], (len(traj), 1)))
    assert not oc.criticality_residuals(P, frozen)["pass"]


def test_single_sample_trajectory_is_vacuously_critical():
    P = rigid_body_problem(I)
    traj = oc.integrate_critical(P, [], [1.0, 0.0, 0.0], np.zeros(3), 0.0, 0.0, 0.1)
    assert len(traj) == 1
    assert oc.criticality_residuals(P, traj)["pass"]


def test_box_clamp_warns():
    E = tangent_algebroid(1)
    P = oc.OptimalControlProblem(E, 1, Chart.box([(-1.0, 1.0)]), lambda x, u: u, lambda x, u: 0.5 * u[0] ** 2)
    with pytest.warns(oc.ControlBoxWarning):
        oc.solve_stationarity(P, [0.0], [0.5], [5.0])


def test_no_warning_inside_box():
    P = rigid_body_problem(I)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        oc.solve_stationarity(P, [], [1.0, 1.0, 1.0], np.zeros(3))


def test_singular_control_hessian():
    E = tangent_algebroid(1)
    P = oc.OptimalControlProblem(E, 1, Chart.cube(1, 10.0), lambda x, u: u, lambda x, u: u[0])
    with pytest.raises(RegularityError):
        oc.solve_stationarity(P, [0.0], [0.5], [0.0])


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_hamiltonian_is_conserved(seed):
    rng = np.random.default_rng(seed)
    P = rigid_body_problem(I)
    traj = oc.integrate_critical(P, [], rng.normal(size=3), np.zeros(3), 0.0, 1.0, 1e-2)
    assert np.max(np.abs(traj.hamiltonian - traj.hamiltonian[0])) < 1e-6


def test_identity_reduction():
    P = rigid_body_problem(I)
    traj = oc.integrate_critical(P, [], [1.0, 0.2, 0.3], np.zeros(3), 0.0, 1.0, 1e-2)
    image, report = oc.reduce_control(identity_morphism(P.E), lambda x, u: u, P, P, traj)
    assert report["pass"]
    assert np.array_equal(image.mu, traj.mu)


def test_scaling_reduction_maps_momenta_contragrediently():
    E, ET = tangent_algebroid(2, domain=[(-10.0, 10.0)] * 2), tangent_algebroid(2)
    scale = np.array([2.0, 3.0])
    P = quadratic_problem(E)
    PT = quadratic_problem(ET, 1 / scale ** 2)
    M = AlgebroidMorphism(E, ET, lambda x: scale * x, lambda x: np.diag(scale),
                          lambda x: np.diag(scale), lambda x: np.zeros((2, 2, 2)))
    traj = oc.integrate_critical(P, [0.1, 0.2], [2.0, 3.0], [0.0, 0.0], 0.0, 1.0, 0.1)
    image, report = oc.reduce_control(M, lambda x, u: scale * u, P, PT, traj)
    assert report["pass"], report
    assert np.allclose(image.mu, [1.0, 1.0])


def test_incompatible_control_maps():
    P = rigid_body_problem(I)
    traj = oc.integrate_critical(P, [], [1.0, 0.2, 0.3], np.zeros(3), 0.0, 0.1, 0.1)
    with pytest.raises(CompatibilityError):
        oc.reduce_control(identity_morphism(P.E), lambda x, u: 2 * u, P, P, traj)


def test_tso3_control_reduction():
    M = systems.tso3_to_so3()
    box = Chart.cube(3, 1e3)
    P = oc.problem_from_lagrangian(systems.tso3_rigid_body(), box)
    PT = rigid_body_problem(I)
    x0 = np.array([0.1, -0.1, 0.2])
    traj = oc.integrate_critical(P, x0, M.fiber_matrix(x0).T @ [0.5, 0.2, -0.4], np.zeros(3), 0.0, 1.0, 1e-2)
    image, report = oc.reduce_control(M, lambda x, u: M.fiber_matrix(x) @ u, P, PT, traj)
    assert report["pass"], report
    direct = oc.integrate_critical(PT, [], [0.5, 0.2, -0.4], np.zeros(3), 0.0, 1.0, 1e-2)
    assert np.max(np.abs(direct.mu - image.mu)) < 1e-9
