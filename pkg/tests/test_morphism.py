import numpy as np
import pytest

from algebroid import dynamics as dy
from algebroid import systems
from algebroid.core import product_algebroid, so3_algebroid, tangent_algebroid
from algebroid.errors import BijectivityError, DomainError, LagrangianMismatchError, MorphismError
from algebroid.morphism import (AlgebroidMorphism, admissibility_residual, check_admissible, check_fiberwise,
                                check_morphism, compose, contragredient, euler_lagrange_defect, identity_morphism,
                                lift_solution, morphism_residual, projection_morphism, prolonged_contragredient,
                                pushforward_trajectory, verify_reduction)
from algebroid.so3 import action_algebroid, body_map, rotation, vee

from conftest import pendulum_oracle, rk4_oracle

I = np.array([1.0, 2.0, 3.0])


def scaled_column(E, column, factor):
    scale = np.ones(E.m)
    scale[column] = factor
    return AlgebroidMorphism(E, E, lambda x: x, lambda x: np.diag(scale))


@pytest.fixture(scope="module")
def tso3_solution():
    LS = systems.tso3_rigid_body()
    return LS, dy.integrate_lagrangian(LS, [0.1, -0.2, 0.05], [0.5, 0.2, -0.3], 0.0, 2.0, 1e-2)


def test_identity_is_a_morphism():
    E = action_algebroid()
    report = check_morphism(identity_morphism(E))
    assert report["max_residual"] < 1e-12


def test_scaling_a_column_breaks_admissibility_by_the_anchor():
    E = tangent_algebroid(2)
    M = scaled_column(E, 0, 2.0)
    assert admissibility_residual(M, [0.1, 0.2]) == pytest.approx(1.0)


def test_tso3_trivialisation_is_a_morphism():
    M = systems.tso3_to_so3()
    assert check_admissible(M)["max_residual"] < 1e-12
    assert check_morphism(M)["max_residual"] < 1e-10
    fd = AlgebroidMorphism(M.source, M.target, M.phi, M.Phi)
    assert check_morphism(fd, M.source.chart.sample(20, seed=1))["max_residual"] < 1e-5


def test_bracket_mismatch_is_admissible_only():
    M = bracket_mismatch = systems.bracket_mismatch_morphism()
    report = check_morphism(M)
    assert report["function_generators"] < 1e-12
    assert report["form_generators"] == pytest.approx(1.0)
    assert morphism_residual(bracket_mismatch, [0.3]) == pytest.approx(1.0)


def test_image_outside_target_chart():
    E = tangent_algebroid(1, domain=[(-5.0, 5.0)])
    small = tangent_algebroid(1, domain=[(-1.0, 1.0)])
    M = AlgebroidMorphism(E, small, lambda x: x, lambda x: np.eye(1))
    with pytest.raises(DomainError):
        admissibility_residual(M, [3.0])


def test_pushforward_is_body_angular_velocity(tso3_solution):
    LS, traj = tso3_solution
    image = pushforward_trajectory(systems.tso3_to_so3(), traj)
    for k in (0, 50, 199):
        # body velocity from R^T dR/dt with the rotation differentiated numerically
        h = 1e-6
        dR = (rotation(traj.x[k] + h * traj.y[k]) - rotation(traj.x[k] - h * traj.y[k])) / (2 * h)
        assert np.allclose(image.y[k], vee(rotation(traj.x[k]).T @ dR), atol=1e-8)


def test_projection_and_composition():
    E1, E2 = tangent_algebroid(1), so3_algebroid()
    prod = product_algebroid(E1, E2)
    P = projection_morphism(E1, E2, prod)
    assert check_morphism(P)["max_residual"] < 1e-12
    both = compose(identity_morphism(E1), P)
    x = np.array([0.4])
    assert np.allclose(both.fiber_matrix(x), P.fiber_matrix(x), atol=1e-12)
    assert check_morphism(both)["max_residual"] < 1e-12


def test_composition_is_functorial_for_fibre_maps():
    M = systems.tso3_to_so3()
    S = AlgebroidMorphism(M.target, M.target, lambda x: x, lambda x: rotation([0.3, 0.1, -0.2]),
                          lambda x: np.zeros((0, 0)), lambda x: np.zeros((3, 3, 0)))
    both = compose(S, M)
    x = np.array([0.2, 0.4, -0.1])
    assert np.allclose(both.fiber_matrix(x), rotation([0.3, 0.1, -0.2]) @ body_map(x), atol=1e-12)
    assert check_morphism(both, M.source.chart.sample(10))["max_residual"] < 1e-10


def test_fiberwise_rank():
    assert check_fiberwise(systems.tso3_to_so3())["bijective"]
    E = tangent_algebroid(2)
    flat = AlgebroidMorphism(E, E, lambda x: x, lambda x: np.array([[1.0, 0.0], [0.0, 0.0]]))
    report = check_fiberwise(flat)
    assert report["min_rank"] == 1 and not report["surjective"]


def test_contragredient_of_diagonal_scaling():
    M = AlgebroidMorphism(tangent_algebroid(2), tangent_algebroid(2), lambda x: x,
                          lambda x: np.diag([2.0, 3.0]))
    xp, mup, cond = contragredient(M, [0.0, 0.0], [2.0, 3.0])
    assert np.allclose(mup, [1.0, 1.0]) and cond == pytest.approx(1.5)


def test_contragredient_needs_invertible_fibre_map():
    E = tangent_algebroid(2)
    M = AlgebroidMorphism(E, E, lambda x: x, lambda x: np.zeros((2, 2)))
    with pytest.raises(BijectivityError):
        contragredient(M, [0.0, 0.0], [1.0, 1.0])
    wide = AlgebroidMorphism(E, tangent_algebroid(1), lambda x: x[:1], lambda x: np.array([[1.0, 0.0]]))
    with pytest.raises(BijectivityError):
        contragredient(wide, [0.0, 0.0], [1.0, 1.0])


def test_contragredient_preserves_pairing(rng):
    M = systems.tso3_to_so3()
    for _ in range(10):
        x = rng.normal(size=3)
        x *= 0.5 / np.linalg.norm(x)
        mu, b, mu_dot = rng.normal(size=(3, 3))
        _, mup, bp, _, mup_dot = prolonged_contragredient(M, x, mu, b, mu_dot)
        assert mup @ bp == pytest.approx(mu @ b, abs=1e-12)
        # the time derivative of the pairing along any curve is preserved too
        dPhi = np.tensordot(M.fiber_derivative(x), M.source.anchor(x) @ b, axes=([2], [0]))
        c = rng.normal(size=3)
        assert mup_dot @ (M.fiber_matrix(x) @ c) + mup @ (dPhi @ c) == pytest.approx(mu_dot @ c, abs=1e-10)


def test_reduction_of_tso3_solution(tso3_solution):
    LS, traj = tso3_solution
    report, image = verify_reduction(systems.tso3_to_so3(), LS, systems.rigid_body(), traj)
    assert report["pass"], report
    assert report["lagrangian_mismatch"] < 1e-12
    direct = dy.integrate_lagrangian(systems.rigid_body(), [], image.y[0], 0.0, 2.0, 1e-2)
    assert np.max(np.abs(direct.y - image.y)) < 1e-9


def test_identity_reduction_of_pendulum():
    LS = systems.pendulum()
    traj = dy.integrate_lagrangian(LS, [0.5], [0.0], 0.0, 1.0, 1e-2)
    report, image = verify_reduction(identity_morphism(LS.E), LS, LS, traj)
    assert report["pass"]
    assert np.array_equal(image.y, traj.y)
    assert report["target_defect"] == pytest.approx(report["source_defect"], rel=1e-12)


def test_atiyah_reduction_matches_decoupled_oracle():
    src, tgt = systems.atiyah_lagrangians()
    traj = dy.integrate_lagrangian(src, [0.8, 0.0], [0.0, 0.7], 0.0, 2.0, 1e-3)
    report, image = verify_reduction(systems.atiyah_morphism(), src, tgt, traj)
    assert report["pass"]
    oracle = pendulum_oracle(0.8, 0.0, 1e-3, 2000)
    assert np.max(np.abs(image.x[:, 0] - oracle[:, 0])) < 1e-10
    # the circle momentum is conserved
    assert np.allclose(image.y[:, 1], 0.7, atol=1e-12)


def test_mismatched_lagrangian_is_rejected(tso3_solution):
    LS, traj = tso3_solution
    with pytest.raises(LagrangianMismatchError):
        verify_reduction(systems.tso3_to_so3(), LS, systems.rigid_body((1.0, 1.0, 1.0)), traj)


def test_non_surjective_reduction_is_rejected():
    E = tangent_algebroid(2)
    LS = dy.LagrangianSystem(E, lambda x, y: 0.5 * y[0] ** 2 + 0.5 * y[1] ** 2)
    target = dy.LagrangianSystem(tangent_algebroid(2), lambda x, y: 0.5 * y[0] ** 2)
    M = AlgebroidMorphism(E, target.E, lambda x: np.array([x[0], 0.0]), lambda x: np.array([[1.0, 0.0], [0.0, 0.0]]))
    traj = dy.integrate_lagrangian(LS, [0.0, 0.0], [1.0, 0.0], 0.0, 0.5, 0.1)
    with pytest.raises(MorphismError):
        verify_reduction(M, dy.LagrangianSystem(E, lambda x, y: 0.5 * y[0] ** 2 + 1e-30), target, traj)


def test_euler_lagrange_defect_flags_wrong_curve():
    LS = systems.pendulum()
    t = np.linspace(0, 1, 101)
    traj = dy.lagrangian_trajectory(LS, t, t[:, None], np.ones((101, 1)))
    assert np.max(euler_lagrange_defect(LS, traj)) > 0.5


def test_lift_of_rigid_body_solution():
    M = systems.tso3_to_so3()
    LS, LT = systems.tso3_rigid_body(), systems.rigid_body()
    lifted, report = lift_solution(M, LS, LT, [0.0, 0.0, 0.0], [0.4, 0.3, -0.2], 0.0, 1.0, 1e-2)
    assert report["symplectic_residual"] < 1e-6 and report["source_defect"] < 50 * 1e-4
    image = pushforward_trajectory(M, lifted)
    direct = dy.integrate_lagrangian(LT, [], [0.4, 0.3, -0.2], 0.0, 1.0, 1e-2)
    assert np.max(np.abs(image.y - direct.y)) < 1e-10


def test_lift_requires_bijective_flag():
    E = tangent_algebroid(1)
    LS = systems.pendulum()
    M = AlgebroidMorphism(E, E, lambda x: x, lambda x: np.eye(1))
    with pytest.raises(BijectivityError):
        lift_solution(M, LS, LS, [0.0], [1.0], 0.0, 1.0, 0.1)


def test_reconstruction_oracle_for_translation():
    # phi(x) = x + 1 on the line: the lift is the target solution shifted back
    E = tangent_algebroid(1, domain=[(-5.0, 5.0)])
    Et = tangent_algebroid(1, domain=[(-5.0, 6.0)])
    LS = systems.pendulum(E)
    LT = dy.LagrangianSystem(Et, lambda x, y: 0.5 * y @ y + np.cos(x[0] - 1.0))
    M = AlgebroidMorphism(E, Et, lambda x: x + 1.0, lambda x: np.eye(1), fiberwise_bijective=True)
    lifted, _ = lift_solution(M, LS, LT, [0.3], [0.0], 0.0, 1.0, 1e-3)
    oracle = rk4_oracle(lambda z: np.array([z[1], -np.sin(z[0])]), [0.3, 0.0], 1e-3, 1000)
    assert np.max(np.abs(lifted.x[:, 0] - oracle[:, 0])) < 1e-7
