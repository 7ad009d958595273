import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebroid import dynamics as dy
from algebroid import systems
from algebroid.core import so3_algebroid, tangent_algebroid
from algebroid.errors import ChartExitError, DomainError, GridError, RegularityError
from algebroid.prolongation import canonical_symplectic
from algebroid.scenarios import quartic_lagrangian, rigid_body_hamiltonian
from algebroid.so3 import action_algebroid
from algebroid.trajectory import Trajectory, uniform_grid

from conftest import pendulum_oracle, rigid_body_euler_oracle

I = np.array([1.0, 2.0, 3.0])


def action_lagrangian():
    E = action_algebroid()
    return dy.LagrangianSystem(E, lambda x, y: 0.5 * y @ y + 0.5 * (x @ y) ** 2 - x @ x, name="action")


def test_energy_of_pendulum():
    LS = systems.pendulum()
    assert dy.energy(LS, [0.3], [2.0]) == pytest.approx(2.0 - np.cos(0.3))


def test_euler_lagrange_for_pendulum():
    xd, yd = dy.euler_lagrange_rhs(systems.pendulum(), [0.4], [1.5])
    assert np.allclose(xd, [1.5]) and np.allclose(yd, [-np.sin(0.4)])


def test_euler_lagrange_for_rigid_body_is_euler_equation():
    LS = systems.rigid_body()
    y = np.array([0.3, -1.0, 2.0])
    _, yd = dy.euler_lagrange_rhs(LS, [], y)
    assert np.allclose(yd, np.cross(I * y, y) / I)


def test_singular_lagrangian_raises_with_condition():
    LS = dy.LagrangianSystem(tangent_algebroid(1), lambda x, y: x[0] * y[0])
    with pytest.raises(RegularityError) as info:
        dy.euler_lagrange_rhs(LS, [0.1], [0.2])
    assert info.value.condition > 1e6
    assert not dy.is_regular(LS, [0.1], [0.2])[0]


def test_cartan_two_form_of_rigid_body():
    LS = systems.rigid_body()
    y = np.array([1.0, 2.0, 3.0])
    om = dy.cartan_two_form(LS, [], y)
    assert np.allclose(om[:3, :3], np.einsum("g,gab->ab", I * y, so3_algebroid().structure([])))
    assert np.allclose(om[:3, 3:], np.diag(I))
    assert np.allclose(om, -om.T)


@pytest.mark.parametrize("make", [systems.pendulum, systems.rigid_body, systems.tso3_rigid_body,
                                  action_lagrangian])
def test_symplectic_residual_small_at_random_points(make, rng):
    LS = make()
    for x in LS.E.chart.sample(15, seed=3) * 0.5:
        y = rng.uniform(-1, 1, LS.E.m)
        assert dy.symplectic_residual(LS, x, y) < 1e-6


def test_finite_difference_lagrangian_matches_analytic():
    analytic = systems.tso3_rigid_body()
    fd = dy.LagrangianSystem(analytic.E, analytic.L)
    x, y = np.array([0.2, -0.4, 0.1]), np.array([0.5, 0.3, -0.8])
    a = dy.euler_lagrange_rhs(analytic, x, y)[1]
    b = dy.euler_lagrange_rhs(fd, x, y)[1]
    assert np.allclose(a, b, atol=1e-5)


def test_rigid_body_matches_euler_oracle():
    LS = systems.rigid_body()
    traj = dy.integrate_lagrangian(LS, [], [1.0, 0.1, 0.1], 0.0, 2.0, 1e-3)
    oracle = rigid_body_euler_oracle(I, [1.0, 0.1, 0.1], 1e-3, 2000)
    assert np.max(np.abs(traj.y - oracle)) < 1e-10


def test_pendulum_matches_classical_oracle():
    traj = dy.integrate_lagrangian(systems.pendulum(), [1.0], [0.0], 0.0, 2.0, 1e-3)
    oracle = pendulum_oracle(1.0, 0.0, 1e-3, 2000)
    assert np.max(np.abs(traj.x[:, 0] - oracle[:, 0])) < 1e-10
    assert np.max(np.abs(traj.y[:, 0] - oracle[:, 1])) < 1e-10


def test_chart_exit_reports_time():
    LS = systems.pendulum(tangent_algebroid(1, domain=[(-1.0, 1.0)]))
    with pytest.raises(ChartExitError) as info:
        dy.integrate_lagrangian(LS, [0.0], [2.0], 0.0, 5.0, 1e-2)
    assert 0.4 < info.value.time < 0.6


def test_initial_point_outside_chart():
    LS = systems.pendulum(tangent_algebroid(1, domain=[(-1.0, 1.0)]))
    with pytest.raises(DomainError):
        dy.integrate_lagrangian(LS, [3.0], [0.0], 0.0, 1.0, 0.1)


def test_legendre_inverse_round_trip():
    LS = quartic_lagrangian()
    for y in (-2.0, 0.0, 0.7, 3.0):
        mu = LS.gradients([0.1], [y])[1]
        assert dy.legendre_inverse(LS, [0.1], mu)[0] == pytest.approx(y, abs=1e-12)


def test_legendre_hamiltonian_gradients_match_finite_differences():
    HS = dy.hamiltonian_from_lagrangian(quartic_lagrangian())
    x, mu = np.array([0.3]), np.array([1.2])
    fd = dy.PhaseFunction(HS.H).gradients(x, mu)
    exact = HS.gradients(x, mu)
    assert np.allclose(np.concatenate(fd), np.concatenate(exact), atol=1e-7)


def test_poisson_bracket_of_so3_momenta():
    E = so3_algebroid()
    mu = np.array([0.4, -1.1, 2.5])
    m1, m2 = dy.momentum_function(E, 0), dy.momentum_function(E, 1)
    assert dy.poisson_bracket(E, m1, m2, [], mu) == pytest.approx(-mu[2])


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_poisson_brackets_reproduce_hamilton_equations(seed):
    rng = np.random.default_rng(seed)
    E = action_algebroid()
    HS = dy.HamiltonianSystem(E, lambda x, mu: 0.5 * mu @ mu + np.sin(x[0]) * mu[1] + x @ x)
    x, mu = rng.uniform(-1, 1, 3), rng.normal(size=3)
    xd, md = dy.hamilton_rhs(HS, x, mu)
    for i in range(3):
        assert dy.poisson_bracket(E, dy.coordinate_function(E, i), HS.function, x, mu) == pytest.approx(xd[i], abs=1e-6)
        assert dy.poisson_bracket(E, dy.momentum_function(E, i), HS.function, x, mu) == pytest.approx(md[i], abs=1e-6)


def test_hamiltonian_section_solves_defining_equation():
    E = so3_algebroid()
    HS = rigid_body_hamiltonian(I)
    mu = np.array([1.0, 0.5, -0.2])
    s = dy.hamiltonian_section(E, HS.function, [], mu)
    assert np.allclose(canonical_symplectic(E, [], mu).T @ s, dy.differential(E, HS.function, [], mu))
    assert np.allclose(s[3:], dy.hamilton_rhs(HS, [], mu)[1])


def test_lie_poisson_flow_conserves_casimir_and_energy():
    HS = rigid_body_hamiltonian(I)
    traj = dy.integrate_hamiltonian(HS, [], [1.0, 0.2, 0.3], 0.0, 5.0, 1e-2)
    c = np.sum(traj.y ** 2, axis=1)
    assert np.max(np.abs(c - c[0])) < 1e-8
    assert np.max(np.abs(traj.energy - traj.energy[0])) < 1e-8


def test_hamilton_rhs_checks_domain():
    HS = dy.HamiltonianSystem(tangent_algebroid(1, domain=[(-1.0, 1.0)]), lambda x, mu: 0.5 * mu @ mu)
    with pytest.raises(DomainError):
        dy.hamilton_rhs(HS, [2.0], [0.0])


# trajectories


def test_uniform_grid_rejects_bad_steps():
    with pytest.raises(GridError):
        uniform_grid(0.0, 1.0, -0.1)
    with pytest.raises(GridError):
        uniform_grid(0.0, 1.0, 0.3)
    assert len(uniform_grid(0.0, 1.0, 0.25)) == 5


def test_trajectory_csv_layout():
    traj = dy.integrate_lagrangian(systems.pendulum(), [0.1], [0.0], 0.0, 0.2, 0.1)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,x1,y1,E,adm_residual"
    assert len(lines) == 4
    assert float(lines[1].split(",")[3]) == pytest.approx(-np.cos(0.1))


def test_trajectory_rejects_non_uniform_times():
    with pytest.raises(GridError):
        Trajectory([0.0, 0.1, 0.3], np.zeros((3, 1)), np.zeros((3, 1)))


def test_hamiltonian_trajectory_header():
    HS = rigid_body_hamiltonian(I)
    traj = dy.integrate_hamiltonian(HS, [], [1.0, 0.0, 0.0], 0.0, 0.1, 0.1)
    assert traj.header() == "t,mu1,mu2,mu3,H,adm_residual"
    assert set(traj.to_json()) == {"kind", "t", "x", "mu", "energy", "adm_residual"}
