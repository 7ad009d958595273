import numpy as np
import pytest

from algebroid.core import product_algebroid, so3_algebroid, tangent_algebroid
from algebroid.so3 import action_algebroid, exponential_chart_algebroid


def builtin_algebroids():
    return {
        "tangent1": tangent_algebroid(1),
        "tangent2": tangent_algebroid(2),
        "tangent3": tangent_algebroid(3),
        "so3": so3_algebroid(),
        "tangent1xso3": product_algebroid(tangent_algebroid(1), so3_algebroid()),
        "so3-action": action_algebroid(),
        "tso3-exp": exponential_chart_algebroid(),
    }


@pytest.fixture(params=sorted(builtin_algebroids()))
def builtin(request):
    return builtin_algebroids()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rk4_oracle(f, z0, dt, steps):
    """Plain fixed-step RK4, written independently of the package integrator."""
    z = np.asarray(z0, dtype=float)
    out = [z]
    for _ in range(steps):
        k1 = f(z)
        k2 = f(z + dt / 2 * k1)
        k3 = f(z + dt / 2 * k2)
        k4 = f(z + dt * k3)
        z = z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(z)
    return np.array(out)


def rigid_body_euler_oracle(inertia, omega0, dt, steps):
    """Euler's equations I w' = (I w) x w."""
    I = np.asarray(inertia, dtype=float)
    return rk4_oracle(lambda w: np.cross(I * w, w) / I, omega0, dt, steps)


def pendulum_oracle(theta0, omega0, dt, steps):
    """theta'' = -sin(theta) as a first-order system."""
    return rk4_oracle(lambda z: np.array([z[1], -np.sin(z[0])]), [theta0, omega0], dt, steps)


def momentum_euler_oracle(inertia, mu0, dt, steps):
    """Momentum form mu' = mu x I^{-1} mu."""
    I = np.asarray(inertia, dtype=float)
    return rk4_oracle(lambda m: np.cross(m, m / I), mu0, dt, steps)


ACCEPTANCE = {}


def record(number, title, passed):
    ACCEPTANCE[number] = (title, passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title}")
