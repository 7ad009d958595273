"""Time-stamped state series and their CSV form."""

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GridError


def fmt(value):
    return format(float(value), ".17g")


def time_derivative(values, times):
    """Centered differences in the interior, second-order one-sided at the ends."""
    values = np.asarray(values, dtype=float)
    if len(times) < 3:
        if len(times) == 2:
            d = (values[1] - values[0]) / (times[1] - times[0])
            return np.stack([d, d])
        return np.zeros_like(values)
    return np.gradient(values, times, axis=0, edge_order=2)


def uniform_grid(t0, t1, dt):
    if not dt > 0:
        raise GridError("dt must be positive")
    if not t1 >= t0:
        raise GridError("t1 must not precede t0")
    steps = int(round((t1 - t0) / dt))
    if steps and abs(steps * dt - (t1 - t0)) > 1e-9 * max(1.0, abs(t1 - t0)):
        raise GridError(f"(t1 - t0) = {t1 - t0} is not a multiple of dt = {dt}")
    return t0 + dt * np.arange(steps + 1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States ``(x, y)`` (Lagrangian) or ``(x, mu)`` (Hamiltonian) on a uniform grid.

    ``energy`` holds E_L or H per sample; ``residual`` the pointwise
    admissibility residual ``|x' - rho(x) y|`` (Lagrangian) or
    ``|x' - rho(x) dH/dmu|`` (Hamiltonian).
    """

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    kind: str = "lagrangian"
    energy: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) > 1:
            dts = np.diff(t)
            if np.any(dts <= 0) or np.ptp(dts) > 1e-9 * max(1.0, abs(dts[0])):
                raise GridError("trajectory times must form a uniform increasing grid")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(len(t), -1))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(len(t), -1))

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def __len__(self):
        return len(self.times)

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def m(self):
        return self.y.shape[1]

    def with_meta(self, **kw):
        return Trajectory(self.times, self.x, self.y, self.kind, self.energy, self.residual,
                          {**self.meta, **kw})

    def header(self):
        fiber = "y" if self.kind == "lagrangian" else "mu"
        scalar = "E" if self.kind == "lagrangian" else "H"
        cols = (["t"] + [f"x{i + 1}" for i in range(self.n)]
                + [f"{fiber}{a + 1}" for a in range(self.m)] + [scalar, "adm_residual"])
        return ",".join(cols)

    def to_csv(self):
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        energy = self.energy if self.energy is not None else np.full(len(self), np.nan)
        resid = self.residual if self.residual is not None else np.full(len(self), np.nan)
        for k in range(len(self)):
            row = [self.times[k], *self.x[k], *self.y[k], energy[k], resid[k]]
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self):
        fiber = "y" if self.kind == "lagrangian" else "mu"
        return {
            "kind": self.kind,
            "t": self.times.tolist(),
            "x": self.x.tolist(),
            fiber: self.y.tolist(),
            "energy": None if self.energy is None else self.energy.tolist(),
            "adm_residual": None if self.residual is None else self.residual.tolist(),
        }


@dataclass(frozen=True, eq=False)
class CriticalTrajectory:
    """Critical trajectory of an optimal control problem: ``(x, mu, u)`` per sample."""

    times: np.ndarray
    x: np.ndarray
    mu: np.ndarray
    u: np.ndarray
    hamiltonian: Optional[np.ndarray] = None
    stationarity: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        for name in ("x", "mu", "u"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(len(t), -1))

    def __len__(self):
        return len(self.times)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def header(self):
        n, m, k = self.x.shape[1], self.mu.shape[1], self.u.shape[1]
        cols = (["t"] + [f"x{i + 1}" for i in range(n)] + [f"mu{a + 1}" for a in range(m)]
                + [f"u{j + 1}" for j in range(k)] + ["H", "stat_residual"])
        return ",".join(cols)

    def to_csv(self):
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        H = self.hamiltonian if self.hamiltonian is not None else np.full(len(self), np.nan)
        st = self.stationarity if self.stationarity is not None else np.full(len(self), np.nan)
        for k in range(len(self)):
            row = [self.times[k], *self.x[k], *self.mu[k], *self.u[k], H[k], st[k]]
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self):
        return {
            "t": self.times.tolist(),
            "x": self.x.tolist(),
            "mu": self.mu.tolist(),
            "u": self.u.tolist(),
            "H": None if self.hamiltonian is None else self.hamiltonian.tolist(),
            "stat_residual": None if self.stationarity is None else self.stationarity.tolist(),
        }
