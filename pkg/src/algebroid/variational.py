"""Action functional on admissible curves and its derivative along
complete-lift variations.

The derivative is evaluated in lifted form,

    dS(sigma) = int L_x . rho sigma + L_y . (sigma' + C(a, sigma)) dt,

without integrating by parts, so boundary terms never appear and the same
quadrature is used for the action and its derivative.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson, trapezoid

from .dynamics import lagrangian_trajectory
from .errors import AdmissibilityError, GridError, VariationError
from .prolongation import xi_variation

FAMILY_VERSION = "sin-poly-v1"
FAMILY_SEED = 20070320
FAMILY_SIZE = 20
CERTIFICATE_THRESHOLD = 1e-4
ENDPOINT_TOL = 1e-14


def quadrature(values, times):
    """Composite Simpson for an odd number of samples, trapezoid otherwise."""
    values = np.asarray(values, dtype=float)
    if len(times) < 2:
        return 0.0
    if len(times) % 2 == 1:
        return float(simpson(values, x=times))
    return float(trapezoid(values, x=times))


def admissibility_threshold(traj):
    return max(10.0 * traj.dt ** 2, 1e-12)


def _require_admissible(traj):
    if traj.residual is not None and len(traj) > 2:
        worst = float(np.max(traj.residual))
        if worst > admissibility_threshold(traj):
            raise AdmissibilityError(f"curve is not admissible: residual {worst:.3e}")


@dataclass(frozen=True, eq=False)
class VariationField:
    """Fibre curve ``sigma(t)`` on a trajectory grid, optional exact derivative."""

    sigma: np.ndarray
    sigma_dot: Optional[np.ndarray] = None
    label: str = ""

    def scaled(self, c):
        dot = None if self.sigma_dot is None else c * self.sigma_dot
        return VariationField(c * self.sigma, dot, self.label)

    def __add__(self, other):
        dot = None
        if self.sigma_dot is not None and other.sigma_dot is not None:
            dot = self.sigma_dot + other.sigma_dot
        return VariationField(self.sigma + other.sigma, dot)


def action(LS, traj):
    _require_admissible(traj)
    values = [LS.value(traj.x[k], traj.y[k]) for k in range(len(traj))]
    return quadrature(values, traj.times)


def action_derivative(LS, traj, variation):
    sigma = np.asarray(variation.sigma, dtype=float)
    if sigma.shape != traj.y.shape:
        raise GridError(f"variation shape {sigma.shape} does not match trajectory {traj.y.shape}")
    if len(sigma) and (np.max(np.abs(sigma[0])) >= ENDPOINT_TOL
                       or np.max(np.abs(sigma[-1])) >= ENDPOINT_TOL):
        raise VariationError("variation must vanish at both endpoints")
    _require_admissible(traj)
    dx, dy = xi_variation(LS.E, traj, sigma, variation.sigma_dot)
    integrand = np.empty(len(traj))
    for k in range(len(traj)):
        Lx, Ly = LS.gradients(traj.x[k], traj.y[k])
        integrand[k] = Lx @ dx[k] + Ly @ dy[k]
    return quadrature(integrand, traj.times)


def variation_norm(variation, times):
    return float(np.sqrt(quadrature(np.sum(variation.sigma ** 2, axis=1), times)))


def variation_family(times, m):
    """The fixed family of test variations: ten sinusoids and ten polynomial
    bumps, each along a fixed unit direction, all vanishing at both ends."""
    times = np.asarray(times, dtype=float)
    T = times[-1] - times[0]
    s = (times - times[0]) / T
    dirs = np.random.default_rng(FAMILY_SEED).normal(size=(FAMILY_SIZE, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    q = 2 * s - 1
    family = []
    for k in range(1, 11):
        shape = np.sin(k * np.pi * s)
        dshape = k * np.pi * np.cos(k * np.pi * s) / T
        family.append((f"sin{k}", shape, dshape))
    for k in range(1, 11):
        shape = s * (1 - s) * q ** (k - 1)
        dshape = -q ** k
        if k >= 2:
            dshape = dshape + 2 * (k - 1) * s * (1 - s) * q ** (k - 2)
        family.append((f"poly{k}", shape, dshape / T))
    out = []
    for d, (label, shape, dshape) in zip(dirs, family):
        shape = shape.copy()
        shape[0] = shape[-1] = 0.0
        out.append(VariationField(np.outer(shape, d), np.outer(dshape, d), label))
    return out


def criticality_certificate(LS, traj, threshold=CERTIFICATE_THRESHOLD):
    """Max normalized |dS| over the fixed variation family."""
    _require_admissible(traj)
    per = []
    if len(traj) >= 3:
        for var in variation_family(traj.times, LS.E.m):
            dS = action_derivative(LS, traj, var)
            norm = variation_norm(var, traj.times)
            per.append({"label": var.label, "dS": dS, "normalized": abs(dS) / norm})
    worst = max((p["normalized"] for p in per), default=0.0)
    return {
        "family": FAMILY_VERSION,
        "max_normalized_dS": worst,
        "threshold": threshold,
        "pass": bool(worst < threshold),
        "per_variation": per,
    }


def perturbed_curve(LS, traj, peak_rate=0.1, width=0.5):
    """Admissible non-solution on a tangent algebroid: ``x + b``, ``y + b'``
    with a Gaussian bump ``b`` centred mid-interval, scaled so ``max |b'|``
    equals ``peak_rate``."""
    E = LS.E
    if E.n != E.m or np.max(np.abs(E.anchor(traj.x[0]) - np.eye(E.n))) > 0:
        raise VariationError("perturbed curve is defined for tangent algebroids only")
    t = traj.times
    tc = 0.5 * (t[0] + t[-1])
    g = np.exp(-((t - tc) / width) ** 2)
    amplitude = peak_rate * width / np.sqrt(2.0) * np.exp(0.5)
    b = amplitude * g
    bdot = -2.0 * amplitude * (t - tc) / width ** 2 * g
    direction = np.ones(E.n) / np.sqrt(E.n)
    return lagrangian_trajectory(LS, t, traj.x + np.outer(b, direction), traj.y + np.outer(bdot, direction))
