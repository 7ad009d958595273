"""Lie algebroids in a single chart.

An algebroid of rank ``m`` over an ``n``-dimensional chart is described by
its anchor ``rho(x)`` (shape ``(n, m)``, entry ``[i, a]``) and its structure
functions ``C(x)`` (shape ``(m, m, m)``, entry ``[g, a, b]`` is the
coefficient of ``e_g`` in ``[e_a, e_b]``).  Everything else in the package
is built from these two fields and their first derivatives.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from . import numdiff
from .errors import DomainError, StructureError, UnsupportedDegreeError

ANALYTIC_TOL = 1e-10
FD_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Chart:
    """Axis-aligned coordinate box.  ``n == 0`` is a single point."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds differ in length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo >= hi):
            raise ValueError("chart bounds must satisfy lower < upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def box(cls, bounds):
        bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
        return cls(bounds[:, 0], bounds[:, 1])

    @classmethod
    def point(cls):
        return cls(np.zeros(0), np.zeros(0))

    @classmethod
    def cube(cls, n, half_width):
        return cls(-half_width * np.ones(n), half_width * np.ones(n))

    @property
    def n(self):
        return self.lower.size

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def check(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.n:
            raise DomainError(f"expected {self.n} coordinates, got {x.size}")
        if not self.contains(x):
            raise DomainError(f"point {x.tolist()} outside chart domain")
        return x

    def sample(self, count=100, seed=0):
        """Scrambled Halton points inside the box.

        Unbounded axes are sampled on [-1, 1].
        """
        if self.n == 0:
            return np.zeros((count, 0))
        lo = np.where(np.isfinite(self.lower), self.lower, -1.0)
        hi = np.where(np.isfinite(self.upper), self.upper, 1.0)
        unit = qmc.Halton(d=self.n, scramble=True, seed=seed).random(count)
        return qmc.scale(unit, lo, hi)

    def product(self, other):
        return Chart(np.concatenate([self.lower, other.lower]),
                     np.concatenate([self.upper, other.upper]))


@dataclass(frozen=True, eq=False)
class LieAlgebroid:
    """Anchor and structure functions of a Lie algebroid in one chart.

    ``drho(x)`` has shape ``(n, m, n)`` with the differentiated coordinate
    last; ``dc(x)`` has shape ``(m, m, m, n)``.  When either is omitted the
    corresponding derivative is taken by central differences.
    """

    chart: Chart
    m: int
    rho: Callable
    c: Callable
    drho: Optional[Callable] = None
    dc: Optional[Callable] = None
    name: str = ""

    @property
    def n(self):
        return self.chart.n

    @property
    def analytic(self):
        return self.n == 0 or (self.drho is not None and self.dc is not None)

    @property
    def tolerance(self):
        return ANALYTIC_TOL if self.analytic else FD_TOL

    def anchor(self, x):
        return np.asarray(self.rho(x), dtype=float).reshape(self.n, self.m)

    def structure(self, x):
        return np.asarray(self.c(x), dtype=float).reshape(self.m, self.m, self.m)

    def anchor_derivative(self, x):
        if self.n == 0:
            return np.zeros((0, self.m, 0))
        if self.drho is not None:
            return np.asarray(self.drho(x), dtype=float)
        return numdiff.derivative(self.anchor, x)

    def structure_derivative(self, x):
        if self.n == 0:
            return np.zeros((self.m,) * 3 + (0,))
        if self.dc is not None:
            return np.asarray(self.dc(x), dtype=float)
        return numdiff.derivative(self.structure, x)

    def check(self, x):
        return self.chart.check(x)


@dataclass(frozen=True, eq=False)
class SectionField:
    """Section ``x -> sigma(x)`` with optional analytic jacobian ``(m, n)``
    and hessian ``(m, n, n)``."""

    values: Callable
    jac: Optional[Callable] = None
    hess: Optional[Callable] = None
    fd_step: float = numdiff.GRAD_STEP

    def __call__(self, x):
        return np.asarray(self.values(x), dtype=float)

    def jacobian(self, x):
        if self.jac is not None:
            return np.asarray(self.jac(x), dtype=float)
        return numdiff.derivative(self, x, self.fd_step)

    def hessian(self, x):
        if self.hess is not None:
            return np.asarray(self.hess(x), dtype=float)
        return numdiff.derivative(self.jacobian, x, numdiff.NESTED_STEP)

    @classmethod
    def constant(cls, vector, n):
        vector = np.asarray(vector, dtype=float)
        m = vector.size
        return cls(lambda x: vector,
                   lambda x: np.zeros((m, n)),
                   lambda x: np.zeros((m, n, n)))


@dataclass(frozen=True, eq=False)
class AlgebroidForm:
    """A ``degree``-form: components ``x -> array of shape (m,)*degree``.

    ``derivative(x)`` returns the coordinate derivative of the components,
    shape ``(m,)*degree + (n,)``.
    """

    degree: int
    components: Callable
    derivative: Optional[Callable] = None
    fd_step: float = numdiff.GRAD_STEP

    def __post_init__(self):
        if not 0 <= self.degree <= 3:
            raise UnsupportedDegreeError(f"forms of degree {self.degree} are not supported")

    def __call__(self, x):
        return np.asarray(self.components(x), dtype=float)

    def coordinate_derivative(self, x):
        if self.derivative is not None:
            return np.asarray(self.derivative(x), dtype=float)
        return numdiff.derivative(self, x, self.fd_step)

    @property
    def exact_derivative(self):
        return self.derivative is not None

    @classmethod
    def function(cls, f, grad=None):
        return cls(0, lambda x: np.asarray(f(x), dtype=float).reshape(()), grad)


@dataclass
class ValidationReport:
    antisymmetry: float
    structure1: float
    structure2: float
    jacobi: float
    tolerance: float
    samples: int

    @property
    def passed(self):
        return max(self.antisymmetry, self.structure1, self.structure2, self.jacobi) < self.tolerance

    def to_dict(self):
        return {
            "antisymmetry": self.antisymmetry,
            "structure_eq1": self.structure1,
            "structure_eq2": self.structure2,
            "jacobi": self.jacobi,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "pass": self.passed,
        }


def anchor_apply(E, x, a):
    x = E.check(x)
    return E.anchor(x) @ np.asarray(a, dtype=float)


def _bracket(E, s, t, x):
    rho = E.anchor(x)
    sv, tv = s(x), t(x)
    return (t.jacobian(x) @ (rho @ sv) - s.jacobian(x) @ (rho @ tv)
            + np.einsum("gab,a,b->g", E.structure(x), sv, tv))


def bracket(E, s, t, x):
    """Components of ``[s, t]`` at ``x``."""
    return _bracket(E, s, t, E.check(x))


def bracket_field(E, s, t):
    """``[s, t]`` as a section field with a product-rule jacobian."""

    def jac(x):
        rho, drho = E.anchor(x), E.anchor_derivative(x)
        C, dC = E.structure(x), E.structure_derivative(x)
        sv, tv = s(x), t(x)
        sj, tj = s.jacobian(x), t.jacobian(x)
        sh, th = s.hessian(x), t.hessian(x)
        rs, rt = rho @ sv, rho @ tv
        drs = np.einsum("iak,a->ik", drho, sv) + rho @ sj
        drt = np.einsum("iak,a->ik", drho, tv) + rho @ tj
        return (np.einsum("gik,i->gk", th, rs) + tj @ drs
                - np.einsum("gik,i->gk", sh, rt) - sj @ drt
                + np.einsum("gabk,a,b->gk", dC, sv, tv)
                + np.einsum("gab,ak,b->gk", C, sj, tv)
                + np.einsum("gab,a,bk->gk", C, sv, tj))

    return SectionField(lambda x: _bracket(E, s, t, x), jac)


def _exterior_d(E, value, deriv, x):
    p = value.ndim
    out = np.zeros((E.m,) * (p + 1))
    anchored = np.tensordot(E.anchor(x), deriv, axes=([0], [p]))
    for i in range(p + 1):
        out += (-1) ** i * np.moveaxis(anchored, 0, i)
    if p >= 1:
        contracted = np.tensordot(E.structure(x), value, axes=([0], [0]))
        for i in range(p + 1):
            for j in range(i + 1, p + 1):
                out += (-1) ** (i + j) * np.moveaxis(contracted, [0, 1], [i, j])
    return out


def exterior_d(E, w, x):
    """Components of ``dw`` at ``x`` by the alternating formula."""
    if w.degree > 2:
        raise UnsupportedDegreeError("exterior_d is defined for degree <= 2")
    x = E.check(x)
    return _exterior_d(E, w(x), w.coordinate_derivative(x), x)


def exterior_d_field(E, w):
    """``dw`` as a form field; its own derivative is taken numerically."""
    if w.degree > 2:
        raise UnsupportedDegreeError("exterior_d is defined for degree <= 2")
    step = numdiff.GRAD_STEP if w.exact_derivative else numdiff.NESTED_STEP
    return AlgebroidForm(w.degree + 1,
                         lambda x: _exterior_d(E, w(x), w.coordinate_derivative(x), x),
                         fd_step=step)


def interior(s, w, x):
    """``i_s w`` at ``x`` (contraction in the first slot)."""
    return np.tensordot(s(x), w(x), axes=([0], [0]))


def interior_field(s, w):
    if w.degree == 0:
        raise UnsupportedDegreeError("cannot contract a 0-form")

    def deriv(x):
        return (np.tensordot(s(x), w.coordinate_derivative(x), axes=([0], [0]))
                + np.moveaxis(np.tensordot(s.jacobian(x), w(x), axes=([0], [0])), 0, -1))

    return AlgebroidForm(w.degree - 1, lambda x: interior(s, w, x), deriv)


def lie_derivative(E, s, w, x):
    """Cartan formula ``d_s = i_s d + d i_s``."""
    if w.degree > 2:
        raise UnsupportedDegreeError("lie_derivative is defined for degree <= 2")
    x = E.check(x)
    dw = _exterior_d(E, w(x), w.coordinate_derivative(x), x)
    result = np.tensordot(s(x), dw, axes=([0], [0]))
    if w.degree > 0:
        contracted = interior_field(s, w)
        result = result + _exterior_d(E, contracted(x), contracted.coordinate_derivative(x), x)
    return result


def polynomial_section(rng, n, m, center=None, width=None):
    """Random quadratic section with analytic jacobian and hessian.

    Coordinates are shifted by ``center`` and divided by ``width`` so the
    section stays O(1) over the sampled region.
    """
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    width = np.ones(n) if width is None else np.asarray(width, dtype=float)
    a = rng.normal(size=m)
    B = rng.normal(size=(m, n)) / width
    Q = rng.normal(size=(m, n, n)) / np.outer(width, width)
    Q = 0.5 * (Q + Q.transpose(0, 2, 1))

    def values(x):
        d = np.asarray(x, dtype=float) - center
        return a + B @ d + 0.5 * np.einsum("gij,i,j->g", Q, d, d)

    def jac(x):
        d = np.asarray(x, dtype=float) - center
        return B + np.einsum("gij,j->gi", Q, d)

    return SectionField(values, jac, lambda x: Q)


def validate(E, samples=None, tolerance=None, seed=0):
    """Residuals of the algebroid axioms at sample points.

    Checks antisymmetry of C, both structure equations and the Jacobi
    identity on three random quadratic sections.
    """
    if samples is None:
        samples = E.chart.sample(100, seed=seed)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        samples = samples.reshape(-1, E.n) if E.n else samples.reshape(1, 0)
    if len(samples) == 0:
        raise ValueError("validate needs at least one sample point")
    tol = E.tolerance if tolerance is None else tolerance
    rng = np.random.default_rng(seed)
    center = samples.mean(axis=0)
    width = np.ptp(samples, axis=0) / 2 if len(samples) > 1 else np.ones(E.n)
    width = np.where(width > 0, width, 1.0)
    sections = [polynomial_section(rng, E.n, E.m, center, width) for _ in range(3)]
    s, t, u = sections
    st, tu, us = bracket_field(E, s, t), bracket_field(E, t, u), bracket_field(E, u, s)

    anti = eq1 = eq2 = jac = 0.0
    for x in samples:
        x = E.check(x)
        rho, drho = E.anchor(x), E.anchor_derivative(x)
        C, dC = E.structure(x), E.structure_derivative(x)
        anti = max(anti, np.max(np.abs(C + C.transpose(0, 2, 1)), initial=0.0))
        lhs = np.einsum("ja,ibj->iab", rho, drho) - np.einsum("jb,iaj->iab", rho, drho)
        rhs = np.einsum("ig,gab->iab", rho, C)
        eq1 = max(eq1, np.max(np.abs(lhs - rhs), initial=0.0))
        T = np.einsum("ia,vbgi->abgv", rho, dC) + np.einsum("ubg,vau->abgv", C, C)
        cyc = T + np.einsum("bgav->abgv", T) + np.einsum("gabv->abgv", T)
        eq2 = max(eq2, np.max(np.abs(cyc), initial=0.0))
        total = _bracket(E, st, u, x) + _bracket(E, tu, s, x) + _bracket(E, us, t, x)
        jac = max(jac, np.max(np.abs(total), initial=0.0))
    return ValidationReport(float(anti), float(eq1), float(eq2), float(jac), tol, len(samples))


# builders


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for (a, b, c), sign in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                            (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[a, b, c] = sign
    return eps


def tangent_algebroid(n, domain=None):
    chart = Chart.cube(n, 100.0) if domain is None else Chart.box(domain)
    I = np.eye(n)
    return LieAlgebroid(chart, n,
                        rho=lambda x: I,
                        c=lambda x: np.zeros((n, n, n)),
                        drho=lambda x: np.zeros((n, n, n)),
                        dc=lambda x: np.zeros((n, n, n, n)),
                        name=f"T R^{n}")


def lie_algebra_algebroid(C, base=None, name="lie algebra"):
    """Constant structure constants ``C[g, a, b]``; zero anchor.

    With ``base=None`` the base is a point.  Passing a chart gives the trivial
    bundle of Lie algebras over that chart.
    """
    C = np.array(C, dtype=float)
    m = C.shape[0]
    if C.shape != (m, m, m):
        raise StructureError("structure constants must have shape (m, m, m)")
    if np.max(np.abs(C + C.transpose(0, 2, 1)), initial=0.0) > 0:
        raise StructureError("structure constants are not antisymmetric in the lower indices")
    chart = Chart.point() if base is None else base
    n = chart.n
    return LieAlgebroid(chart, m,
                        rho=lambda x: np.zeros((n, m)),
                        c=lambda x: C,
                        drho=lambda x: np.zeros((n, m, n)),
                        dc=lambda x: np.zeros((m, m, m, n)),
                        name=name)


def so3_algebroid():
    return lie_algebra_algebroid(levi_civita(), name="so(3)")


def product_algebroid(E1, E2):
    """Block product ``E1 x E2`` over the product chart."""
    n1, n2, m1, m2 = E1.n, E2.n, E1.m, E2.m
    n, m = n1 + n2, m1 + m2

    def split(x):
        x = np.asarray(x, dtype=float)
        return x[:n1], x[n1:]

    def rho(x):
        x1, x2 = split(x)
        out = np.zeros((n, m))
        out[:n1, :m1] = E1.anchor(x1)
        out[n1:, m1:] = E2.anchor(x2)
        return out

    def c(x):
        x1, x2 = split(x)
        out = np.zeros((m, m, m))
        out[:m1, :m1, :m1] = E1.structure(x1)
        out[m1:, m1:, m1:] = E2.structure(x2)
        return out

    def drho(x):
        x1, x2 = split(x)
        out = np.zeros((n, m, n))
        out[:n1, :m1, :n1] = E1.anchor_derivative(x1)
        out[n1:, m1:, n1:] = E2.anchor_derivative(x2)
        return out

    def dc(x):
        x1, x2 = split(x)
        out = np.zeros((m, m, m, n))
        out[:m1, :m1, :m1, :n1] = E1.structure_derivative(x1)
        out[m1:, m1:, m1:, n1:] = E2.structure_derivative(x2)
        return out

    return LieAlgebroid(E1.chart.product(E2.chart), m, rho, c,
                        drho if E1.analytic and E2.analytic else None,
                        dc if E1.analytic and E2.analytic else None,
                        name=f"{E1.name} x {E2.name}")
