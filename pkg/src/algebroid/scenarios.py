"""Scenario library and the batch runner behind the command line.

Every random draw goes through ``numpy.random.default_rng(seed)`` (PCG64),
so a configuration and its seed determine the written files byte for byte.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np
from referencing import Registry, Resource

from . import control as oc
from . import dynamics as dy
from . import morphism as mo
from . import systems
from .core import (AlgebroidForm, Chart, exterior_d, exterior_d_field, polynomial_section, so3_algebroid,
                   tangent_algebroid, validate)
from .errors import AlgebroidError, ConfigError
from .expressions import (load_algebroid, load_control_map, load_hamiltonian, load_lagrangian,
                          load_morphism, load_problem)
from .prolongation import prolong, symplectic_form
from .so3 import action_algebroid, body_map, exponential_chart_algebroid
from .variational import criticality_certificate, perturbed_curve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
SCHEMAS = ("algebroid", "morphism", "problem", "scenario")


@dataclass
class ScenarioResult:
    name: str
    passed: bool
    report: dict
    trajectories: dict = field(default_factory=dict)


# schema handling


def load_schema(name):
    return json.loads(resources.files("algebroid").joinpath("schemas").joinpath(f"{name}.json").read_text())


def _registry():
    registry = Registry()
    for name in SCHEMAS:
        registry = registry.with_resource(f"{name}.json", Resource.from_contents(load_schema(name)))
    return registry


def check_document(doc, schema="scenario"):
    """Raise ConfigError with a readable message if ``doc`` violates the schema."""
    validator = jsonschema.Draft202012Validator(load_schema(schema), registry=_registry())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {err.message}")


# helpers


def _arr(v):
    return np.asarray(v, dtype=float)


def _relative_drift(values):
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values - values[0])) / max(abs(values[0]), 1e-300))


def _random_points(E, rng, count, velocity=1.0):
    xs = E.chart.sample(count, seed=int(rng.integers(2 ** 31)))
    ys = velocity * rng.uniform(-1.0, 1.0, size=(count, E.m))
    return xs, ys


def _symplectic_check(LS, rng, count, velocity=1.0):
    xs, ys = _random_points(LS.E, rng, count, velocity)
    return max(dy.symplectic_residual(LS, x, y) for x, y in zip(xs, ys))


def _ball(rng, count, radius):
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(0, 1, size=(count, 1)) ** (1 / 3)


def _gate(checks):
    """``checks`` maps a label to ``(value, bound)``; pass iff every value < bound."""
    table = {k: {"value": float(v), "bound": float(b), "pass": bool(v < b)} for k, (v, b) in checks.items()}
    return table, all(entry["pass"] for entry in table.values())


def d_squared_residual(E, rng, count=100):
    """``max |d d f|`` and ``max |d d theta|`` for a random polynomial function and 1-form."""
    n, m = E.n, E.m
    xs = E.chart.sample(count, seed=int(rng.integers(2 ** 31)))
    sec = polynomial_section(rng, n, m + 1, *_centre_width(xs))

    f = AlgebroidForm.function(lambda x: sec(x)[m], lambda x: sec.jacobian(x)[m])
    theta = AlgebroidForm(1, lambda x: sec(x)[:m], lambda x: sec.jacobian(x)[:m])
    worst = 0.0
    for form in (f, theta):
        dd = exterior_d_field(E, exterior_d_field(E, form))
        worst = max(worst, max(float(np.max(np.abs(dd(x)), initial=0.0)) for x in xs))
    return worst


def _centre_width(xs):
    if xs.shape[1] == 0:
        return None, None
    lo, hi = xs.min(axis=0), xs.max(axis=0)
    return 0.5 * (lo + hi), np.maximum(0.5 * (hi - lo), 1e-12)


# builtin scenarios


def _pendulum(cfg, rng):
    LS = systems.pendulum()
    traj = dy.integrate_lagrangian(LS, cfg["x0"], cfg["y0"], cfg["t0"], cfg["t1"], cfg["dt"])
    checks, ok = _gate({
        "relative_energy_drift": (_relative_drift(traj.energy), 1e-9),
        "symplectic_residual": (_symplectic_check(LS, rng, cfg["samples"], 2.0), 1e-8),
    })
    return ScenarioResult(cfg["name"], ok, {"checks": checks}, {"trajectory": traj})


def _rigid_body(cfg, rng):
    LS = systems.rigid_body(cfg["inertia"])
    traj = dy.integrate_lagrangian(LS, [], cfg["y0"], cfg["t0"], cfg["t1"], cfg["dt"])
    I = _arr(cfg["inertia"])
    casimir = np.sum((traj.y * I) ** 2, axis=1)
    checks, ok = _gate({
        "relative_energy_drift": (_relative_drift(traj.energy), 1e-9),
        "casimir_drift": (float(np.max(np.abs(casimir - casimir[0]))), 1e-8),
        "symplectic_residual": (_symplectic_check(LS, rng, cfg["samples"], 2.0), 1e-8),
    })
    return ScenarioResult(cfg["name"], ok, {"checks": checks}, {"trajectory": traj})


def rigid_body_hamiltonian(inertia):
    E = so3_algebroid()
    inv = 1.0 / _arr(inertia)
    return dy.HamiltonianSystem(E, lambda x, mu: 0.5 * mu @ (inv * mu),
                                lambda x, mu: (np.zeros(0), inv * mu), name="Lie-Poisson rigid body")


def _lie_poisson(cfg, rng):
    HS = rigid_body_hamiltonian(cfg["inertia"])
    E = HS.E
    traj = dy.integrate_hamiltonian(HS, [], cfg["mu0"], cfg["t0"], cfg["t1"], cfg["dt"])
    casimir = np.sum(traj.y ** 2, axis=1)
    bracket_err = 0.0
    for mu in rng.normal(size=(cfg["samples"], 3)):
        _, mudot = dy.hamilton_rhs(HS, [], mu)
        pb = [dy.poisson_bracket(E, dy.momentum_function(E, a), HS.function, [], mu) for a in range(3)]
        bracket_err = max(bracket_err, float(np.max(np.abs(np.array(pb) - mudot))))
    checks, ok = _gate({
        "relative_energy_drift": (_relative_drift(traj.energy), 1e-9),
        "casimir_drift": (float(np.max(np.abs(casimir - casimir[0]))), 1e-8),
        "poisson_consistency": (bracket_err, 1e-8),
    })
    return ScenarioResult(cfg["name"], ok, {"checks": checks}, {"trajectory": traj})


def _validate_report(E, rng, samples):
    rep = validate(E, seed=int(rng.integers(2 ** 31)))
    dd = d_squared_residual(E, rng, samples)
    return {"validation": rep.to_dict(), "dd": dd}, rep.passed and dd < 1e-6


def _action_validate(cfg, rng):
    report, ok = {}, True
    for label, E in (("so3-action", action_algebroid()), ("tso3-exp", exponential_chart_algebroid()),
                     ("so3", so3_algebroid())):
        entry, passed = _validate_report(E, rng, cfg["samples"])
        P = prolong(E, E.m).realized
        prep = validate(P, seed=int(rng.integers(2 ** 31)))
        omega = symplectic_form(E)
        pts = P.chart.sample(cfg["samples"], seed=int(rng.integers(2 ** 31)))
        d_omega = max(float(np.max(np.abs(exterior_d(P, omega, p)))) for p in pts)
        entry.update({"prolongation": prep.to_dict(), "d_Omega": d_omega})
        ok = ok and passed and prep.passed and d_omega < 1e-6
        report[label] = entry
    return ScenarioResult(cfg["name"], bool(ok), report)


def _pendulum_variational(cfg, rng):
    LS = systems.pendulum()
    traj = dy.integrate_lagrangian(LS, cfg["x0"], cfg["y0"], cfg["t0"], cfg["t1"], cfg["dt"])
    solution = criticality_certificate(LS, traj)
    bent = criticality_certificate(LS, perturbed_curve(LS, traj))
    ok = solution["pass"] and bent["max_normalized_dS"] > 1e-3
    return ScenarioResult(cfg["name"], bool(ok),
                          {"solution": solution, "perturbed": bent,
                           "perturbed_bound": 1e-3}, {"trajectory": traj})


def _tso3_reduction(cfg, rng):
    M = systems.tso3_to_so3()
    LS, LT = systems.tso3_rigid_body(cfg["inertia"]), systems.rigid_body(cfg["inertia"])
    morph = mo.check_morphism(M)
    fiber = mo.check_fiberwise(M)
    runs, ok, first = [], morph["max_residual"] < 1e-6 and fiber["bijective"], {}
    for k, (x0, v0) in enumerate(zip(_ball(rng, cfg["count"], 0.5), rng.uniform(-0.5, 0.5, (cfg["count"], 3)))):
        traj = dy.integrate_lagrangian(LS, x0, v0, cfg["t0"], cfg["t1"], cfg["dt"])
        rep, image = mo.verify_reduction(M, LS, LT, traj)
        direct = dy.integrate_lagrangian(LT, [], image.y[0], cfg["t0"], cfg["t1"], cfg["dt"])
        rep["direct_distance"] = float(np.max(np.abs(direct.y - image.y)))
        rep["pass"] = bool(rep["pass"] and rep["direct_distance"] < 1e-5)
        ok = ok and rep["pass"]
        runs.append(rep)
        if k == 0:
            first = {"source": traj, "reduced": image}
    return ScenarioResult(cfg["name"], bool(ok), {"morphism": morph, "fiberwise": fiber, "runs": runs}, first)


def _atiyah(cfg, rng):
    M = systems.atiyah_morphism()
    LS, LT = systems.atiyah_lagrangians(M.source, M.target)
    morph = mo.check_morphism(M)
    traj = dy.integrate_lagrangian(LS, cfg["x0"], cfg["y0"], cfg["t0"], cfg["t1"], cfg["dt"])
    rep, image = mo.verify_reduction(M, LS, LT, traj)
    direct = dy.integrate_lagrangian(LT, image.x[0], image.y[0], cfg["t0"], cfg["t1"], cfg["dt"])
    rep["direct_distance"] = float(max(np.max(np.abs(direct.y - image.y)), np.max(np.abs(direct.x - image.x))))
    ok = rep["pass"] and rep["direct_distance"] < 1e-6 and morph["max_residual"] < 1e-10
    return ScenarioResult(cfg["name"], bool(ok), {"morphism": morph, "reduction": rep},
                          {"source": traj, "reduced": image})


def rigid_body_problem(inertia):
    return oc.problem_from_lagrangian(systems.rigid_body(inertia), Chart.cube(3, 1e3))


def _oc_so3(cfg, rng):
    P = rigid_body_problem(cfg["inertia"])
    traj = oc.integrate_critical(P, [], cfg["mu0"], cfg.get("u0", [0.0, 0.0, 0.0]),
                                 cfg["t0"], cfg["t1"], cfg["dt"])
    resid = oc.criticality_residuals(P, traj)
    casimir = np.sum(traj.mu ** 2, axis=1)
    checks, ok = _gate({
        "casimir_drift": (float(np.max(np.abs(casimir - casimir[0]))), 1e-8),
        "H_drift": (resid["H_drift"], 1e-7),
        "stationarity": (resid["stationarity"], 1e-10),
    })
    return ScenarioResult(cfg["name"], bool(ok and resid["pass"]), {"checks": checks, "residuals": resid},
                          {"critical": traj})


def tangent_classical_problem():
    E = tangent_algebroid(1)
    return oc.OptimalControlProblem(
        E, 1, Chart.cube(1, 1e3),
        sigma=lambda x, u: u, index=lambda x, u: 0.5 * u[0] ** 2 + np.cos(x[0]),
        dsigma=lambda x, u: (np.zeros((1, 1)), np.eye(1)),
        dindex=lambda x, u: (np.array([-np.sin(x[0])]), u.copy()),
        sigma_uu=lambda x, u: np.zeros((1, 1, 1)), index_uu=lambda x, u: np.eye(1),
        name="classical")


def tangent_classical_hamiltonian():
    E = tangent_algebroid(1)
    return dy.HamiltonianSystem(E, lambda x, mu: 0.5 * mu[0] ** 2 - np.cos(x[0]),
                                lambda x, mu: (np.array([np.sin(x[0])]), mu.copy()), name="eliminated")


def _oc_tangent(cfg, rng):
    P = tangent_classical_problem()
    traj = oc.integrate_critical(P, cfg["x0"], cfg["mu0"], cfg["mu0"], cfg["t0"], cfg["t1"], cfg["dt"])
    ham = dy.integrate_hamiltonian(tangent_classical_hamiltonian(), cfg["x0"], cfg["mu0"],
                                   cfg["t0"], cfg["t1"], cfg["dt"])
    dist = float(max(np.max(np.abs(traj.x - ham.x)), np.max(np.abs(traj.mu - ham.y))))
    resid = oc.criticality_residuals(P, traj)
    checks, ok = _gate({"elimination_distance": (dist, 1e-8), "H_drift": (resid["H_drift"], 1e-7)})
    return ScenarioResult(cfg["name"], bool(ok and resid["pass"]), {"checks": checks, "residuals": resid},
                          {"critical": traj})


def theta_pairing_residual(M, rng, count=50, radius=0.5):
    """``max |<Phi^c mu, Phi b> - <mu, b>|`` over random elements of T^E E*."""
    worst = 0.0
    for x in _ball(rng, count, radius):
        mu, b, mud = rng.normal(size=(3, M.source.m))
        _, mup, bp, _, _ = mo.prolonged_contragredient(M, x, mu, b, mud)
        worst = max(worst, abs(float(mup @ bp - mu @ b)))
    return worst


def _oc_tso3(cfg, rng):
    M = systems.tso3_to_so3()
    box = Chart.cube(3, 1e3)
    PS = oc.problem_from_lagrangian(systems.tso3_rigid_body(cfg["inertia"]), box)
    PT = oc.problem_from_lagrangian(systems.rigid_body(cfg["inertia"]), box)
    runs, ok, first = [], True, {}
    for k, (x0, mu0) in enumerate(zip(_ball(rng, cfg["count"], 0.5), rng.uniform(-0.5, 0.5, (cfg["count"], 3)))):
        traj = oc.integrate_critical(PS, x0, mu0, np.zeros(3), cfg["t0"], cfg["t1"], cfg["dt"])
        image, rep = oc.reduce_control(M, lambda x, u: body_map(x) @ u, PS, PT, traj)
        direct = oc.integrate_critical(PT, [], image.mu[0], image.u[0], cfg["t0"], cfg["t1"], cfg["dt"])
        rep["source_residuals"] = oc.criticality_residuals(PS, traj)
        rep["direct_distance"] = float(np.max(np.abs(direct.mu - image.mu)))
        rep["pass"] = bool(rep["pass"] and rep["source_residuals"]["pass"] and rep["direct_distance"] < 1e-5)
        ok = ok and rep["pass"]
        runs.append(rep)
        if k == 0:
            first = {"source": traj, "reduced": image}
    pairing = theta_pairing_residual(M, rng, cfg["samples"])
    ok = ok and pairing < 1e-10
    return ScenarioResult(cfg["name"], bool(ok), {"runs": runs, "theta_pairing": pairing}, first)


def quartic_lagrangian():
    """Hyperregular ``L = y^2/2 + y^4/12 + cos x`` on the line."""
    E = tangent_algebroid(1)
    return dy.LagrangianSystem(
        E,
        lambda x, y: 0.5 * y[0] ** 2 + y[0] ** 4 / 12 + np.cos(x[0]),
        lambda x, y: (np.array([-np.sin(x[0])]), y + y ** 3 / 3),
        lambda x, y: (np.zeros((1, 1)), np.array([[1.0 + y[0] ** 2]])),
        name="quartic")


def _legendre_crosscheck(cfg, rng):
    LS = quartic_lagrangian()
    P = oc.problem_from_lagrangian(LS, Chart.cube(1, 1e3))
    traj = oc.integrate_critical(P, cfg["x0"], cfg["mu0"], cfg["mu0"], cfg["t0"], cfg["t1"], cfg["dt"])
    HS = dy.hamiltonian_from_lagrangian(LS)
    ham = dy.integrate_hamiltonian(HS, cfg["x0"], cfg["mu0"], cfg["t0"], cfg["t1"], cfg["dt"])
    graph = max(float(np.max(np.abs(LS.gradients(x, u)[1] - mu))) for x, mu, u in zip(traj.x, traj.mu, traj.u))
    checks, ok = _gate({
        "flow_distance": (float(max(np.max(np.abs(traj.x - ham.x)), np.max(np.abs(traj.mu - ham.y)))), 1e-8),
        "legendre_graph": (graph, 1e-10),
        "hamiltonian_agreement": (float(np.max(np.abs(traj.hamiltonian - ham.energy))), 1e-10),
    })
    return ScenarioResult(cfg["name"], bool(ok), {"checks": checks}, {"critical": traj, "hamiltonian": ham})


@dataclass(frozen=True)
class Builtin:
    name: str
    description: str
    kind: str
    runner: Callable
    defaults: dict


_I = [1.0, 2.0, 3.0]
BUILTINS = (
    Builtin("tangent-pendulum", "Pendulum on TR: energy drift and symplectic residual", "lagrangian",
            _pendulum, dict(x0=[1.0], y0=[0.0], t1=10.0, dt=1e-3)),
    Builtin("so3-rigid-body", "Free rigid body on so(3), I = (1, 2, 3)", "lagrangian",
            _rigid_body, dict(inertia=_I, y0=[1.0, 0.1, 0.1], t1=10.0, dt=1e-3)),
    Builtin("tso3-reduction", "TSO(3) to so(3) reduction of left-invariant rigid-body motions", "reduction",
            _tso3_reduction, dict(inertia=_I, t1=2.0, dt=1e-2, count=5)),
    Builtin("atiyah-beanie", "Circle-invariant system on R x S^1 reduced to TR x R", "reduction",
            _atiyah, dict(x0=[0.5, 0.0], y0=[0.0, 1.0], t1=10.0, dt=1e-2)),
    Builtin("oc-so3-rigid", "Optimal control on so(3) with cost u.Iu/2", "optimal-control",
            _oc_so3, dict(inertia=_I, mu0=[1.0, 0.1, 0.1], t1=10.0, dt=1e-3)),
    Builtin("oc-tso3-reduction", "Optimal control on TSO(3) reduced to so(3)", "oc-reduction",
            _oc_tso3, dict(inertia=_I, t1=2.0, dt=1e-2, count=3, samples=50)),
    Builtin("hamiltonian-legendre-crosscheck", "Control with sigma = id against the Legendre Hamiltonian",
            "optimal-control", _legendre_crosscheck, dict(x0=[0.5], mu0=[0.3], t1=5.0, dt=1e-2)),
    Builtin("so3-lie-poisson", "Lie-Poisson rigid body: Casimir and bracket consistency", "hamiltonian",
            _lie_poisson, dict(inertia=_I, mu0=[1.0, 0.2, 0.3], t1=10.0, dt=1e-3)),
    Builtin("so3-action-validate", "Axioms, d^2 = 0 and dOmega = 0 on so(3)-type algebroids", "validate",
            _action_validate, dict()),
    Builtin("pendulum-variational", "Criticality certificate on a solution and on a perturbed curve",
            "variational-certificate", _pendulum_variational, dict(x0=[1.0], y0=[0.0], t1=5.0, dt=1e-3)),
    Builtin("oc-tangent-classical", "Classical control elimination on TR against Hamilton's equations",
            "optimal-control", _oc_tangent, dict(x0=[0.5], mu0=[0.0], t1=10.0, dt=1e-2)),
)
_BY_NAME = {b.name: b for b in BUILTINS}
COMMON_DEFAULTS = dict(t0=0.0, seed=0, samples=100)


def list_builtins():
    return [(b.name, b.description) for b in BUILTINS]


def builtin_config(name):
    try:
        b = _BY_NAME[name]
    except KeyError:
        raise ConfigError(f"unknown builtin scenario {name!r}") from None
    return {"builtin": name, "name": name, "kind": b.kind, **COMMON_DEFAULTS, **b.defaults}


# configuration-driven scenarios


def _integration_args(cfg):
    return cfg["t0"], cfg["t1"], cfg["dt"]


def _run_validate(cfg, rng):
    E = load_algebroid(cfg["algebroid"])
    entry, passed = _validate_report(E, rng, cfg["samples"])
    prep = validate(prolong(E, E.m).realized, seed=int(rng.integers(2 ** 31)))
    entry["prolongation"] = prep.to_dict()
    return ScenarioResult(cfg["name"], bool(passed and prep.passed), entry)


def _run_lagrangian(cfg, rng):
    E = load_algebroid(cfg["algebroid"])
    LS = load_lagrangian(E, cfg["lagrangian"])
    traj = dy.integrate_lagrangian(LS, cfg.get("x0", []), cfg["y0"], *_integration_args(cfg))
    tol = cfg.get("tolerance", 1e-6)
    checks, ok = _gate({
        "relative_energy_drift": (_relative_drift(traj.energy), tol),
        "symplectic_residual": (_symplectic_check(LS, rng, cfg["samples"]), tol),
    })
    return ScenarioResult(cfg["name"], ok, {"checks": checks}, {"trajectory": traj})


def _run_hamiltonian(cfg, rng):
    E = load_algebroid(cfg["algebroid"])
    HS = load_hamiltonian(E, cfg["hamiltonian"])
    traj = dy.integrate_hamiltonian(HS, cfg.get("x0", []), cfg["mu0"], *_integration_args(cfg))
    checks, ok = _gate({"relative_energy_drift": (_relative_drift(traj.energy), cfg.get("tolerance", 1e-6))})
    return ScenarioResult(cfg["name"], ok, {"checks": checks}, {"trajectory": traj})


def _run_certificate(cfg, rng):
    E = load_algebroid(cfg["algebroid"])
    LS = load_lagrangian(E, cfg["lagrangian"])
    traj = dy.integrate_lagrangian(LS, cfg.get("x0", []), cfg["y0"], *_integration_args(cfg))
    cert = criticality_certificate(LS, traj)
    return ScenarioResult(cfg["name"], cert["pass"], {"certificate": cert}, {"trajectory": traj})


def _run_reduction(cfg, rng):
    E, T = load_algebroid(cfg["algebroid"]), load_algebroid(cfg["target"])
    M = load_morphism(cfg["morphism"], E, T)
    LS, LT = load_lagrangian(E, cfg["lagrangian"]), load_lagrangian(T, cfg["target_lagrangian"])
    morph = mo.check_morphism(M)
    traj = dy.integrate_lagrangian(LS, cfg.get("x0", []), cfg["y0"], *_integration_args(cfg))
    rep, image = mo.verify_reduction(M, LS, LT, traj)
    ok = rep["pass"] and morph["max_residual"] < cfg.get("tolerance", 1e-5)
    return ScenarioResult(cfg["name"], bool(ok), {"morphism": morph, "reduction": rep},
                          {"source": traj, "reduced": image})


def _run_control(cfg, rng):
    P = load_problem(cfg["problem"])
    traj = oc.integrate_critical(P, cfg.get("x0", []), cfg["mu0"], cfg.get("u0", np.zeros(P.control_dim)),
                                 *_integration_args(cfg))
    resid = oc.criticality_residuals(P, traj)
    return ScenarioResult(cfg["name"], resid["pass"], {"residuals": resid}, {"critical": traj})


def _run_control_reduction(cfg, rng):
    P, PT = load_problem(cfg["problem"]), load_problem(cfg["target_problem"])
    M = load_morphism(cfg["morphism"], P.E, PT.E)
    psi = load_control_map(cfg["psi"], P.E, P.control_dim, PT.control_dim)
    traj = oc.integrate_critical(P, cfg.get("x0", []), cfg["mu0"], cfg.get("u0", np.zeros(P.control_dim)),
                                 *_integration_args(cfg))
    image, rep = oc.reduce_control(M, psi, P, PT, traj, morphism_tol=cfg.get("tolerance", 1e-5))
    return ScenarioResult(cfg["name"], rep["pass"], rep, {"source": traj, "reduced": image})


KIND_RUNNERS = {
    "validate": _run_validate,
    "lagrangian": _run_lagrangian,
    "hamiltonian": _run_hamiltonian,
    "variational-certificate": _run_certificate,
    "reduction": _run_reduction,
    "optimal-control": _run_control,
    "oc-reduction": _run_control_reduction,
}


# execution


def resolve(config):
    """Merge builtin defaults, validate against the schema and check the time grid."""
    if isinstance(config, str):
        config = builtin_config(config)
    check_document(config)
    if "builtin" in config:
        config = {**builtin_config(config["builtin"]), **config}
    else:
        config = {**COMMON_DEFAULTS, "name": "scenario", **config}
    check_document(config)
    if "t1" in config and not config["t1"] > config["t0"]:
        raise ConfigError("t1 must exceed t0")
    return config


def execute(config):
    """Run one resolved configuration and return its result."""
    rng = np.random.default_rng(config["seed"])
    if "builtin" in config:
        runner = _BY_NAME[config["builtin"]].runner
    else:
        runner = KIND_RUNNERS[config["kind"]]
    try:
        return runner(config, rng)
    except KeyError as exc:
        raise ConfigError(f"missing configuration field {exc}") from None


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_result(result, out_dir, fmt="csv", config=None):
    target = Path(out_dir) / result.name
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, traj in sorted(result.trajectories.items()):
        path = target / f"{stem}.{fmt}"
        path.write_text(traj.to_csv() if fmt == "csv" else _dump(traj.to_json()))
        written.append(path)
    report = {"name": result.name, "pass": result.passed, "report": result.report}
    if config is not None:
        report["config"] = config
    path = target / "report.json"
    path.write_text(_dump(report))
    written.append(path)
    return written


def run(config, out_dir="results", fmt="csv"):
    """Run one configuration; returns ``(exit_code, message)``."""
    try:
        cfg = resolve(config)
    except ConfigError as exc:
        return EXIT_CONFIG, f"config error: {exc}"
    try:
        result = execute(cfg)
    except ConfigError as exc:
        return EXIT_CONFIG, f"config error: {exc}"
    except AlgebroidError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("time", "condition"):
            if getattr(exc, attr, None) is not None:
                diag[attr] = getattr(exc, attr)
        write_result(ScenarioResult(cfg["name"], False, diag), out_dir, fmt, cfg)
        return EXIT_NUMERICAL, f"{cfg['name']}: numerical failure: {exc}"
    write_result(result, out_dir, fmt, cfg)
    status = "pass" if result.passed else "FAIL"
    return (EXIT_OK if result.passed else EXIT_NUMERICAL), f"{cfg['name']}: {status}"
