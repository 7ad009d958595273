"""Algebroids, morphisms, Lagrangians and control problems from JSON documents.

Expressions are strings in ``+ - * / ^`` with ``sin``, ``cos``, ``exp``,
``sqrt``, ``log``, ``tan`` and ``pi``; variables are ``x1..xn`` for the base,
``y1..ym`` for fibre velocities, ``mu1..mum`` for momenta and ``u1..uk`` for
controls.  Anchors, structure functions and bundle maps use finite-difference
derivatives; scalar functions (Lagrangians, Hamiltonians, control data) are
differentiated symbolically so Newton solves can reach their tolerances.
"""

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .control import OptimalControlProblem
from .core import Chart, LieAlgebroid, so3_algebroid, tangent_algebroid
from .dynamics import HamiltonianSystem, LagrangianSystem
from .errors import ConfigError
from .morphism import AlgebroidMorphism
from .so3 import action_algebroid, exponential_chart_algebroid

_TRANSFORMS = standard_transformations + (convert_xor,)
_FUNCTIONS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "sqrt": sp.sqrt,
              "log": sp.log, "tan": sp.tan, "pi": sp.pi}
_GLOBALS = {"Integer": sp.Integer, "Float": sp.Float, "Rational": sp.Rational,
            "Symbol": sp.Symbol, **_FUNCTIONS}

BUILTIN_ALGEBROIDS = {
    "so3": so3_algebroid,
    "tangent1": lambda: tangent_algebroid(1),
    "tangent2": lambda: tangent_algebroid(2),
    "tangent3": lambda: tangent_algebroid(3),
    "so3-action": action_algebroid,
    "tso3-exp": exponential_chart_algebroid,
}


def symbols(prefix, count):
    return [sp.Symbol(f"{prefix}{i + 1}") for i in range(count)]


def parse(text, allowed):
    """Parse one expression, rejecting unknown names."""
    names = {str(s): s for s in allowed}
    try:
        expr = parse_expr(str(text), local_dict=dict(names), global_dict=dict(_GLOBALS),
                          transformations=_TRANSFORMS)
    except Exception as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc}") from None
    expr = sp.sympify(expr)
    unknown = {str(s) for s in expr.free_symbols} - set(names)
    if unknown:
        raise ConfigError(f"unknown variables {sorted(unknown)} in {text!r}")
    return expr


def compile_array(exprs, args, shape):
    """Numeric function of the concatenated argument vectors."""
    flat = [parse(e, args) if not isinstance(e, sp.Basic) else e for e in exprs]
    fn = sp.lambdify(args, flat, modules="numpy")

    def evaluate(*vectors):
        values = np.concatenate([np.asarray(v, dtype=float).reshape(-1) for v in vectors]) \
            if vectors else np.zeros(0)
        return np.array(fn(*values), dtype=float).reshape(shape)

    return evaluate


def compile_scalar(expr, args):
    f = compile_array([expr], args, ())
    return lambda *vectors: float(f(*vectors))


def load_algebroid(doc):
    if isinstance(doc, str):
        return builtin_algebroid(doc)
    if "builtin" in doc:
        return builtin_algebroid(doc["builtin"])
    n, m = int(doc["n"]), int(doc["m"])
    domain = doc.get("domain", [])
    if len(domain) != n:
        raise ConfigError(f"domain has {len(domain)} intervals, expected {n}")
    chart = Chart.box(domain) if n else Chart.point()
    x = symbols("x", n)
    rho_rows = doc.get("rho", [["0"] * m for _ in range(n)])
    if len(rho_rows) != n or any(len(r) != m for r in rho_rows):
        raise ConfigError(f"rho must be an {n} x {m} array of expressions")
    rho = compile_array([e for row in rho_rows for e in row], x, (n, m))
    C = [[[sp.Integer(0)] * m for _ in range(m)] for _ in range(m)]
    for entry in doc.get("C", []):
        g, a, b = int(entry["alpha"]) - 1, int(entry["beta"]) - 1, int(entry["gamma"]) - 1
        if not (0 <= g < m and 0 <= a < m and 0 <= b < m):
            raise ConfigError(f"structure index out of range in {entry}")
        if a == b:
            raise ConfigError(f"C^{g + 1}_{{{a + 1}{b + 1}}} must vanish by antisymmetry")
        expr = parse(entry["expr"], x)
        C[g][a][b] = expr
        C[g][b][a] = -expr
    c = compile_array([C[g][a][b] for g in range(m) for a in range(m) for b in range(m)], x, (m, m, m))
    return LieAlgebroid(chart, m, rho=lambda p: rho(p), c=lambda p: c(p), name=doc.get("name", "json"))


def builtin_algebroid(name):
    try:
        return BUILTIN_ALGEBROIDS[name]()
    except KeyError:
        raise ConfigError(f"unknown builtin algebroid {name!r}; known: {sorted(BUILTIN_ALGEBROIDS)}") from None


def _gradient(expr, variables):
    return [sp.diff(expr, v) for v in variables]


def _block(expr, rows, cols):
    return [sp.diff(expr, r, c) for r in rows for c in cols]


def load_lagrangian(E, text, name="json"):
    x, y = symbols("x", E.n), symbols("y", E.m)
    args = x + y
    L = parse(text, args)
    value = compile_scalar(L, args)
    lx = compile_array(_gradient(L, x), args, (E.n,))
    ly = compile_array(_gradient(L, y), args, (E.m,))
    lxy = compile_array(_block(L, x, y), args, (E.n, E.m))
    lyy = compile_array(_block(L, y, y), args, (E.m, E.m))
    return LagrangianSystem(E, value, lambda p, v: (lx(p, v), ly(p, v)),
                            lambda p, v: (lxy(p, v), lyy(p, v)), name=name)


def load_hamiltonian(E, text, name="json"):
    x, mu = symbols("x", E.n), symbols("mu", E.m)
    args = x + mu
    H = parse(text, args)
    hx = compile_array(_gradient(H, x), args, (E.n,))
    hmu = compile_array(_gradient(H, mu), args, (E.m,))
    return HamiltonianSystem(E, compile_scalar(H, args), lambda p, m: (hx(p, m), hmu(p, m)), name=name)


def load_morphism(doc, source, target):
    x = symbols("x", source.n)
    phi = compile_array(doc.get("phi", []), x, (target.n,))
    rows = doc["Phi"]
    if len(rows) != target.m or any(len(r) != source.m for r in rows):
        raise ConfigError(f"Phi must be a {target.m} x {source.m} array of expressions")
    Phi = compile_array([e for row in rows for e in row], x, (target.m, source.m))
    flags = doc.get("flags", {})
    return AlgebroidMorphism(source, target, phi, Phi,
                             fiberwise_surjective=bool(flags.get("fiberwise_surjective", False)),
                             fiberwise_bijective=bool(flags.get("fiberwise_bijective", False)),
                             name=doc.get("name", "json"))


def load_control_map(doc, source, control_dim, target_control_dim):
    args = symbols("x", source.n) + symbols("u", control_dim)
    return compile_array(doc, args, (target_control_dim,))


def load_problem(doc):
    E = load_algebroid(doc["algebroid"])
    k = int(doc["control_dim"])
    box = doc.get("control_box", [[-1e6, 1e6]] * k)
    if len(box) != k:
        raise ConfigError(f"control_box has {len(box)} intervals, expected {k}")
    x, u = symbols("x", E.n), symbols("u", k)
    args = x + u
    if len(doc["sigma"]) != E.m:
        raise ConfigError(f"sigma needs {E.m} components")
    sig = [parse(e, args) for e in doc["sigma"]]
    L = parse(doc["index"], args)
    sigma = compile_array(sig, args, (E.m,))
    sx = compile_array([sp.diff(e, v) for e in sig for v in x], args, (E.m, E.n))
    su = compile_array([sp.diff(e, v) for e in sig for v in u], args, (E.m, k))
    suu = compile_array([e2 for e in sig for e2 in _block(e, u, u)], args, (E.m, k, k))
    lx = compile_array(_gradient(L, x), args, (E.n,))
    lu = compile_array(_gradient(L, u), args, (k,))
    luu = compile_array(_block(L, u, u), args, (k, k))
    return OptimalControlProblem(
        E, k, Chart.box(box), sigma, compile_scalar(L, args),
        dsigma=lambda p, w: (sx(p, w), su(p, w)),
        dindex=lambda p, w: (lx(p, w), lu(p, w)),
        sigma_uu=suu, index_uu=luu, name=doc.get("name", "json"))
