"""Benchmark catalog: two ODE problems and seven PDE problems with closed-form truth.

Each problem carries its domain, the constraints of every unknown, the
residual operator with the chain-rule coefficients of its Jacobian, the
exact solution and the default hyperparameters. Exact solutions and
constraint data are sympy expressions so any partial derivative is available
in closed form; forcing terms are written out by hand.

Variables are ordered as listed in ``Problem.variables``; for the ODEs the
single variable is ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from .activation import ActivationKind
from .constrained import BoundaryOperator, Constraint, ConstraintSpec, build_ce
from .elm import ElmBasis, init_elm
from .solver import CollocationGrid, uniform_grid

DOMAIN_TOL = 1e-12

PI = np.pi


class SymbolicField:
    """Closed-form field ``(points, orders) -> values`` backed by a sympy expression.

    Derivatives are differentiated symbolically once per multi-index and
    cached as numpy functions.
    """

    def __init__(self, expr, symbols):
        self.expr = sp.sympify(expr)
        self.symbols = tuple(symbols)
        self._cache: dict[tuple, Callable] = {}

    def derivative(self, orders):
        orders = tuple(int(o) for o in orders)
        fn = self._cache.get(orders)
        if fn is None:
            expr = self.expr
            for s, o in zip(self.symbols, orders):
                if o:
                    expr = sp.diff(expr, s, o)
            fn = sp.lambdify(self.symbols, expr, "numpy")
            self._cache[orders] = fn
        return fn

    def __call__(self, points, orders=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if orders is None:
            orders = (0,) * len(self.symbols)
        out = self.derivative(orders)(*pts.T)
        return np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()


@dataclass(frozen=True)
class Defaults:
    neurons: int
    points: tuple[int, ...]
    activation: ActivationKind
    weight_range: tuple[float, float]
    tol: float = 1e-12
    max_iter: int = 50


@dataclass(frozen=True, eq=False)
class Problem:
    """One benchmark problem.

    ``constraints[o]`` lists ``(axis, location, order, data)`` for unknown
    ``o``, with ``data`` a sympy expression of the problem variables that
    gives the constrained derivative on the hyperplane.
    """

    id: str
    title: str
    variables: tuple[str, ...]
    box: tuple[tuple[float, float], ...]
    exact_exprs: tuple
    constraints: tuple
    derivs: tuple
    residual: Callable
    jacobian_terms: Callable
    linear: bool
    defaults: Defaults
    n_equations: int = 1
    test_points: np.ndarray | None = None
    parameters: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.variables)

    @property
    def n_outputs(self) -> int:
        return len(self.exact_exprs)

    @property
    def symbols(self):
        return sp.symbols(self.variables)

    def exact_field(self, output=0) -> SymbolicField:
        return _exact_fields(self)[output]

    def constraint_spec(self, output=0) -> ConstraintSpec:
        key = (self.id, output)
        if key not in _SPEC_CACHE:
            syms = sp.symbols(self.variables)
            cons = [
                Constraint(BoundaryOperator(axis, float(q), int(d)), SymbolicField(expr, syms))
                for axis, q, d, expr in self.constraints[output]
            ]
            _SPEC_CACHE[key] = ConstraintSpec.from_constraints(self.dim, cons)
        return _SPEC_CACHE[key]

    def make_basis(self, n_neurons=None, seed=0, activation=None, weight_range=None) -> ElmBasis:
        """Random basis for this problem; inputs are mapped from the domain box onto the unit box."""
        d = self.defaults
        return init_elm(
            d.neurons if n_neurons is None else n_neurons,
            self.dim,
            d.weight_range if weight_range is None else weight_range,
            seed,
            d.activation if activation is None else activation,
            domain=self.box,
        )

    def build_ces(self, basis: ElmBasis, check=True):
        """One constrained expression per unknown, all sharing ``basis``."""
        return [build_ce(self.constraint_spec(o), basis, self.box if check else None) for o in range(self.n_outputs)]


_FIELD_CACHE: dict[str, tuple] = {}
_SPEC_CACHE: dict[tuple, ConstraintSpec] = {}


def _exact_fields(problem):
    fields = _FIELD_CACHE.get(problem.id)
    if fields is None:
        syms = sp.symbols(problem.variables)
        fields = tuple(SymbolicField(e, syms) for e in problem.exact_exprs)
        _FIELD_CACHE[problem.id] = fields
    return fields


def in_domain(problem, x) -> bool:
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    lo = np.array([b[0] for b in problem.box]) - DOMAIN_TOL
    hi = np.array([b[1] for b in problem.box]) + DOMAIN_TOL
    return bool(np.all((pts >= lo) & (pts <= hi)))


def exact(problem: Problem, x, d=None) -> np.ndarray:
    """Closed-form truth at ``x``.

    Returns shape ``(n_outputs,)`` for one point or ``(N, n_outputs)`` for a
    batch. Points outside the domain box raise ``ValueError``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != problem.dim:
        raise ValueError(f"{problem.id} points need {problem.dim} coordinates")
    if not in_domain(problem, x):
        raise ValueError(f"point outside the {problem.id} domain {problem.box}")
    pts = np.atleast_2d(x)
    vals = np.stack([f(pts, d) for f in _exact_fields(problem)], axis=1)
    return vals[0] if x.ndim == 1 else vals


def make_grid(problem: Problem, counts=None, kind="uniform") -> CollocationGrid:
    if kind != "uniform":
        raise ValueError(f"unsupported grid kind {kind!r}")
    counts = problem.defaults.points if counts is None else tuple(counts)
    if len(counts) == 1 and problem.dim > 1:
        counts = counts * problem.dim
    return uniform_grid(problem.box, counts)


def test_grid_points(problem: Problem, counts=None) -> np.ndarray:
    """Off-training evaluation set: a uniform grid at twice the training density,
    plus the problem's tabulated test points when it has any."""
    counts = problem.defaults.points if counts is None else tuple(counts)
    if len(counts) == 1 and problem.dim > 1:
        counts = counts * problem.dim
    pts = uniform_grid(problem.box, [2 * c for c in counts]).points
    if problem.test_points is not None:
        pts = np.vstack([pts, problem.test_points])
    return pts


def exact_residual(problem: Problem, points) -> np.ndarray:
    """Residual operator evaluated on the exact solution (should vanish)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    fields = _exact_fields(problem)
    u = {(o, tuple(d)): fields[o](pts, d) for o, ds in enumerate(problem.derivs) for d in ds}
    return np.asarray(problem.residual(pts, u), dtype=float)


# ---------------------------------------------------------------- ode1

def _ode1():
    t = sp.Symbol("t")
    V, TT = (0,), (2,)

    def residual(p, u):
        tt = p[:, 0]
        y = u[(0, V)]
        return (u[(0, TT)] - (y**3 - 2.0 * y**2) / (2.0 * tt**2))[None, :]

    def jac(p, u):
        tt = p[:, 0]
        y = u[(0, V)]
        yield 0, 0, TT, 1.0
        yield 0, 0, V, -(3.0 * y**2 - 4.0 * y) / (2.0 * tt**2)

    return Problem(
        id="ode1",
        title="nonlinear second-order ODE, y'' = (y^3 - 2y^2) / (2t^2)",
        variables=("t",),
        box=((1.0, 2.0),),
        exact_exprs=(2 * t / (t + 1),),
        constraints=(((0, 1.0, 0, sp.Integer(1)), (0, 2.0, 0, sp.Rational(4, 3))),),
        derivs=((V, TT),),
        residual=residual,
        jacobian_terms=jac,
        linear=False,
        defaults=Defaults(51, (51,), ActivationKind.LOGISTIC, (-10.0, 10.0), tol=4.440892098500626e-16),
        test_points=np.round(np.linspace(1.0, 2.0, 11), 12)[:, None],
    )


# ---------------------------------------------------------------- sode2

def _sode2():
    t = sp.Symbol("t")
    V, T = (0,), (1,)

    def residual(p, u):
        tt = p[:, 0]
        y1, y2 = u[(0, V)], u[(1, V)]
        r1 = u[(0, T)] - (np.cos(tt) + y1**2 + y2 - (1.0 + tt**2 + np.sin(tt) ** 2))
        r2 = u[(1, T)] - (2.0 * tt - (1.0 + tt**2) * np.sin(tt) + y1 * y2)
        return np.stack([r1, r2])

    def jac(p, u):
        y1, y2 = u[(0, V)], u[(1, V)]
        yield 0, 0, T, 1.0
        yield 0, 0, V, -2.0 * y1
        yield 0, 1, V, -1.0
        yield 1, 1, T, 1.0
        yield 1, 1, V, -y1
        yield 1, 0, V, -y2

    return Problem(
        id="sode2",
        title="coupled nonlinear first-order ODE system",
        variables=("t",),
        box=((0.0, 3.0),),
        exact_exprs=(sp.sin(t), 1 + t**2),
        constraints=(((0, 0.0, 0, sp.Integer(0)),), ((0, 0.0, 0, sp.Integer(1)),)),
        derivs=((V, T), (V, T)),
        residual=residual,
        jacobian_terms=jac,
        linear=False,
        defaults=Defaults(100, (100,), ActivationKind.LOGISTIC, (-10.0, 10.0)),
        n_equations=2,
        test_points=np.round(np.linspace(0.0, 3.0, 11), 12)[:, None],
    )


# ---------------------------------------------------------------- pde1..pde3

def _poisson_terms(extra_jac=None):
    XX, YY = (2, 0), (0, 2)

    def jac(p, u):
        yield 0, 0, XX, 1.0
        yield 0, 0, YY, 1.0
        if extra_jac is not None:
            yield from extra_jac(p, u)

    return XX, YY, jac


def _pde1():
    x, y = sp.symbols("x y")
    XX, YY, jac = _poisson_terms()

    def residual(p, u):
        xx, yy = p[:, 0], p[:, 1]
        return (u[(0, XX)] + u[(0, YY)] - np.exp(-xx) * (xx - 2.0 + yy**3 + 6.0 * yy))[None, :]

    return Problem(
        id="pde1",
        title="Poisson equation with Dirichlet data on the unit square",
        variables=("x", "y"),
        box=((0.0, 1.0), (0.0, 1.0)),
        exact_exprs=(sp.exp(-x) * (x + y**3),),
        constraints=((
            (0, 0.0, 0, y**3),
            (0, 1.0, 0, (1 + y**3) * sp.exp(-1)),
            (1, 0.0, 0, x * sp.exp(-x)),
            (1, 1.0, 0, sp.exp(-x) * (x + 1)),
        ),),
        derivs=((XX, YY),),
        residual=residual,
        jacobian_terms=jac,
        linear=True,
        defaults=Defaults(170, (30, 30), ActivationKind.TANH, (-1.0, 1.0)),
    )


def _mixed_constraints(x, y):
    return ((
        (0, 0.0, 0, sp.Integer(0)),
        (0, 1.0, 0, sp.Integer(0)),
        (1, 0.0, 0, sp.Integer(0)),
        (1, 1.0, 1, 2 * sp.sin(sp.pi * x)),
    ),)


def _pde2():
    x, y = sp.symbols("x y")
    XX, YY, jac = _poisson_terms()

    def residual(p, u):
        xx, yy = p[:, 0], p[:, 1]
        return (u[(0, XX)] + u[(0, YY)] - (2.0 - PI**2 * yy**2) * np.sin(PI * xx))[None, :]

    return Problem(
        id="pde2",
        title="Poisson equation with a Neumann edge on the unit square",
        variables=("x", "y"),
        box=((0.0, 1.0), (0.0, 1.0)),
        exact_exprs=(y**2 * sp.sin(sp.pi * x),),
        constraints=_mixed_constraints(x, y),
        derivs=((XX, YY),),
        residual=residual,
        jacobian_terms=jac,
        linear=True,
        defaults=Defaults(170, (30, 30), ActivationKind.TANH, (-1.0, 1.0)),
    )


def _pde3():
    x, y = sp.symbols("x y")
    V, Y = (0, 0), (0, 1)

    def extra(p, u):
        yield 0, 0, V, u[(0, Y)]
        yield 0, 0, Y, u[(0, V)]

    XX, YY, jac = _poisson_terms(extra)

    def residual(p, u):
        xx, yy = p[:, 0], p[:, 1]
        s = np.sin(PI * xx)
        forcing = s * (2.0 - PI**2 * yy**2 + 2.0 * yy**3 * s)
        return (u[(0, XX)] + u[(0, YY)] + u[(0, V)] * u[(0, Y)] - forcing)[None, :]

    return Problem(
        id="pde3",
        title="nonlinear Poisson-type equation f_xx + f_yy + f f_y = U",
        variables=("x", "y"),
        box=((0.0, 1.0), (0.0, 1.0)),
        exact_exprs=(y**2 * sp.sin(sp.pi * x),),
        constraints=_mixed_constraints(x, y),
        derivs=((V, Y, XX, YY),),
        residual=residual,
        jacobian_terms=jac,
        linear=False,
        defaults=Defaults(150, (20, 20), ActivationKind.TANH, (-1.0, 1.0)),
    )


# ---------------------------------------------------------------- heat equations

def _pde4():
    x, t = sp.symbols("x t")
    kappa = 1.0
    XX, T = (2, 0), (0, 1)

    def residual(p, u):
        return (u[(0, XX)] - kappa * u[(0, T)])[None, :]

    def jac(p, u):
        yield 0, 0, XX, 1.0
        yield 0, 0, T, -kappa

    return Problem(
        id="pde4",
        title="1D heat equation",
        variables=("x", "t"),
        box=((0.0, 1.0), (0.0, 1.0)),
        exact_exprs=(sp.sin(sp.pi * x) * sp.exp(-sp.pi**2 * t),),
        constraints=((
            (0, 0.0, 0, sp.Integer(0)),
            (0, 1.0, 0, sp.Integer(0)),
            (1, 0.0, 0, sp.sin(sp.pi * x)),
        ),),
        derivs=((XX, T),),
        residual=residual,
        jacobian_terms=jac,
        linear=True,
        defaults=Defaults(196, (30, 30), ActivationKind.TANH, (-1.0, 1.0)),
        parameters={"kappa": kappa},
    )


def _pde5():
    x, y, t = sp.symbols("x y t")
    length, height, kappa = 2, 1, 1.0
    XX, YY, T = (2, 0, 0), (0, 2, 0), (0, 0, 1)

    def residual(p, u):
        return (u[(0, XX)] + u[(0, YY)] - kappa * u[(0, T)])[None, :]

    def jac(p, u):
        yield 0, 0, XX, 1.0
        yield 0, 0, YY, 1.0
        yield 0, 0, T, -kappa

    initial = sp.sin(sp.pi * x / length) * sp.sin(sp.pi * y / height)
    decay = sp.exp(-(sp.pi**2 / length**2 + sp.pi**2 / height**2) * t)
    return Problem(
        id="pde5",
        title="2D heat equation on [0, L] x [0, H]",
        variables=("x", "y", "t"),
        box=((0.0, float(length)), (0.0, float(height)), (0.0, 1.0)),
        exact_exprs=(initial * decay,),
        constraints=((
            (0, 0.0, 0, sp.Integer(0)),
            (0, float(length), 0, sp.Integer(0)),
            (1, 0.0, 0, sp.Integer(0)),
            (1, float(height), 0, sp.Integer(0)),
            (2, 0.0, 0, initial),
        ),),
        derivs=((XX, YY, T),),
        residual=residual,
        jacobian_terms=jac,
        linear=True,
        defaults=Defaults(400, (13, 13, 13), ActivationKind.TANH, (-1.0, 1.0)),
        parameters={"L": length, "H": height, "kappa": kappa},
    )


# ---------------------------------------------------------------- nonlinear time-dependent

def _pde6():
    x, y, t = sp.symbols("x y t")
    X, Y, T = (1, 0, 0), (0, 1, 0), (0, 0, 1)

    def residual(p, u):
        xx, yy, tt = p[:, 0], p[:, 1], p[:, 2]
        c = np.cos(2.0 * PI * xx * yy)
        forcing = (
            tt**2
            + (tt - 1.0) * xx
            + 2.0 * PI * xx * c
            + (2.0 * tt * yy + xx * yy) * ((tt - 1.0) * yy + 2.0 * PI * yy * c)
        )
        return (u[(0, T)] * u[(0, X)] + u[(0, Y)] - forcing)[None, :]

    def jac(p, u):
        yield 0, 0, T, u[(0, X)]
        yield 0, 0, X, u[(0, T)]
        yield 0, 0, Y, 1.0

    return Problem(
        id="pde6",
        title="nonlinear 2D time-dependent PDE z_t z_x + z_y = U",
        variables=("x", "y", "t"),
        box=((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)),
        exact_exprs=(sp.sin(2 * sp.pi * x * y) + t**2 * y + (t - 1) * x * y,),
        constraints=((
            (0, 0.0, 0, t**2 * y),
            (1, 0.0, 0, sp.Integer(0)),
            (2, 1.0, 0, y + sp.sin(2 * sp.pi * x * y)),
        ),),
        derivs=((X, Y, T),),
        residual=residual,
        jacobian_terms=jac,
        linear=False,
        defaults=Defaults(255, (8, 8, 8), ActivationKind.TANH, (-1.0, 1.0)),
    )


def _pde7():
    x, y, z, t = sp.symbols("x y z t")
    X, Y, Z, TT = (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 2)
    y32 = y ** sp.Rational(3, 2)

    def residual(p, u):
        xx, yy, zz, tt = p.T
        ry = np.sqrt(yy)
        c = np.cos(xx**2 * yy)
        fy = (tt - 1.0) * tt * xx * (zz - 1.0) + xx**2 * c + 1.5 * xx * ry * zz
        fx = (tt - 1.0) * tt * yy * (zz - 1.0) + 2.0 * xx * yy * c + yy * ry * zz
        fz = 2.0 * PI * tt**2 * np.cos(2.0 * PI * zz) + (tt - 1.0) * tt * xx * yy + xx * yy * ry
        forcing = fy * fx * fz + 2.0 * xx * yy * (zz - 1.0) + 2.0 * np.sin(2.0 * PI * zz)
        return (u[(0, X)] * u[(0, Y)] * u[(0, Z)] + u[(0, TT)] - forcing)[None, :]

    def jac(p, u):
        fx, fy, fz = u[(0, X)], u[(0, Y)], u[(0, Z)]
        yield 0, 0, X, fy * fz
        yield 0, 0, Y, fx * fz
        yield 0, 0, Z, fx * fy
        yield 0, 0, TT, 1.0

    return Problem(
        id="pde7",
        title="nonlinear 3D time-dependent PDE f_x f_y f_z + f_tt = U",
        variables=("x", "y", "z", "t"),
        box=((0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)),
        exact_exprs=(t**2 * sp.sin(2 * sp.pi * z) + sp.sin(x**2 * y) + x * y32 * z + x * y * t * (z - 1) * (t - 1),),
        constraints=((
            (0, 0.0, 0, t**2 * sp.sin(2 * sp.pi * z)),
            (1, 0.0, 0, t**2 * sp.sin(2 * sp.pi * z)),
            (2, 1.0, 0, sp.sin(x**2 * y) + x * y32),
            (3, 0.0, 0, sp.sin(x**2 * y) + x * y32 * z),
            (3, 1.0, 0, sp.sin(x**2 * y) + x * y32 * z + sp.sin(2 * sp.pi * z)),
        ),),
        derivs=((X, Y, Z, TT),),
        residual=residual,
        jacobian_terms=jac,
        linear=False,
        defaults=Defaults(340, (5, 5, 5, 5), ActivationKind.TANH, (-1.0, 1.0)),
    )


_BUILDERS = {
    "ode1": _ode1,
    "sode2": _sode2,
    "pde1": _pde1,
    "pde2": _pde2,
    "pde3": _pde3,
    "pde4": _pde4,
    "pde5": _pde5,
    "pde6": _pde6,
    "pde7": _pde7,
}

PROBLEM_IDS = tuple(_BUILDERS)
_CATALOG: dict[str, Problem] = {}


def get_problem(problem_id: str) -> Problem:
    """Look up a catalog problem by id."""
    if problem_id not in _BUILDERS:
        raise ValueError(f"unknown problem {problem_id!r}; choose from {', '.join(PROBLEM_IDS)}")
    if problem_id not in _CATALOG:
        _CATALOG[problem_id] = _BUILDERS[problem_id]()
    return _CATALOG[problem_id]


def catalog() -> list[Problem]:
    return [get_problem(pid) for pid in PROBLEM_IDS]
