"""Independent reference implementations used by the tests."""

import numpy as np
import sympy as sp

from xtfc.activation import ActivationKind


def central_diff(fn, x, axis, order, h):
    """Central finite difference of order 1 or 2 along ``axis`` for batched ``fn``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    e = np.zeros(x.shape[1])
    e[axis] = h
    if order == 1:
        return (fn(x + e) - fn(x - e)) / (2 * h)
    if order == 2:
        return (fn(x + e) - 2 * fn(x) + fn(x - e)) / h**2
    raise ValueError(order)


def symbolic_activation(kind, z):
    kind = ActivationKind(kind)
    if kind is ActivationKind.LOGISTIC:
        return 1 / (1 + sp.exp(-z))
    if kind is ActivationKind.TANH:
        return sp.tanh(z)
    if kind is ActivationKind.SIN:
        return sp.sin(z)
    return sp.exp(-z**2)


def symbolic_g(basis, beta, symbols):
    """The free function as a sympy expression, built from the raw basis arrays."""
    u = [(s - float(basis.shift[k])) * float(basis.scale[k]) for k, s in enumerate(symbols)]
    g = 0
    for j in range(basis.n_neurons):
        z = sum(float(basis.weights[j, k]) * u[k] for k in range(len(symbols))) + float(basis.biases[j])
        g += float(beta[j]) * symbolic_activation(basis.kind, z)
    return g


def symbolic_switches(symbol, ops):
    """Switch polynomials for ``ops = [(location, order), ...]`` by exact linear algebra."""
    n = len(ops)
    mat = sp.Matrix(n, n, lambda i, p: sp.diff(symbol**p, symbol, ops[i][1]).subs(symbol, sp.nsimplify(ops[i][0])))
    inv = mat.inv()
    return [sum(inv[p, i] * symbol**p for p in range(n)) for i in range(n)]


def boolean_sum_ce(problem, g, output=0):
    """Constrained expression by successive one-axis corrections.

    For each axis ``k`` in turn,
    ``h <- h + sum_i v_{k,i}(x_k) * (c_{k,i} - (d^{d_i} h / dx_k^{d_i})|_{x_k = q_i})``.
    This composes the one-dimensional interpolation operators directly and
    never forms the tensor of signed boundary compositions.
    """
    syms = problem.symbols
    h = g
    for k, s in enumerate(syms):
        cons = [(q, d, expr) for axis, q, d, expr in problem.constraints[output] if axis == k]
        if not cons:
            continue
        switches = symbolic_switches(s, [(q, d) for q, d, _ in cons])
        correction = 0
        for v, (q, d, expr) in zip(switches, cons):
            qq = sp.nsimplify(q)
            data = sp.sympify(expr).subs(s, qq)
            correction += v * (data - sp.diff(h, s, d).subs(s, qq))
        h = h + correction
    return h


def lambdify_derivative(expr, symbols, orders):
    for s, o in zip(symbols, orders):
        if o:
            expr = sp.diff(expr, s, o)
    fn = sp.lambdify(symbols, expr, "numpy")

    def call(points):
        pts = np.atleast_2d(points)
        return np.broadcast_to(np.asarray(fn(*pts.T), dtype=float), (pts.shape[0],))

    return call


def constraint_residuals(problem, basis, betas, n=40, seed=0):
    """Per constraint, ``|B f - data|`` at random points of its hyperplane for each
    column of ``betas``. Data come straight from the problem's sympy expressions."""
    from xtfc.constrained import ce_basis_row

    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in problem.box])
    hi = np.array([b[1] for b in problem.box])
    syms = problem.symbols
    for o, ce in enumerate(problem.build_ces(basis)):
        for axis, q, d, expr in problem.constraints[o]:
            pts = lo + (hi - lo) * rng.uniform(size=(n, problem.dim))
            pts[:, axis] = q
            orders = [0] * problem.dim
            orders[axis] = d
            offset, row = ce_basis_row(ce, pts, orders)
            data = lambdify_derivative(sp.sympify(expr), syms, (0,) * problem.dim)(pts)
            yield np.abs(offset[:, None] + row @ betas - data[:, None])
