"""Multivariate constrained expressions on rectangular domains.

A constrained expression has the form

    f(x) = g(x) + sum_{i != 0} M_i(c - g)(x) * prod_k v_{k, i_k}(x_k)

where ``M_i`` applies a signed composition of boundary operators (take
``d``-th derivative along axis ``k`` and restrict to ``x_k = q``) and the
switch polynomials ``v_k`` have the Kronecker property against the axis'
boundary operators. Any choice of ``g`` yields an ``f`` that meets every
constraint exactly.

Each nonzero tensor entry becomes one term of the expression. A term's
polynomial factor depends only on the constrained (fixed) coordinates and its
projected target only on the free ones, so derivatives separate without any
product-rule bookkeeping.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .elm import ElmBasis, basis_row

CORNER_TOL = 1e-12

# (points (N, dim), orders tuple) -> (N,) values
FieldFn = Callable[[np.ndarray, tuple], np.ndarray]


class ConstraintError(ValueError):
    """Invalid or inconsistent set of constraints."""


class ConstraintDegeneracyError(ConstraintError):
    """The boundary-operator matrix of one axis is singular."""

    def __init__(self, axis, cond):
        super().__init__(f"constraints on axis {axis} are degenerate (condition number {cond:.3g})")
        self.axis = axis


@dataclass(frozen=True)
class BoundaryOperator:
    """Take the ``order``-th derivative along ``axis``, then set ``x[axis] = location``."""

    axis: int
    location: float
    order: int = 0

    def on_monomial(self, power: int) -> float:
        if power < self.order:
            return 0.0
        coef = factorial(power) / factorial(power - self.order)
        return coef * self.location ** (power - self.order)


@dataclass(frozen=True)
class Constraint:
    """One hyperplane constraint ``d^order f / dx_axis^order = data`` on ``x_axis = location``.

    ``data(points, orders)`` returns partial derivatives of the constraint
    data; the ``axis`` coordinate of ``points`` is ignored and
    ``orders[axis]`` is always zero.
    """

    op: BoundaryOperator
    data: FieldFn

    @property
    def axis(self) -> int:
        return self.op.axis


@dataclass(frozen=True)
class ConstraintSpec:
    """All constraints of one unknown, grouped by axis."""

    dim: int
    per_axis: tuple[tuple[Constraint, ...], ...]

    @classmethod
    def from_constraints(cls, dim: int, constraints: Sequence[Constraint]) -> "ConstraintSpec":
        groups: list[list[Constraint]] = [[] for _ in range(dim)]
        for con in constraints:
            if not 0 <= con.axis < dim:
                raise ConstraintError(f"constraint axis {con.axis} outside 0..{dim - 1}")
            key = (con.op.location, con.op.order)
            if any((c.op.location, c.op.order) == key for c in groups[con.axis]):
                raise ConstraintError(f"duplicate constraint {key} on axis {con.axis}")
            groups[con.axis].append(con)
        return cls(dim, tuple(tuple(g) for g in groups))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(g) + 1 for g in self.per_axis)

    def operators(self, axis: int) -> list[BoundaryOperator]:
        return [c.op for c in self.per_axis[axis]]


@dataclass(frozen=True)
class SwitchVector:
    """Switch functions ``{1, v_1(x), ..., v_l(x)}`` for one axis.

    ``coeffs[i, j]`` is the coefficient of ``x**i`` in ``v_{j+1}``.
    """

    axis: int
    operators: tuple[BoundaryOperator, ...]
    coeffs: np.ndarray
    polys: tuple[Polynomial, ...] = field(repr=False)

    def __len__(self):
        return len(self.polys) + 1

    def __call__(self, index: int, x, deriv: int = 0):
        x = np.asarray(x, dtype=float)
        if index == 0:
            return np.full_like(x, 1.0 if deriv == 0 else 0.0)
        p = self.polys[index - 1]
        if deriv:
            p = p.deriv(deriv)
        return p(x)


def build_switch_vector(axis: int, operators: Sequence[BoundaryOperator]) -> SwitchVector:
    """Switch functions from monomials ``1, x, ..., x**(l-1)`` by matrix inversion."""
    ops = tuple(operators)
    n = len(ops)
    if n == 0:
        return SwitchVector(axis, ops, np.zeros((0, 0)), ())
    mat = np.array([[op.on_monomial(p) for p in range(n)] for op in ops], dtype=float)
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e12:
        raise ConstraintDegeneracyError(axis, cond)
    coeffs = np.linalg.solve(mat, np.eye(n))
    polys = tuple(Polynomial(coeffs[:, j]) for j in range(n))
    return SwitchVector(axis, ops, coeffs, polys)


@dataclass(frozen=True)
class MEntry:
    """Signed composition of boundary operators, one per constrained axis."""

    index: tuple[int, ...]
    sign: float
    operators: tuple[BoundaryOperator, ...]

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(op.axis for op in self.operators)

    def _projection(self, x, d):
        pts = np.array(np.atleast_2d(x), dtype=float)
        dim = pts.shape[1]
        d = (0,) * dim if d is None else tuple(d)
        orders = list(d)
        for op in self.operators:
            # entries do not depend on coordinates they fix
            if d[op.axis]:
                return None, None
            pts[:, op.axis] = op.location
            orders[op.axis] = op.order
        return pts, tuple(orders)

    def apply(self, target: FieldFn, x, d=None) -> np.ndarray:
        """Apply this entry to a field defined on the whole domain."""
        pts, orders = self._projection(x, d)
        if pts is None:
            return np.zeros(np.atleast_2d(x).shape[0])
        return self.sign * target(pts, orders)

    def apply_data(self, spec: ConstraintSpec, x, d=None, via: int | None = None) -> np.ndarray:
        """Apply this entry to the constraint data of ``spec``.

        The data of one constrained axis (``via``, default the first) is
        taken as the starting hyperplane function; the remaining operators
        act on it. Consistent data gives the same answer for every ``via``.
        """
        if not self.operators:
            return np.zeros(np.atleast_2d(x).shape[0])
        pts, orders = self._projection(x, d)
        if pts is None:
            return np.zeros(np.atleast_2d(x).shape[0])
        via = self.axes[0] if via is None else via
        ci = self.index[via] - 1
        orders = list(orders)
        orders[via] = 0
        data = spec.per_axis[via][ci].data
        return self.sign * np.asarray(data(pts, tuple(orders)), dtype=float)


@dataclass(frozen=True)
class MTensor:
    shape: tuple[int, ...]
    entries: dict

    def __getitem__(self, index) -> MEntry | None:
        """Entry at a zero-based index; ``None`` for the all-zero corner."""
        return self.entries.get(tuple(index))

    def nonzero(self) -> list[MEntry]:
        return [self.entries[k] for k in sorted(self.entries)]


def build_m_tensor(spec: ConstraintSpec) -> MTensor:
    """Collect every signed boundary-operator composition of ``spec``.

    Index ``0`` on an axis means "no operator"; index ``i > 0`` selects the
    ``i``-th constraint of that axis. The sign is ``(-1)**(m + 1)`` with
    ``m`` the number of nonzero indices.
    """
    entries = {}
    for index in itertools.product(*(range(s) for s in spec.shape)):
        m = sum(1 for i in index if i)
        if m == 0:
            continue
        ops = tuple(spec.per_axis[k][i - 1].op for k, i in enumerate(index) if i)
        entries[index] = MEntry(index, float((-1) ** (m + 1)), ops)
    return MTensor(spec.shape, entries)


def check_consistency(spec: ConstraintSpec, mtensor: MTensor, box, n_samples=7, seed=0):
    """Check that intersecting constraints agree, by sampling the box."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    pts = lo + (hi - lo) * rng.random((n_samples, spec.dim))
    for entry in mtensor.nonzero():
        if len(entry.operators) < 2:
            continue
        values = [entry.apply_data(spec, pts, via=axis) for axis in entry.axes]
        ref = values[0]
        for axis, val in zip(entry.axes[1:], values[1:]):
            err = np.max(np.abs(val - ref) / (1.0 + np.abs(ref)))
            if err > CORNER_TOL:
                raise ConstraintError(
                    f"constraint data disagree at intersection {entry.operators} "
                    f"(axes {entry.axes[0]} vs {axis}, mismatch {err:.3g})"
                )


@dataclass(frozen=True, eq=False)
class ConstrainedExpression:
    spec: ConstraintSpec
    switches: tuple[SwitchVector, ...]
    mtensor: MTensor
    basis: ElmBasis

    @property
    def terms(self) -> list[MEntry]:
        return self.mtensor.nonzero()

    def _weight(self, entry: MEntry, pts, d):
        w = np.ones(pts.shape[0])
        for k, i in enumerate(entry.index):
            if i:
                w = w * self.switches[k](i, pts[:, k], d[k])
        return w


def build_ce(spec: ConstraintSpec, basis: ElmBasis, box=None) -> ConstrainedExpression:
    """Constrained expression for ``spec`` whose free function uses ``basis``.

    When ``box`` (a sequence of ``(lo, hi)`` per axis) is given, the
    constraint data are checked for agreement at their intersections.
    """
    if basis.dim != spec.dim:
        raise ConstraintError(f"basis dimension {basis.dim} does not match constraint dimension {spec.dim}")
    switches = tuple(build_switch_vector(k, spec.operators(k)) for k in range(spec.dim))
    mtensor = build_m_tensor(spec)
    if box is not None:
        check_consistency(spec, mtensor, box)
    return ConstrainedExpression(spec, switches, mtensor, basis)


def _orders(ce, d):
    d = (0,) * ce.spec.dim if d is None else tuple(int(v) for v in d)
    if len(d) != ce.spec.dim:
        raise ValueError(f"derivative multi-index {d} does not match dimension {ce.spec.dim}")
    return d


def _unique_rows(a):
    """Unique rows of a float array and the inverse map, via a byte view."""
    a = np.ascontiguousarray(a)
    view = a.view(np.dtype((np.void, a.dtype.itemsize * a.shape[1]))).ravel()
    _, first, inverse = np.unique(view, return_index=True, return_inverse=True)
    return a[first], inverse.reshape(-1)


def _terms(ce, pts, d):
    """Per nonzero entry: switch weight, entry sign, constraint-data part and
    the projected points (deduplicated) with the basis derivative orders."""
    for entry in ce.terms:
        w = ce._weight(entry, pts, d)
        if not np.any(w):
            continue
        # derivatives along fixed axes hit the switch polynomial, the rest the entry
        free = tuple(0 if i else dk for i, dk in zip(entry.index, d))
        proj, orders = entry._projection(pts, free)
        data = entry.apply_data(ce.spec, pts, free)
        uniq, inverse = _unique_rows(proj)
        yield w, entry.sign, data, uniq, inverse, orders


def ce_basis_row(ce: ConstrainedExpression, x, d=None):
    """Affine form of a constrained-expression derivative.

    Returns ``(offset, row)`` with ``d^d f(x) = offset + row @ beta`` for
    every ``beta``. Shapes follow ``x``: ``()``/``(L,)`` for one point,
    ``(N,)``/``(N, L)`` for a batch.
    """
    d = _orders(ce, d)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    offset = np.zeros(pts.shape[0])
    row = np.array(basis_row(ce.basis, pts, d), dtype=float)
    for w, sign, data, uniq, inverse, orders in _terms(ce, pts, d):
        offset += w * data
        row -= (w * sign)[:, None] * basis_row(ce.basis, uniq, orders)[inverse]
    if single:
        return float(offset[0]), row[0]
    return offset, row


def ce_eval(ce: ConstrainedExpression, beta, x, d=None):
    """Value (or partial derivative) of the constrained expression at ``x``.

    Equals ``offset + row @ beta`` from :func:`ce_basis_row` without forming
    the ``(N, L)`` rows.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (ce.basis.n_neurons,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({ce.basis.n_neurons},)")
    d = _orders(ce, d)
    x = np.asarray(x, dtype=float)
    pts = np.atleast_2d(x)
    out = basis_row(ce.basis, pts, d) @ beta
    for w, sign, data, uniq, inverse, orders in _terms(ce, pts, d):
        out += w * (data - sign * (basis_row(ce.basis, uniq, orders) @ beta)[inverse])
    return float(out[0]) if x.ndim == 1 else out
