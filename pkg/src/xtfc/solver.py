"""Collocation systems and least-squares training of the output weights.

Linear problems are one SVD least-squares solve. Nonlinear problems use
undamped Gauss-Newton from ``beta = 0``, each linearization solved by SVD
least squares. Systems of equations stack the residuals of every
equation and concatenate the output weights of every unknown.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constrained import ConstrainedExpression, ce_basis_row


class NumericError(ArithmeticError):
    """Non-finite data reached the linear-algebra layer."""


@dataclass(frozen=True)
class CollocationGrid:
    counts: tuple[int, ...]
    points: np.ndarray
    spacing: str = "uniform"

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def uniform_grid(box, counts) -> CollocationGrid:
    """Tensor grid of ``counts[k]`` equispaced points per axis, endpoints included."""
    counts = tuple(int(c) for c in counts)
    if len(counts) != len(box):
        raise ValueError(f"{len(counts)} point counts given for a {len(box)}-dimensional box")
    if any(c < 1 for c in counts):
        raise ValueError(f"point counts must be positive, got {counts}")
    axes = [np.linspace(lo, hi, c) if c > 1 else np.array([0.5 * (lo + hi)]) for (lo, hi), c in zip(box, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    return CollocationGrid(counts, points)


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.

    ``rcond=None`` means machine epsilon times the larger matrix dimension.
    Gauss-Newton stops once the next step would change no residual entry by
    more than ``tol`` (or stalls at the round-off floor, see ``gauss_newton``).
    """

    rcond: float | None = None
    tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass
class SolveOutcome:
    beta: np.ndarray
    iterations: int
    converged: bool
    residual_max: float
    solve_time: float
    betas: list = field(default_factory=list)
    history: list = field(default_factory=list)
    message: str = ""


def lstsq_svd(a, b, rcond=None) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a @ x = b``.

    Singular values below ``rcond * s_max`` are discarded.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.shape[0] != a.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NumericError("least-squares system contains non-finite entries")
    if rcond is None:
        rcond = np.finfo(float).eps * max(a.shape)
    x, *_ = np.linalg.lstsq(a, b, rcond=rcond)
    return x


def gauss_newton(residual_fn: Callable, jacobian_fn: Callable, beta0, cfg: SolveConfig = SolveConfig()) -> SolveOutcome:
    """Iterative least squares for ``min ||r(beta)||``.

    Each iteration solves the linearization ``J(beta) beta_new = J(beta) beta
    - r(beta)`` for the minimum-norm ``beta_new``. Inside the retained singular
    subspace this is the usual step ``dbeta = -J^+ r``; it additionally drops
    whatever part of ``beta`` lies in the truncated subspace, which otherwise
    piles up during the early large steps and caps the attainable residual.

    The predicted residual change ``max|J dbeta|`` is the convergence metric
    and is checked before a step is applied, so the reported iteration count
    is the number of steps taken and a linear residual converges after
    exactly one.

    Stopping:

    * metric below ``cfg.tol``: converged;
    * metric no longer decreasing while already below
      ``sqrt(eps) * (1 + max|r(beta0)|)``: converged at the round-off floor
      (further steps would only inject noise into ``beta``);
    * metric growing three times in a row: diverged, reported as not converged.
    """
    t0 = time.perf_counter()
    beta = np.array(beta0, dtype=float)
    r = residual_fn(beta)
    floor = np.sqrt(np.finfo(float).eps) * (1.0 + float(np.max(np.abs(r))))
    history = []
    converged = False
    growth = 0
    message = "iteration limit reached"
    steps = 0
    while True:
        jac = jacobian_fn(beta)
        step = lstsq_svd(jac, jac @ beta - r, cfg.rcond) - beta
        metric = float(np.max(np.abs(jac @ step)))
        grew = bool(history) and metric >= history[-1]
        history.append(metric)
        if metric < cfg.tol:
            converged, message = True, "converged"
            break
        if grew and metric < floor:
            converged, message = True, "converged (round-off floor)"
            break
        growth = growth + 1 if grew else 0
        if growth >= 3:
            message = "diverging: residual change grew three times in a row"
            break
        if steps == cfg.max_iter:
            break
        beta = beta + step
        steps += 1
        r = residual_fn(beta)
    return SolveOutcome(
        beta=beta,
        iterations=steps,
        converged=converged,
        residual_max=float(np.max(np.abs(r))),
        solve_time=time.perf_counter() - t0,
        history=history,
        message=message,
    )


class CollocationSystem:
    """Offsets and rows of every constrained-expression derivative a problem needs.

    ``problem`` supplies ``derivs`` (per unknown, the derivative multi-indices
    its residual uses), ``residual(points, u)`` returning an ``(E, N)`` array
    and ``jacobian_terms(points, u)`` yielding ``(equation, unknown, multi_index,
    coefficient)`` with ``dr_e/dbeta_o = sum coefficient * row``. ``u`` maps
    ``(unknown, multi_index)`` to values at the points.
    """

    def __init__(self, problem, ces: Sequence[ConstrainedExpression], points):
        if len(ces) != problem.n_outputs:
            raise ValueError(f"problem {problem.id} has {problem.n_outputs} unknowns, got {len(ces)} expressions")
        self.problem = problem
        self.points = np.asarray(points, dtype=float)
        self.sizes = [ce.basis.n_neurons for ce in ces]
        self.splits = np.cumsum(self.sizes)[:-1]
        self.fields = {}
        for o, ds in enumerate(problem.derivs):
            for d in ds:
                self.fields[(o, tuple(d))] = ce_basis_row(ces[o], self.points, d)

    @property
    def n_unknowns(self) -> int:
        return int(sum(self.sizes))

    def split(self, beta):
        return np.split(np.asarray(beta, dtype=float), self.splits)

    def values(self, beta):
        parts = self.split(beta)
        return {key: off + row @ parts[key[0]] for key, (off, row) in self.fields.items()}

    def residual(self, beta) -> np.ndarray:
        r = np.asarray(self.problem.residual(self.points, self.values(beta)), dtype=float)
        return r.reshape(-1)

    def jacobian(self, beta) -> np.ndarray:
        u = self.values(beta)
        n = self.points.shape[0]
        n_eq = self.problem.n_equations
        jac = np.zeros((n_eq * n, self.n_unknowns))
        starts = np.concatenate([[0], np.cumsum(self.sizes)])
        for eq, o, d, coef in self.problem.jacobian_terms(self.points, u):
            row = self.fields[(o, tuple(d))][1]
            coef = np.broadcast_to(np.asarray(coef, dtype=float), (n,))
            jac[eq * n:(eq + 1) * n, starts[o]:starts[o + 1]] += coef[:, None] * row
        return jac


def assemble_linear(problem, ces, grid):
    """Matrix ``A`` and vector ``b`` with residual ``A @ beta - b`` at the grid points."""
    if not problem.linear:
        raise ValueError(f"problem {problem.id} is nonlinear; use Gauss-Newton")
    system = CollocationSystem(problem, ces, getattr(grid, "points", grid))
    zero = np.zeros(system.n_unknowns)
    return system.jacobian(zero), -system.residual(zero)


def solve(problem, ces, grid, cfg: SolveConfig = SolveConfig()) -> SolveOutcome:
    """Train the output weights of ``ces`` on ``grid``.

    Linear problems take a single least-squares solve; nonlinear ones run
    Gauss-Newton from zero. ``outcome.betas`` holds one weight vector per
    unknown.
    """
    system = CollocationSystem(problem, ces, getattr(grid, "points", grid))
    zero = np.zeros(system.n_unknowns)
    if problem.linear:
        a, b = system.jacobian(zero), -system.residual(zero)
        t0 = time.perf_counter()
        beta = lstsq_svd(a, b, cfg.rcond)
        elapsed = time.perf_counter() - t0
        r = a @ beta - b
        outcome = SolveOutcome(beta, 1, True, float(np.max(np.abs(r))), elapsed, message="linear solve")
    else:
        outcome = gauss_newton(system.residual, system.jacobian, zero, cfg)
    outcome.betas = system.split(outcome.beta)
    return outcome
