"""Benchmark harness: single runs, Monte-Carlo studies, sensitivity sweeps and
comparison tables against published baseline errors."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .activation import ActivationKind
from .constrained import ce_eval
from .problems import exact, get_problem, make_grid, test_grid_points
from .solver import NumericError, SolveConfig, solve

log = logging.getLogger(__name__)

HIST_BIN_WIDTH = 0.5
# floor for log10 binning; exact zeros land in the lowest bin
ERROR_FLOOR = 1e-17


@dataclass(frozen=True)
class RunConfig:
    neurons: int
    points: tuple[int, ...]
    activation: str
    weight_range: tuple[float, float]
    seed: int = 0
    tol: float = 1e-12
    rcond: float | None = None
    max_iter: int = 50

    @classmethod
    def defaults(cls, problem_id: str, **overrides) -> "RunConfig":
        d = get_problem(problem_id).defaults
        base = cls(d.neurons, tuple(d.points), ActivationKind(d.activation).value, tuple(d.weight_range), tol=d.tol, max_iter=d.max_iter)
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(base, **overrides)


@dataclass
class RunReport:
    problem: str
    neurons: int
    points: list
    activation: str
    weight_range: list
    seed: int
    tol: float
    rcond: float | None
    max_iter: int
    train_max_error: float
    train_mean_error: float
    test_max_error: float
    test_mean_error: float
    train_max_residual: float
    iterations: int
    converged: bool
    solve_time: float
    total_time: float
    test_max_error_by_output: list = field(default_factory=list)
    train_max_error_by_output: list = field(default_factory=list)
    n_train: int = 0
    n_test: int = 0
    message: str = ""

    TIMING_FIELDS = ("solve_time", "total_time")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def _errors(problem, ces, betas, points):
    truth = exact(problem, points)
    errs = [np.abs(ce_eval(ce, b, points) - truth[:, o]) for o, (ce, b) in enumerate(zip(ces, betas))]
    return np.stack(errs, axis=1)


def _expand_points(problem, points):
    points = tuple(int(p) for p in points)
    if len(points) == 1 and problem.dim > 1:
        points = points * problem.dim
    if len(points) != problem.dim:
        raise ValueError(f"{problem.id} needs {problem.dim} point counts, got {len(points)}")
    return points


def run_once(problem_id: str, config: RunConfig | None = None) -> RunReport:
    """Full pipeline for one seed: basis, constrained expressions, grid, solve, errors."""
    t0 = time.perf_counter()
    problem = get_problem(problem_id)
    cfg = config or RunConfig.defaults(problem_id)
    points = _expand_points(problem, cfg.points)
    basis = problem.make_basis(cfg.neurons, cfg.seed, cfg.activation, cfg.weight_range)
    ces = problem.build_ces(basis)
    grid = make_grid(problem, points)
    outcome = solve(problem, ces, grid, SolveConfig(rcond=cfg.rcond, tol=cfg.tol, max_iter=cfg.max_iter))
    train = _errors(problem, ces, outcome.betas, grid.points)
    test_pts = test_grid_points(problem, points)
    test = _errors(problem, ces, outcome.betas, test_pts)
    total = time.perf_counter() - t0
    return RunReport(
        problem=problem_id,
        neurons=cfg.neurons,
        points=list(points),
        activation=ActivationKind(cfg.activation).value,
        weight_range=list(cfg.weight_range),
        seed=cfg.seed,
        tol=cfg.tol,
        rcond=cfg.rcond,
        max_iter=cfg.max_iter,
        train_max_error=float(train.max()),
        train_mean_error=float(train.mean()),
        test_max_error=float(test.max()),
        test_mean_error=float(test.mean()),
        train_max_residual=outcome.residual_max,
        iterations=outcome.iterations,
        converged=outcome.converged,
        solve_time=max(outcome.solve_time, 1e-9),
        total_time=max(total, 1e-9),
        test_max_error_by_output=[float(v) for v in test.max(axis=0)],
        train_max_error_by_output=[float(v) for v in train.max(axis=0)],
        n_train=int(grid.points.shape[0]),
        n_test=int(test_pts.shape[0]),
        message=outcome.message,
    )


def _trial(args):
    problem_id, config = args
    try:
        return run_once(problem_id, config)
    except (NumericError, np.linalg.LinAlgError) as exc:
        log.warning("trial seed=%d of %s failed: %s", config.seed, problem_id, exc)
        return None


@dataclass
class McSummary:
    problem: str
    trials: int
    base_seed: int
    seeds: list
    test_max_errors: list
    iterations: list
    converged: list
    failures: int
    median: float
    percentiles: dict
    hist_edges: list
    hist_counts: list
    by_output_median: list = field(default_factory=list)

    @property
    def successes(self) -> int:
        return self.trials - self.failures

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def histogram_rows(self):
        for lo, hi, n in zip(self.hist_edges[:-1], self.hist_edges[1:], self.hist_counts):
            yield {"log10_error_lo": lo, "log10_error_hi": hi, "count": n}


def log_histogram(errors, width=HIST_BIN_WIDTH):
    """Counts of ``log10(error)`` in bins of ``width`` aligned to multiples of ``width``."""
    logs = np.log10(np.maximum(np.asarray(errors, dtype=float), ERROR_FLOOR))
    lo = math.floor(logs.min() / width) * width
    hi = math.floor(logs.max() / width) * width + width
    n_bins = int(round((hi - lo) / width))
    edges = lo + width * np.arange(n_bins + 1)
    idx = np.clip(np.floor((logs - lo) / width).astype(int), 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    return [float(e) for e in edges], [int(c) for c in counts]


def _run_many(problem_id, configs, workers):
    jobs = [(problem_id, c) for c in configs]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_trial, jobs))
    return [_trial(j) for j in jobs]


def monte_carlo(problem_id: str, config: RunConfig | None = None, trials: int = 1000, workers: int = 1) -> McSummary:
    """Repeat ``run_once`` with seeds ``config.seed + k`` for ``k < trials``.

    Non-converged or crashed trials count as failures; their errors are kept
    out of the statistics.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    cfg = config or RunConfig.defaults(problem_id)
    configs = [dataclasses.replace(cfg, seed=cfg.seed + k) for k in range(trials)]
    reports = _run_many(problem_id, configs, workers)
    ok = [r for r in reports if r is not None and r.converged]
    failures = trials - len(ok)
    errors = [r.test_max_error for r in ok]
    if errors:
        qs = np.percentile(errors, [5, 25, 50, 75, 95])
        percentiles = {str(k): float(v) for k, v in zip((5, 25, 50, 75, 95), qs)}
        median = float(np.median(errors))
        edges, counts = log_histogram(errors)
        by_output = [float(v) for v in np.median([r.test_max_error_by_output for r in ok], axis=0)]
    else:
        percentiles, median, edges, counts, by_output = {}, float("nan"), [], [], []
    return McSummary(
        problem=problem_id,
        trials=trials,
        base_seed=cfg.seed,
        seeds=[c.seed for c in configs],
        test_max_errors=[r.test_max_error if r is not None else float("nan") for r in reports],
        iterations=[r.iterations if r is not None else -1 for r in reports],
        converged=[bool(r is not None and r.converged) for r in reports],
        failures=failures,
        median=median,
        percentiles=percentiles,
        hist_edges=edges,
        hist_counts=counts,
        by_output_median=by_output,
    )


@dataclass
class SweepCurve:
    problem: str
    axis: str
    values: list
    max_errors: list
    median_errors: list
    failures: list
    trials: int

    def rows(self):
        for v, mx, md, nf in zip(self.values, self.max_errors, self.median_errors, self.failures):
            yield {self.axis: v, "max_test_error": mx, "median_test_error": md, "failures": nf}


def sweep(problem_id: str, axis: str, values, trials: int = 1, config: RunConfig | None = None, workers: int = 1) -> SweepCurve:
    """Error versus points per side or number of neurons.

    Each value aggregates ``trials`` Monte-Carlo runs by the maximum of the
    per-trial test errors.
    """
    if axis not in ("points", "neurons"):
        raise ValueError(f"sweep axis must be 'points' or 'neurons', got {axis!r}")
    values = [int(v) for v in values]
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"sweep values must be non-empty and strictly increasing, got {values}")
    problem = get_problem(problem_id)
    cfg = config or RunConfig.defaults(problem_id)
    maxes, medians, fails = [], [], []
    for v in values:
        if axis == "points":
            c = dataclasses.replace(cfg, points=(v,) * problem.dim)
        else:
            c = dataclasses.replace(cfg, neurons=v)
        mc = monte_carlo(problem_id, c, trials, workers)
        good = [e for e, ok in zip(mc.test_max_errors, mc.converged) if ok]
        maxes.append(float(max(good)) if good else float("nan"))
        medians.append(mc.median)
        fails.append(mc.failures)
    return SweepCurve(problem_id, axis, values, maxes, medians, fails, trials)


# Published maximum errors (training, test); None where the source gives none.
PUBLISHED = {
    "pde1": [
        ("X-TFC (published)", 3.8e-13, 5.1e-13),
        ("FEM", 2e-8, 1.5e-5),
        ("ANN", 5e-7, 5e-7),
        ("CNN", None, 3.2e-2),
        ("BNN", None, 2.4e-4),
    ],
    "pde2": [
        ("X-TFC (published)", 6.3e-12, 7.6e-12),
        ("FEM", 7e-7, 4e-5),
        ("ANN", 6e-6, 6e-6),
        ("CNN", None, 3e-3),
    ],
    "pde3": [
        ("X-TFC (published)", 8.8e-11, 9.0e-11),
        ("FEM", 6e-7, 4e-5),
        ("ANN", 1.5e-5, 1.5e-5),
    ],
}


def compare_table(problem_id: str, report: RunReport | None = None) -> list[dict]:
    """Measured errors next to the published baseline constants."""
    if problem_id not in PUBLISHED:
        raise ValueError(f"no published baselines for {problem_id!r}; choose from {', '.join(PUBLISHED)}")
    report = report or run_once(problem_id)
    rows = [{
        "method": "X-TFC (this run)",
        "train_max_error": report.train_max_error,
        "test_max_error": report.test_max_error,
        "source": f"measured, seed {report.seed}",
    }]
    for method, train, test in PUBLISHED[problem_id]:
        rows.append({"method": method, "train_max_error": train, "test_max_error": test, "source": "published constant"})
    return rows
