import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xtfc.problems import get_problem, make_grid
from xtfc.solver import (
    CollocationSystem,
    NumericError,
    SolveConfig,
    assemble_linear,
    gauss_newton,
    lstsq_svd,
    solve,
    uniform_grid,
)


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 30),
    n=st.integers(1, 30),
    seed=st.integers(0, 10_000),
)
def test_residual_orthogonal_to_range(m, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(m, n))
    b = rng.normal(size=m)
    x = lstsq_svd(a, b)
    r = a @ x - b
    rel = np.linalg.norm(a.T @ r) / (np.linalg.norm(a, 2) * np.linalg.norm(b) + 1e-300)
    assert rel < 1e-10


def test_minimum_norm_for_rank_deficient_system():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(10, 3)) @ rng.normal(size=(3, 8))
    b = rng.normal(size=10)
    x = lstsq_svd(a, b)
    np.testing.assert_allclose(x, np.linalg.pinv(a) @ b, atol=1e-10)
    _, s, vt = np.linalg.svd(a)
    null = vt[3:]
    assert np.max(np.abs(null @ x)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (6, 4), elements=st.floats(-10, 10)))
def test_square_consistent_system_recovers_solution(a):
    rng = np.random.default_rng(1)
    a = a + 5 * np.eye(6, 4)
    if np.linalg.cond(a) > 1e8:
        return
    x_true = rng.normal(size=4)
    np.testing.assert_allclose(lstsq_svd(a, a @ x_true), x_true, atol=1e-8)


def test_rcond_truncates_small_singular_values():
    a = np.diag([1.0, 1e-9])
    b = np.array([1.0, 1.0])
    assert lstsq_svd(a, b, rcond=1e-6)[1] == 0.0
    assert lstsq_svd(a, b, rcond=1e-12)[1] == pytest.approx(1e9)


def test_non_finite_input():
    with pytest.raises(NumericError):
        lstsq_svd(np.array([[np.nan]]), np.array([1.0]))
    with pytest.raises(NumericError):
        lstsq_svd(np.eye(2), np.array([1.0, np.inf]))
    with pytest.raises(ValueError):
        lstsq_svd(np.eye(2), np.ones(3))


def test_linear_residual_converges_in_one_step():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(20, 5))
    b = rng.normal(size=20)
    out = gauss_newton(lambda x: a @ x - b, lambda x: a, np.zeros(5), SolveConfig(tol=1e-12))
    assert out.converged and out.iterations == 1
    np.testing.assert_allclose(out.beta, lstsq_svd(a, b), atol=1e-14)


def test_nonlinear_quadratic_convergence():
    res = lambda x: np.array([x[0] ** 2 - 4.0, x[0] * x[1] - 2.0, x[1] - 1.0])
    jac = lambda x: np.array([[2 * x[0], 0.0], [x[1], x[0]], [0.0, 1.0]])
    out = gauss_newton(res, jac, np.array([1.0, 3.0]), SolveConfig(tol=1e-14))
    assert out.converged
    np.testing.assert_allclose(out.beta, [2.0, 1.0], atol=1e-12)
    assert out.iterations <= 8
    assert len(out.history) == out.iterations + 1


def test_divergence_reported():
    res = lambda x: np.cbrt(x)
    jac = lambda x: np.diag(1.0 / (3.0 * np.cbrt(x) ** 2))
    out = gauss_newton(res, jac, np.array([0.5]), SolveConfig(tol=1e-12))
    assert not out.converged
    assert "diverg" in out.message


def test_iteration_limit():
    res = lambda x: np.exp(x) - 1.0 + 0.0 * x
    jac = lambda x: np.diag(np.exp(x))
    out = gauss_newton(res, jac, np.array([5.0]), SolveConfig(tol=1e-300, max_iter=2))
    assert out.iterations == 2 and not out.converged


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(tol=0.0)
    with pytest.raises(ValueError):
        SolveConfig(max_iter=0)


def test_uniform_grid():
    grid = uniform_grid(((0, 1), (2, 4)), (3, 5))
    assert grid.n_points == 15
    assert grid.points[0].tolist() == [0.0, 2.0] and grid.points[-1].tolist() == [1.0, 4.0]
    # first axis varies slowest
    assert grid.points[1].tolist() == [0.0, 2.5]
    with pytest.raises(ValueError):
        uniform_grid(((0, 1),), (3, 3))
    with pytest.raises(ValueError):
        uniform_grid(((0, 1),), (0,))


@pytest.mark.parametrize("pid", ["sode2", "pde3", "pde6", "pde7"])
def test_jacobian_matches_finite_differences(pid):
    problem = get_problem(pid)
    basis = problem.make_basis(10, seed=4)
    ces = problem.build_ces(basis)
    grid = make_grid(problem, (4,) * problem.dim)
    system = CollocationSystem(problem, ces, grid.points)
    beta = 0.3 * np.random.default_rng(0).normal(size=system.n_unknowns)
    jac = system.jacobian(beta)
    h = 1e-6
    fd = np.empty_like(jac)
    for j in range(system.n_unknowns):
        e = np.zeros(system.n_unknowns)
        e[j] = h
        fd[:, j] = (system.residual(beta + e) - system.residual(beta - e)) / (2 * h)
    assert np.max(np.abs(fd - jac)) / max(1.0, np.max(np.abs(jac))) < 1e-5


def test_linear_assembly_reproduces_residual():
    problem = get_problem("pde4")
    basis = problem.make_basis(20, seed=0)
    ces = problem.build_ces(basis)
    grid = make_grid(problem, (6, 6))
    a, b = assemble_linear(problem, ces, grid)
    system = CollocationSystem(problem, ces, grid.points)
    beta = np.random.default_rng(1).normal(size=20)
    np.testing.assert_allclose(a @ beta - b, system.residual(beta), atol=1e-10)
    with pytest.raises(ValueError):
        assemble_linear(get_problem("pde3"), get_problem("pde3").build_ces(get_problem("pde3").make_basis(5)), grid)


def test_linear_solve_reports_one_iteration():
    problem = get_problem("pde1")
    ces = problem.build_ces(problem.make_basis())
    out = solve(problem, ces, make_grid(problem))
    assert out.iterations == 1 and out.converged and out.solve_time > 0
    assert len(out.betas) == 1 and out.betas[0].shape == (170,)


def test_system_splits_weights_per_unknown():
    problem = get_problem("sode2")
    ces = problem.build_ces(problem.make_basis())
    out = solve(problem, ces, make_grid(problem))
    assert [b.shape for b in out.betas] == [(100,), (100,)]
    assert out.converged
