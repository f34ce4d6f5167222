import numpy as np
import pytest
from hypothesis import given, strategies as st

from hsreg import grid
from hsreg.operators import Autoconvolution, ExpGrowth, ForwardOperator
from hsreg.scales import build_basis, scale_norm, sobolev_norm
from hsreg.solutions import SolutionSpec, make_solution
from hsreg.tikhonov import (HilbertScalePenalty, SobolevPenalty, TikhonovProblem,
                            auxiliary_minimize, minimize, penalty_norm, verify_lemma_bounds)


class LinearVolterra(ForwardOperator):
    name = "linear"

    def forward(self, x):
        return grid.apply_J(x)

    def derivative(self, x):
        return np.array(grid.integration_matrix(len(x)))


def test_penalty_matrices_reproduce_norms(rng):
    n = 80
    b = build_basis(n)
    x = rng.standard_normal(n)
    assert penalty_norm(HilbertScalePenalty(), x) == pytest.approx(scale_norm(x, 1, b), rel=1e-10)
    pen = SobolevPenalty(0.4)
    assert penalty_norm(pen, x) == pytest.approx(sobolev_norm(x, 0.4), rel=1e-10)


def test_sobolev_penalty_validation():
    with pytest.raises(ValueError):
        SobolevPenalty(-1)


def test_linear_problem_matches_normal_equations(rng):
    n = 50
    x_true = np.sin(3 * grid.nodes(n))
    y = grid.apply_J(x_true) + 1e-3 * rng.standard_normal(n)
    alpha = 1e-4
    pen = SobolevPenalty(0.5)
    res = minimize(TikhonovProblem(LinearVolterra(), y, alpha, pen))
    J, W, P = grid.integration_matrix(n), np.diag(grid.trapezoid_weights(n)), pen.matrix(n)
    x_ref = np.linalg.solve(J.T @ W @ J + alpha * P.T @ P, J.T @ W @ y)
    assert res.converged
    np.testing.assert_allclose(res.x, x_ref, rtol=1e-8, atol=1e-10)


def test_hilbert_penalty_enforces_boundary_value():
    n = 60
    y = ExpGrowth()(np.cos(grid.nodes(n)))
    res = minimize(TikhonovProblem(ExpGrowth(), y, 1e-5, HilbertScalePenalty()))
    assert res.x[-1] == 0.0
    assert res.converged


def test_near_exact_data_nearly_interpolated():
    x_true = make_solution(SolutionSpec("RS2", 200))
    y = ExpGrowth()(x_true)
    res = minimize(TikhonovProblem(ExpGrowth(), y, 1e-8, SobolevPenalty(0.9)))
    assert res.residual_Y <= 1e-3


def test_large_alpha_pushes_to_zero():
    x_true = make_solution(SolutionSpec("RS5", 200))
    y = ExpGrowth()(x_true)
    res = minimize(TikhonovProblem(ExpGrowth(), y, 1e6, SobolevPenalty(0.5)))
    assert grid.norm(res.x) <= 1e-2


@pytest.mark.parametrize("kind,penalty", [("RS5", SobolevPenalty(0.33)), ("RS2", SobolevPenalty(0.1)),
                                          ("RS5", HilbertScalePenalty())])
def test_minimizer_beats_exact_solution(kind, penalty):
    n = 200
    x_true = make_solution(SolutionSpec(kind, n))
    r = np.random.default_rng(5)
    y = ExpGrowth()(x_true)
    y = y + 1e-2 * grid.norm(y) * r.standard_normal(n) / np.sqrt(n)
    prob = TikhonovProblem(ExpGrowth(), y, 1e-3, penalty)
    res = minimize(prob)
    assert res.objective <= prob.evaluate(x_true)[0] + 1e-10


def test_autoconvolution_solve_from_data_guess():
    n = 100
    y = Autoconvolution()(np.ones(n)) * 1.01
    res = minimize(TikhonovProblem(Autoconvolution(), y, 1e-4, SobolevPenalty(0.1)))
    assert res.converged
    assert res.residual_Y < 0.05 * grid.norm(y)


def test_problem_validation():
    with pytest.raises(ValueError):
        TikhonovProblem(ExpGrowth(), np.ones(10), 0.0, SobolevPenalty(0.1))
    with pytest.raises(ValueError):
        TikhonovProblem(ExpGrowth(), np.ones(10), 1.0, SobolevPenalty(0.1), x0=np.ones(11))


def test_auxiliary_minimizer_single_mode():
    b = build_basis(120)
    for k in (0, 7, 60):
        alpha, a = 1e-3, 1.0
        xa = auxiliary_minimize(b.vectors[:, k], alpha, a, b)
        c = b.coefficients(xa)
        expected = np.zeros(120)
        expected[k] = 1.0 / (1.0 + alpha * b.sigma[k] ** -(a + 1))
        np.testing.assert_allclose(c, expected, atol=1e-12)


def test_auxiliary_minimizer_limits(rng):
    b = build_basis(120)
    # smooth element: near-checkerboard modes have sigma ~ 1e-9 and are not
    # recovered at alpha = 1e-14
    x = make_solution(SolutionSpec("RS5", 120)) + np.sin(5 * grid.nodes(120))
    assert scale_norm(auxiliary_minimize(x, 1e-14, 1.0, b) - x, -1.0, b) <= 1e-6
    assert grid.norm(auxiliary_minimize(x, 1e14, 1.0, b)) <= 1e-6


def test_auxiliary_minimizer_is_stationary(rng):
    # gradient of ||x - x_dag||_{-a}^2 + alpha ||x||_1^2 vanishes in the spectral basis
    b = build_basis(60)
    x_dag = rng.standard_normal(60)
    alpha, a = 1e-2, 0.7
    xa = auxiliary_minimize(x_dag, alpha, a, b)
    cd, ca = b.coefficients(x_dag), b.coefficients(xa)
    grad = b.sigma**a * (ca - cd) + alpha * ca / b.sigma
    assert np.max(np.abs(grad)) <= 1e-10 * np.max(np.abs(cd))


def test_lemma_bounds_single_mode_and_zero():
    b = build_basis(200)
    deltas = (1e-1, 1e-2, 1e-3, 1e-4)
    for k in (0, 3, 50, 150):
        assert all(r["passed"] for r in verify_lemma_bounds(b.vectors[:, k], 1 / 3, 1.0, deltas, b))
    rows = verify_lemma_bounds(np.zeros(200), 1 / 3, 1.0, deltas, b)
    assert all(r["passed"] and r["error_X"] == 0 for r in rows)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.999), st.floats(0.2, 2.0),
       st.floats(1e-6, 0.5))
def test_lemma_bounds_for_random_elements(seed, p, a, delta):
    # oversmoothing range 0 < p < 1; for p > 1 the penalty bound fails on
    # modes with sigma >> alpha^(1/(a+1))
    b = build_basis(64)
    x = np.random.default_rng(seed).standard_normal(64)
    rows = verify_lemma_bounds(x, p, a, [delta], b)
    ratios = [v for k, v in rows[0].items() if k.endswith("_ratio")]
    assert max(ratios) <= 1.0 + 1e-12
