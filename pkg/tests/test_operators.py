import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import cumulative_trapezoid

from hsreg import grid
from hsreg.operators import Autoconvolution, ExpGrowth, OperatorOverflow, make_operator

OPERATORS = [ExpGrowth(1.0), Autoconvolution()]


def _random_state(seed, n=60):
    r = np.random.default_rng(seed)
    t = grid.nodes(n)
    # smooth-ish inputs keep exp well scaled
    x = 0.5 * np.cos(np.outer(t, np.arange(4)) * np.pi) @ r.standard_normal(4)
    return x, r.standard_normal(n), r.standard_normal(n)


def test_forward_examples():
    t = grid.nodes(200)
    np.testing.assert_array_equal(ExpGrowth(1.0)(np.zeros(200)), np.ones(200))
    assert np.max(np.abs(Autoconvolution()(np.ones(200)) - t)) <= 1e-12
    assert np.max(np.abs(ExpGrowth(1.0)(np.ones(200)) - np.exp(t))) <= 1e-4


def test_autoconvolution_matches_direct_trapezoid():
    n = 30
    x = np.random.default_rng(1).standard_normal(n)
    h = grid.spacing(n)
    direct = np.zeros(n)
    for i in range(1, n):
        vals = x[i::-1] * x[: i + 1]
        direct[i] = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    np.testing.assert_allclose(Autoconvolution()(x), direct, atol=1e-14)


def test_derivative_examples():
    t = grid.nodes(200)
    for op in OPERATORS:
        assert not np.any(op.derivative_apply(np.ones(200), np.zeros(200)))
    out = ExpGrowth(1.0).derivative_apply(np.zeros(200), np.ones(200))
    assert np.max(np.abs(out - t)) <= 1e-10
    out = Autoconvolution().derivative_apply(np.ones(200), np.ones(200))
    assert np.max(np.abs(out - 2 * t)) <= 1e-12


@pytest.mark.parametrize("op", OPERATORS, ids=lambda o: o.name)
@pytest.mark.parametrize("seed", range(10))
def test_derivative_matches_finite_differences(op, seed):
    x, h, _ = _random_state(seed)
    eps = 1e-6
    fd = (op(x + eps * h) - op(x - eps * h)) / (2 * eps)
    np.testing.assert_allclose(op.derivative_apply(x, h), fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("op", OPERATORS, ids=lambda o: o.name)
@pytest.mark.parametrize("seed", range(10))
def test_derivative_adjoint_identity(op, seed):
    x, h, g = _random_state(seed)
    lhs = grid.inner(op.derivative_apply(x, h), g)
    rhs = grid.inner(h, op.derivative_adjoint_apply(x, g))
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), grid.norm(h) * grid.norm(g))
    assert not np.any(op.derivative_adjoint_apply(x, np.zeros_like(g)))


def test_expgrowth_adjoint_continuous_form():
    n = 400
    t = grid.nodes(n)
    x, g = np.sin(t), np.cos(2 * t)
    Fx = ExpGrowth(1.0)(x)
    out = ExpGrowth(1.0).derivative_adjoint_apply(x, g)
    tail = grid.apply_J_adjoint(Fx * g)
    np.testing.assert_allclose(out, tail, atol=1e-12)
    # independent quadrature of the tail integral; the weighted transpose is O(h) at the ends
    cum = cumulative_trapezoid(Fx * g, t, initial=0.0)
    ref = cum[-1] - cum
    assert np.max(np.abs(out[1:-1] - ref[1:-1])) <= 5.0 / n


def _fd_gradient_error(op, x, y, direction, eps=1e-5):
    def f(z):
        return grid.norm(op(z) - y) ** 2

    fd = (f(x + eps * direction) - f(x - eps * direction)) / (2 * eps)
    an = grid.inner(op.misfit_gradient(x, y), direction)
    return abs(fd - an) / max(abs(an), 1e-300)


@pytest.mark.parametrize("op", OPERATORS, ids=lambda o: o.name)
@pytest.mark.parametrize("seed", range(10))
def test_misfit_gradient_finite_differences(op, seed):
    x, y, _ = _random_state(seed)
    r = np.random.default_rng(100 + seed)
    for _ in range(5):
        d = r.standard_normal(x.size)
        assert _fd_gradient_error(op, x, y, d) <= 1e-6


@pytest.mark.parametrize("op", OPERATORS, ids=lambda o: o.name)
def test_misfit_gradient_zero_at_exact_data(op):
    x, _, _ = _random_state(3)
    assert np.max(np.abs(op.misfit_gradient(x, op(x)))) <= 1e-12


@pytest.mark.parametrize("op", OPERATORS, ids=lambda o: o.name)
def test_misfit_gradient_affine_in_data(op):
    x, y, _ = _random_state(4)
    g0, g1, g2 = (op.misfit_gradient(x, c * y) for c in (0.0, 1.0, 2.0))
    assert np.max(np.abs((g2 - g0) - 2 * (g1 - g0))) <= 1e-12 * (1 + np.max(np.abs(g2)))


def test_expgrowth_overflow_guard():
    with pytest.raises(OperatorOverflow):
        ExpGrowth(1.0)(np.full(50, 1000.0))


def test_expgrowth_rejects_nonpositive_y0():
    with pytest.raises(ValueError):
        ExpGrowth(0.0)


def test_make_operator():
    assert isinstance(make_operator("expgrowth"), ExpGrowth)
    assert isinstance(make_operator("autoconvolution"), Autoconvolution)
    with pytest.raises(ValueError):
        make_operator("heat")


def test_autoconvolution_initial_guess_fits_constant():
    t = grid.nodes(100)
    guess = Autoconvolution().initial_guess(4.0 * t)
    np.testing.assert_allclose(guess, 2.0)
    assert not np.any(ExpGrowth().initial_guess(t))


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_autoconvolution_is_quadratic(seed, c):
    x = np.random.default_rng(seed).standard_normal(40)
    op = Autoconvolution()
    np.testing.assert_allclose(op(c * x), c**2 * op(x), rtol=1e-12, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_expgrowth_is_positive_and_starts_at_y0(seed):
    x = np.random.default_rng(seed).standard_normal(40)
    y = ExpGrowth(2.5)(x)
    assert y[0] == 2.5 and np.all(y > 0)
