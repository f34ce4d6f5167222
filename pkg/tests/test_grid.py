import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hsreg import grid


def test_inner_constants():
    one = np.ones(200)
    assert grid.inner(one, one) == pytest.approx(1.0, abs=1e-14)
    assert grid.inner(np.zeros(200), np.arange(200.0)) == 0.0


def test_inner_identity_function():
    t = grid.nodes(201)
    assert abs(grid.inner(t, t) - 1.0 / 3.0) <= 1e-4


def test_norm_values():
    assert grid.norm(np.ones(200)) == pytest.approx(1.0, abs=1e-14)
    assert grid.norm(np.zeros(200)) == 0.0
    assert abs(grid.norm(grid.nodes(200)) - 1.0 / np.sqrt(3.0)) <= 1e-4


def test_inner_rejects_mismatched_grids():
    with pytest.raises(ValueError, match="mismatch"):
        grid.inner(np.ones(5), np.ones(6))


@pytest.mark.parametrize("bad", [np.ones(1), np.ones((3, 3)), np.array([1.0, np.nan, 2.0])])
def test_grid_function_validation(bad):
    with pytest.raises(ValueError):
        grid.norm(bad)


def test_weights_sum_to_one():
    for n in (2, 3, 10, 200):
        assert grid.trapezoid_weights(n).sum() == pytest.approx(1.0, abs=1e-14)


def test_J_exact_on_constants_and_affine():
    t = grid.nodes(200)
    np.testing.assert_allclose(grid.apply_J(np.ones(200)), t, atol=1e-14)
    np.testing.assert_allclose(grid.apply_J(t), t**2 / 2, atol=1e-14)
    assert not np.any(grid.apply_J(np.zeros(200)))


def test_J_adjoint_identity(rng):
    for n in (3, 50, 200):
        h, g = rng.standard_normal(n), rng.standard_normal(n)
        lhs = grid.inner(grid.apply_J(h), g)
        rhs = grid.inner(h, grid.apply_J_adjoint(g))
        assert abs(lhs - rhs) <= 1e-12 * grid.norm(h) * grid.norm(g)


def test_J_adjoint_of_one_is_tail_integral():
    t = grid.nodes(200)
    out = grid.apply_J_adjoint(np.ones(200))
    # the endpoint rows carry the O(h) error of the weighted transpose
    assert np.max(np.abs(out - (1 - t))) <= 2.0 / 199
    assert not np.any(grid.apply_J_adjoint(np.zeros(200)))


def test_J_converges_at_second_order():
    errs = []
    for n in (51, 101, 201):
        t = grid.nodes(n)
        errs.append(np.max(np.abs(grid.apply_J(np.cos(3 * t)) - np.sin(3 * t) / 3)))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates > 1.9)


@given(arrays(float, st.integers(2, 60), elements=st.floats(-1e3, 1e3)))
def test_norm_is_nonnegative_and_homogeneous(u):
    assert grid.norm(u) >= 0
    assert grid.norm(-2.0 * u) == pytest.approx(2.0 * grid.norm(u), rel=1e-12, abs=1e-300)


@given(st.integers(2, 80), st.integers(0, 2**32 - 1))
def test_cauchy_schwarz(n, seed):
    r = np.random.default_rng(seed)
    u, v = r.standard_normal(n), r.standard_normal(n)
    assert abs(grid.inner(u, v)) <= grid.norm(u) * grid.norm(v) * (1 + 1e-12)
