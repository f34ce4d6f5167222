"""Uniform grids on [0, 1], trapezoidal quadrature and the Volterra operator.

Grid functions are plain 1-D float arrays of length ``n``; the grid
``t_i = i / (n - 1)`` includes both endpoints.  All inner products are the
trapezoidal approximation of the L2(0, 1) inner product.
"""

from functools import lru_cache

import numpy as np

DEFAULT_N = 200


def _check_n(n):
    if int(n) != n or n < 2:
        raise ValueError(f"grid needs at least 2 points, got {n!r}")
    return int(n)


def as_grid_function(x):
    """Validate ``x`` as a grid function and return it as a float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"grid function must be 1-D, got shape {x.shape}")
    _check_n(x.size)
    if not np.all(np.isfinite(x)):
        raise ValueError("grid function has non-finite samples")
    return x


def _same_grid(u, v):
    if u.size != v.size:
        raise ValueError(f"grid size mismatch: {u.size} != {v.size}")


def nodes(n=DEFAULT_N):
    n = _check_n(n)
    return np.linspace(0.0, 1.0, n)


def spacing(n):
    return 1.0 / (_check_n(n) - 1)


@lru_cache(maxsize=None)
def _weights(n):
    w = np.full(n, spacing(n))
    w[0] = w[-1] = 0.5 * w[0]
    w.setflags(write=False)
    return w


def trapezoid_weights(n):
    """Trapezoid weights: ``h/2`` at the endpoints and ``h`` in between."""
    return _weights(_check_n(n))


def inner(u, v):
    u, v = as_grid_function(u), as_grid_function(v)
    _same_grid(u, v)
    return float(np.dot(trapezoid_weights(u.size) * u, v))


def norm(u):
    """Trapezoidal L2(0, 1) norm."""
    u = as_grid_function(u)
    return float(np.sqrt(max(np.dot(trapezoid_weights(u.size) * u, u), 0.0)))


@lru_cache(maxsize=None)
def _integration_matrix(n):
    h = spacing(n)
    J = np.tril(np.full((n, n), h))
    J[:, 0] = 0.5 * h
    J[np.arange(n), np.arange(n)] = 0.5 * h
    J[0, 0] = 0.0
    J.setflags(write=False)
    return J


def integration_matrix(n):
    """Lower-triangular matrix of the cumulative trapezoid rule.

    Row ``i`` integrates over ``[0, t_i]``; the first row is zero.
    """
    return _integration_matrix(_check_n(n))


def weighted_transpose(A):
    """Adjoint of ``A`` in the trapezoid-weighted inner product, ``W^-1 A^T W``."""
    w = trapezoid_weights(A.shape[0])
    return (A.T * w[None, :]) / w[:, None]


@lru_cache(maxsize=None)
def _integration_adjoint(n):
    Jt = weighted_transpose(integration_matrix(n))
    Jt.setflags(write=False)
    return Jt


def apply_J(f):
    """Cumulative trapezoidal integral ``(Jf)(t) = int_0^t f``."""
    f = as_grid_function(f)
    return integration_matrix(f.size) @ f


def apply_J_adjoint(g):
    """Discrete adjoint of :func:`apply_J`.

    Exact weighted transpose, so ``inner(apply_J(f), g) == inner(f,
    apply_J_adjoint(g))`` up to rounding.  Approximates ``int_t^1 g``.
    """
    g = as_grid_function(g)
    return _integration_adjoint(g.size) @ g
