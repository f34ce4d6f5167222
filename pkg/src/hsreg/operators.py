"""Nonlinear forward operators on the uniform grid.

Both operators expose the same small interface: ``forward``, the assembled
``derivative`` matrix, its action and adjoint action, and the gradient of the
quadratic misfit.  Adjoints are exact weighted transposes, consistent with
:func:`hsreg.grid.inner`.
"""

from functools import lru_cache

import numpy as np

from . import grid

EXP_LIMIT = 700.0


class OperatorOverflow(ArithmeticError):
    """Raised when ``exp`` in the growth model would overflow."""


class ForwardOperator:
    name = "operator"

    def forward(self, x):
        raise NotImplementedError

    def derivative(self, x):
        """Matrix of the Frechet derivative at ``x``."""
        raise NotImplementedError

    def __call__(self, x):
        return self.forward(x)

    def initial_guess(self, y_delta):
        """Starting point for iterative solvers, computed from the data only."""
        return np.zeros(grid.as_grid_function(y_delta).size)

    def derivative_apply(self, x, h):
        x, h = grid.as_grid_function(x), grid.as_grid_function(h)
        if x.size != h.size:
            raise ValueError(f"grid size mismatch: {x.size} != {h.size}")
        return self.derivative(x) @ h

    def derivative_adjoint_apply(self, x, g):
        x, g = grid.as_grid_function(x), grid.as_grid_function(g)
        if x.size != g.size:
            raise ValueError(f"grid size mismatch: {x.size} != {g.size}")
        return grid.weighted_transpose(self.derivative(x)) @ g

    def misfit_gradient(self, x, y_delta):
        """Gradient of ``||F(x) - y_delta||^2`` in the trapezoid inner product."""
        y_delta = grid.as_grid_function(y_delta)
        return 2.0 * self.derivative_adjoint_apply(x, self.forward(x) - y_delta)


class ExpGrowth(ForwardOperator):
    """``F(x)(t) = y0 exp(int_0^t x)``, the solution of ``y' = x y``, ``y(0) = y0``."""

    name = "expgrowth"

    def __init__(self, y0=1.0):
        if not y0 > 0:
            raise ValueError(f"initial size y0 must be positive, got {y0}")
        self.y0 = float(y0)

    def __repr__(self):
        return f"ExpGrowth(y0={self.y0})"

    def forward(self, x):
        u = grid.apply_J(x)
        peak = np.max(np.abs(u))
        if peak > EXP_LIMIT:
            raise OperatorOverflow(f"|Jx| reaches {peak:.4g} > {EXP_LIMIT}; exp would overflow")
        return self.y0 * np.exp(u)

    def derivative(self, x):
        x = grid.as_grid_function(x)
        return self.forward(x)[:, None] * grid.integration_matrix(x.size)


@lru_cache(maxsize=8)
def _convolution_structure(n):
    i, j = np.indices((n, n))
    # trapezoid weights on [0, s_i]: h/2 at j == 0 and j == i, zero above the diagonal
    weights = np.where(j <= i, grid.spacing(n), 0.0)
    weights[:, 0] *= 0.5
    weights[i == j] *= 0.5
    weights[0, 0] = 0.0
    lag = np.clip(i - j, 0, None)
    weights.setflags(write=False)
    lag.setflags(write=False)
    return weights, lag


class Autoconvolution(ForwardOperator):
    """``F(x)(s) = int_0^s x(s - t) x(t) dt`` with the trapezoid rule on ``[0, s_i]``."""

    name = "autoconvolution"

    def __repr__(self):
        return "Autoconvolution()"

    def derivative(self, x):
        x = grid.as_grid_function(x)
        weights, lag = _convolution_structure(x.size)
        return 2.0 * weights * x[lag]

    def initial_guess(self, y_delta):
        # zero is stationary for the misfit (F'(0) = 0); start from the best
        # constant c instead, using F(c)(s) = c^2 s
        y_delta = grid.as_grid_function(y_delta)
        t = grid.nodes(y_delta.size)
        c2 = grid.inner(y_delta, t) / grid.inner(t, t)
        return np.full(y_delta.size, np.sqrt(max(c2, 0.0)))

    def forward(self, x):
        x = grid.as_grid_function(x)
        # F is quadratic, so F(x) = F'(x) x / 2 exactly
        return 0.5 * (self.derivative(x) @ x)


def make_operator(name, y0=1.0):
    if name == "expgrowth":
        return ExpGrowth(y0)
    if name == "autoconvolution":
        return Autoconvolution()
    raise ValueError(f"unknown operator {name!r}")
