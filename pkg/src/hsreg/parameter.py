"""Regularization parameter choice: sequential discrepancy principle and a priori rules."""

import logging
import math
from dataclasses import dataclass

from .tikhonov import minimize

log = logging.getLogger(__name__)


class DiscrepancyError(RuntimeError):
    """No regularization parameter satisfies the discrepancy bracket."""


@dataclass(frozen=True)
class DiscrepancyConfig:
    C: float = 1.1
    alpha_max: float = 1.0
    alpha_min: float = 1e-16
    grid_ratio: float = 0.7
    bisections: int = 25

    def __post_init__(self):
        if not self.C > 1:
            raise ValueError(f"discrepancy multiplier C must exceed 1, got {self.C}")
        if not 0 < self.alpha_min < self.alpha_max:
            raise ValueError("need 0 < alpha_min < alpha_max")
        if not 0 < self.grid_ratio < 1:
            raise ValueError("grid_ratio must lie in (0, 1)")


def discrepancy_select(template, delta, cfg=DiscrepancyConfig()):
    """Choose ``alpha`` with ``delta <= ||F(x_alpha) - y_delta|| <= C delta``.

    Descends the geometric grid ``alpha_max * ratio^k`` with warm starts until
    the residual first drops to ``C delta``; an undershoot below ``delta`` is
    repaired by log-scale bisection inside the last bracket.  The returned
    result is the solve that satisfied the bracket.

    Parameters
    ----------
    template : TikhonovProblem
        Problem whose ``alpha`` is replaced; its ``x0`` seeds the first solve.
    delta : float
        Absolute noise level.
    """
    if not delta > 0:
        raise ValueError(f"noise level must be positive, got {delta}")
    lo_target, hi_target = delta, cfg.C * delta

    alpha = cfg.alpha_max
    result = minimize(template.with_alpha(alpha, template.x0))
    if result.residual_Y < lo_target:
        raise DiscrepancyError(
            f"noise exceeds signal: residual {result.residual_Y:.3g} < delta {delta:.3g} "
            f"already at alpha_max={cfg.alpha_max:g}; alpha_max too small or data degenerate")
    prev_alpha, prev = alpha, result
    while result.residual_Y > hi_target:
        alpha *= cfg.grid_ratio
        if alpha < cfg.alpha_min:
            raise DiscrepancyError(
                f"no admissible alpha: residual {result.residual_Y:.3g} > C*delta {hi_target:.3g} "
                f"at alpha_min={cfg.alpha_min:g}; data too accurate for grid/solver")
        prev_alpha, prev = alpha / cfg.grid_ratio, result
        result = minimize(template.with_alpha(alpha, prev.x))
        if result.residual_Y > prev.residual_Y * (1 + 1e-8):
            log.info("residual not monotone in alpha near alpha=%.3g", alpha)
    if result.residual_Y >= lo_target:
        return alpha, result

    # undershoot: prev is above C*delta, result below delta
    hi_alpha, hi_res = prev_alpha, prev
    lo_alpha, lo_res = alpha, result
    for _ in range(cfg.bisections):
        mid = math.sqrt(hi_alpha * lo_alpha)
        trial = minimize(template.with_alpha(mid, hi_res.x))
        if trial.residual_Y > hi_target:
            hi_alpha, hi_res = mid, trial
        elif trial.residual_Y < lo_target:
            lo_alpha, lo_res = mid, trial
        else:
            return mid, trial
    raise DiscrepancyError(
        f"bisection did not reach [{lo_target:.3g}, {hi_target:.3g}]: residual jumps from "
        f"{hi_res.residual_Y:.3g} (alpha={hi_alpha:.3g}) to {lo_res.residual_Y:.3g} (alpha={lo_alpha:.3g})")


def a_priori_exponent(p, a, gamma=1.0):
    """Exponent ``2 - 2 gamma (p - 1) / (p + a)``; equals ``2(a+1)/(a+p)`` for ``gamma = 1``."""
    if p + a <= 0:
        raise ValueError(f"need p + a > 0, got p={p}, a={a}")
    if not 0 < gamma <= 1:
        raise ValueError(f"need 0 < gamma <= 1, got {gamma}")
    return 2.0 - 2.0 * gamma * (p - 1.0) / (p + a)


def a_priori_alpha(delta, p, a, gamma=1.0):
    if not delta > 0 or not a > 0:
        raise ValueError("delta and a must be positive")
    return float(delta ** a_priori_exponent(p, a, gamma))


def estimate_p_from_rate(kappa_x, a):
    """Invert ``kappa_x = p / (p + a)``."""
    if not 0 < kappa_x < 1:
        raise ValueError(f"rate exponent must lie in (0, 1), got {kappa_x}")
    return a * kappa_x / (1.0 - kappa_x)


def regime_exponent(kappa_alpha):
    """Exponent of ``delta^2 / alpha`` in ``delta`` when ``alpha ~ delta^kappa_alpha``."""
    return 2.0 - kappa_alpha
