"""Noise synthesis, rate studies over decreasing noise, power-law fits and CSV I/O."""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np
from scipy import stats

from . import grid
from .parameter import (DiscrepancyConfig, DiscrepancyError, a_priori_alpha,
                        discrepancy_select, estimate_p_from_rate)
from .operators import OperatorOverflow
from .tikhonov import TikhonovProblem, minimize

log = logging.getLogger(__name__)

DEFAULT_LEVELS = tuple(np.geomspace(1e-1, 1e-4, 8))
REGIME_THRESHOLD = 0.25


@dataclass(frozen=True)
class NoisyObservation:
    y_delta: np.ndarray
    delta_abs: float
    rel_level: float
    seed: int


def add_noise(y, rel_level, seed):
    """Add seeded Gaussian noise rescaled to ``||y - y_delta|| = rel_level ||y||``."""
    y = grid.as_grid_function(y)
    if not rel_level > 0:
        raise ValueError(f"relative noise level must be positive, got {rel_level}")
    ynorm = grid.norm(y)
    if ynorm == 0:
        raise ValueError("cannot prescribe relative noise for zero data")
    e = np.random.default_rng(seed).standard_normal(y.size)
    e *= rel_level * ynorm / grid.norm(e)
    return NoisyObservation(y_delta=y + e, delta_abs=rel_level * ynorm,
                            rel_level=float(rel_level), seed=int(seed))


@dataclass
class RateStudyRecord:
    rel_level: float
    delta_abs: float
    alpha: float
    error_X: float
    residual_Y: float
    penalty_norm: float
    delta_sq_over_alpha: float
    iterations: int
    seed: int
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"


@dataclass(frozen=True)
class DiscrepancyRule:
    config: DiscrepancyConfig = DiscrepancyConfig()

    def describe(self):
        return f"discrepancy(C={self.config.C:g})"


@dataclass(frozen=True)
class APrioriRule:
    p: float
    a: float = 1.0
    gamma: float = 1.0
    scale: float = 1.0

    def describe(self):
        return f"a-priori(p={self.p:g}, a={self.a:g}, gamma={self.gamma:g})"


def _solve_level(operator, x_true, penalty, rule, rel_level, seed, y):
    obs = add_noise(y, rel_level, seed)
    delta = obs.delta_abs
    template = TikhonovProblem(operator, obs.y_delta, 1.0, penalty)
    try:
        if isinstance(rule, DiscrepancyRule):
            alpha, res = discrepancy_select(template, delta, rule.config)
        else:
            alpha = rule.scale * a_priori_alpha(delta, rule.p, rule.a, rule.gamma)
            res = minimize(template.with_alpha(alpha))
    except (DiscrepancyError, OperatorOverflow) as exc:
        log.warning("level %.3g failed: %s", rel_level, exc)
        nan = float("nan")
        return RateStudyRecord(rel_level, delta, nan, nan, nan, nan, nan, 0, seed,
                               status="failed: " + str(exc).replace("\n", " ")), None
    record = RateStudyRecord(
        rel_level=float(rel_level),
        delta_abs=float(delta),
        alpha=float(alpha),
        error_X=grid.norm(res.x - x_true),
        residual_Y=res.residual_Y,
        penalty_norm=res.penalty_norm,
        delta_sq_over_alpha=float(delta**2 / alpha),
        iterations=res.iterations,
        seed=int(seed),
    )
    return record, res.x


def run_rate_study(operator, x_true, penalty, levels=DEFAULT_LEVELS,
                   rule=DiscrepancyRule(), seed=0, jobs=1, keep_solutions=False):
    """Solve one regularized problem per relative noise level.

    Levels are processed in decreasing order; level ``i`` draws its noise
    with seed ``seed + i``.  Failed levels are kept as records with a
    ``failed: ...`` status.  With ``keep_solutions`` a list of regularized
    solutions (``None`` for failures) is returned alongside the records.
    """
    levels = sorted((float(v) for v in levels), reverse=True)
    if len(levels) < 4:
        raise ValueError("a rate study needs at least 4 noise levels")
    x_true = grid.as_grid_function(x_true)
    y = operator.forward(x_true)
    args = [(operator, x_true, penalty, rule, lvl, seed + i, y) for i, lvl in enumerate(levels)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_solve_level, *zip(*args)))
    else:
        out = [_solve_level(*a) for a in args]
    records = [r for r, _ in out]
    if keep_solutions:
        return records, [x for _, x in out]
    return records


@dataclass(frozen=True)
class PowerLawFit:
    c: float
    kappa: float
    r_squared: float
    n_points: int


def fit_power_law(deltas, values):
    """Least-squares fit of ``log value = log c + kappa log delta``."""
    deltas = np.asarray(deltas, dtype=float)
    values = np.asarray(values, dtype=float)
    if deltas.shape != values.shape:
        raise ValueError("deltas and values differ in length")
    if deltas.size < 3:
        raise ValueError(f"power-law fit needs at least 3 points, got {deltas.size}")
    if np.any(deltas <= 0) or np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ValueError("power-law fit needs positive finite data")
    res = stats.linregress(np.log(deltas), np.log(values))
    r2 = float(res.rvalue**2) if np.isfinite(res.rvalue) else 1.0
    return PowerLawFit(c=float(np.exp(res.intercept)), kappa=float(res.slope),
                       r_squared=min(max(r2, 0.0), 1.0), n_points=int(deltas.size))


def regime_from_exponent(exponent, threshold=REGIME_THRESHOLD):
    """Classify the exponent of ``delta^2/alpha`` in ``delta``."""
    if exponent > threshold:
        return "vanishing"
    if exponent < -threshold:
        return "diverging"
    return "constant"


def regime_from_kappa_alpha(kappa_alpha, threshold=REGIME_THRESHOLD):
    return regime_from_exponent(2.0 - kappa_alpha, threshold)


def successful(records):
    return [r for r in records if r.ok]


def classify_regime(records, threshold=REGIME_THRESHOLD):
    """Regime of ``delta^2/alpha`` as ``delta -> 0``: vanishing, constant or diverging."""
    ok = successful(records)
    if len(ok) < 4:
        raise ValueError(f"insufficient records for regime classification ({len(ok)} < 4)")
    fit = fit_power_law([r.delta_abs for r in ok], [r.delta_sq_over_alpha for r in ok])
    return regime_from_exponent(fit.kappa, threshold)


@dataclass
class StudySummary:
    label: str
    n_ok: int
    n_failed: int
    c_x: float
    kappa_x: float
    r2_x: float
    c_alpha: float
    kappa_alpha: float
    r2_alpha: float
    regime: str
    estimated_p: Optional[float]

    def as_dict(self):
        return asdict(self)


def summarize(records, label="", a=1.0):
    """Fit error and ``alpha`` against ``delta`` and classify the regime."""
    ok = successful(records)
    if len(ok) < 4:
        raise ValueError(f"insufficient records: {len(ok)} successful, need 4")
    d = [r.delta_abs for r in ok]
    fx = fit_power_law(d, [r.error_X for r in ok])
    fa = fit_power_law(d, [r.alpha for r in ok])
    try:
        p = estimate_p_from_rate(fx.kappa, a)
    except ValueError:
        p = None
    return StudySummary(
        label=label, n_ok=len(ok), n_failed=len(records) - len(ok),
        c_x=fx.c, kappa_x=fx.kappa, r2_x=fx.r_squared,
        c_alpha=fa.c, kappa_alpha=fa.kappa, r2_alpha=fa.r_squared,
        regime=classify_regime(ok), estimated_p=p,
    )


RECORD_FIELDS = [f.name for f in fields(RateStudyRecord)]
_INT_FIELDS = {"iterations", "seed"}


class RecordFormatError(ValueError):
    pass


def _format(value):
    return repr(value) if isinstance(value, float) else str(value)


def write_records(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for rec in records:
            writer.writerow([_format(getattr(rec, name)) for name in RECORD_FIELDS])


def read_records(path):
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORD_FIELDS:
            raise RecordFormatError(f"{path}: line 1: expected header {','.join(RECORD_FIELDS)}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(RECORD_FIELDS):
                raise RecordFormatError(
                    f"{path}: line {line}: expected {len(RECORD_FIELDS)} columns, got {len(row)}")
            values = {}
            try:
                for name, raw in zip(RECORD_FIELDS, row):
                    if name == "status":
                        values[name] = raw
                    elif name in _INT_FIELDS:
                        values[name] = int(raw)
                    else:
                        values[name] = float(raw)
            except ValueError as exc:
                raise RecordFormatError(f"{path}: line {line}: {exc}") from None
            records.append(RateStudyRecord(**values))
    return records


def is_interior_minimum(values, min_excess=0.25):
    """True if the minimum of ``values`` is interior and the last value exceeds it by ``min_excess``."""
    values = np.asarray(values, dtype=float)
    k = int(np.argmin(values))
    return 0 < k < values.size - 1 and values[-1] >= (1.0 + min_excess) * values[k]


def nondecreasing_with_slack(values, slack=0.1):
    """Check ``v[i+1] >= (1 - slack) * max(v[:i+1])`` along the sequence."""
    running = -math.inf
    for v in values:
        if v < (1.0 - slack) * running:
            return False
        running = max(running, v)
    return True
