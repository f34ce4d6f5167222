"""Catalog of the named case studies run by the command line.

Each study returns a :class:`StudyOutcome`: the records per variant, the fit
summaries, optional solution snapshots and a list of named checks that
decide the exit code.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import grid
from .experiments import (DEFAULT_LEVELS, DiscrepancyRule, is_interior_minimum,
                          nondecreasing_with_slack, run_rate_study, successful,
                          summarize, write_records)
from .operators import Autoconvolution, ExpGrowth
from .parameter import DiscrepancyConfig
from .scales import build_basis
from .solutions import SolutionSpec, make_solution
from .tikhonov import HilbertScalePenalty, SobolevPenalty, verify_lemma_bounds

log = logging.getLogger(__name__)


@dataclass
class StudyConfig:
    name: str
    n: int = grid.DEFAULT_N
    levels: tuple = DEFAULT_LEVELS
    seed: int = 0
    C: float = None
    s_values: tuple = None
    rs: tuple = None
    out: Path = Path("results")
    jobs: int = 1


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class StudyOutcome:
    records: dict = field(default_factory=dict)
    summaries: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def check(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _bracket_check(outcome, C):
    bad = []
    for label, recs in outcome.records.items():
        for r in successful(recs):
            q = r.residual_Y / r.delta_abs
            if not 1.0 <= q <= C:
                bad.append(f"{label}@{r.rel_level:.3g}: {q:.4f}")
    outcome.check(f"discrepancy bracket residual/delta in [1, {C:g}]", not bad, "; ".join(bad))


def _sweep(cfg, operator, x_true, penalties, C, keep=False):
    outcome = StudyOutcome()
    rule = DiscrepancyRule(DiscrepancyConfig(C=C))
    for label, penalty in penalties:
        log.info("running %s", label)
        recs, xs = run_rate_study(operator, x_true, penalty, cfg.levels, rule,
                                  seed=cfg.seed, jobs=cfg.jobs, keep_solutions=True)
        outcome.records[label] = recs
        if keep:
            outcome.snapshots[label] = (sorted(cfg.levels, reverse=True), x_true, xs)
        try:
            outcome.summaries.append(summarize(recs, label))
        except ValueError as exc:
            outcome.check(f"{label}: fit", False, str(exc))
    _bracket_check(outcome, C)
    return outcome


def _summary(outcome, label):
    for s in outcome.summaries:
        if s.label == label:
            return s
    return None


def mp1_reference(cfg):
    C = cfg.C or 1.1
    kinds = [f"RS{k}" for k in (cfg.rs or (1, 2, 3, 4, 5))]
    outcome = StudyOutcome()
    operator = ExpGrowth(1.0)
    for kind in kinds:
        x_true = make_solution(SolutionSpec(kind, cfg.n))
        part = _sweep(cfg, operator, x_true, [(kind, HilbertScalePenalty())], C)
        outcome.records.update(part.records)
        outcome.summaries += part.summaries
        outcome.checks += part.checks
    for kind in kinds:
        s = _summary(outcome, kind)
        if s is None:
            continue
        p = s.estimated_p
        if kind == "RS5":
            outcome.check("RS5: kappa_alpha < 2", s.kappa_alpha < 2, f"{s.kappa_alpha:.4f}")
            outcome.check("RS5: estimated p > 1", p is not None and p > 1, f"{p}")
            outcome.check("RS5: kappa_x in [0.45, 0.78]", 0.45 <= s.kappa_x <= 0.78, f"{s.kappa_x:.4f}")
            outcome.check("RS5: regime vanishing", s.regime == "vanishing", s.regime)
        else:
            outcome.check(f"{kind}: kappa_alpha > 2", s.kappa_alpha > 2, f"{s.kappa_alpha:.4f}")
            outcome.check(f"{kind}: estimated p < 1", p is not None and p < 1, f"{p}")
        if kind == "RS1":
            outcome.check("RS1: estimated p <= 0.6", p is not None and p <= 0.6, f"{p}")
            pen = [r.penalty_norm for r in successful(outcome.records[kind])]
            outcome.check("RS1: penalty norm grows as delta decreases (10% slack)",
                          nondecreasing_with_slack(pen, 0.1), ", ".join(f"{v:.3g}" for v in pen))
    return outcome


def _sobolev_sweep(cfg, kind, default_C):
    C = cfg.C or default_C
    s_values = cfg.s_values or (0.1, 0.33, 0.9)
    x_true = make_solution(SolutionSpec(kind, cfg.n, p=1.0 / 3.0))
    penalties = [(f"s={s:g}", SobolevPenalty(s)) for s in s_values]
    return _sweep(cfg, ExpGrowth(1.0), x_true, penalties, C), s_values


def _expected_regimes(outcome, s_values, expected):
    for s in s_values:
        want = expected.get(round(s, 2))
        summary = _summary(outcome, f"s={s:g}")
        if want and summary:
            outcome.check(f"s={s:g}: regime {want}", summary.regime == want,
                          f"{summary.regime} (2 - kappa_alpha = {2 - summary.kappa_alpha:.3f})")


def mp1_sobolev_sweep(cfg):
    outcome, s_values = _sobolev_sweep(cfg, "fourier-power", 1.1)
    _expected_regimes(outcome, s_values, {0.1: "vanishing", 0.33: "constant", 0.9: "diverging"})
    kx = [s.kappa_x for s in outcome.summaries]
    if len(kx) > 1:
        outcome.check("kappa_x spread <= 0.08", max(kx) - min(kx) <= 0.08,
                      ", ".join(f"{k:.4f}" for k in kx))
    return outcome


def mp3_case_b(cfg):
    outcome, s_values = _sobolev_sweep(cfg, "fourier-log", 1.1)
    _expected_regimes(outcome, s_values, {0.1: "vanishing", 0.33: "constant", 0.9: "diverging"})
    for s in outcome.summaries:
        outcome.check(f"{s.label}: |kappa_x - 0.25| <= 0.08", abs(s.kappa_x - 0.25) <= 0.08,
                      f"{s.kappa_x:.4f}")
    by_s = {round(float(s.label[2:]), 2): s.kappa_alpha for s in outcome.summaries}
    if {0.1, 0.33, 0.9} <= set(by_s):
        ka = [by_s[0.1], by_s[0.33], by_s[0.9]]
        outcome.check("kappa_alpha ordered s=0.1 < 0.33 < 0.9", ka[0] < ka[1] < ka[2],
                      ", ".join(f"{k:.4f}" for k in ka))
        outcome.check("kappa_alpha(0.33) in [1.7, 2.2]", 1.7 <= ka[1] <= 2.2, f"{ka[1]:.4f}")
    return outcome


def mp2_pitfall(cfg):
    C = cfg.C or 1.3
    x_true = np.ones(cfg.n)
    operator = Autoconvolution()
    outcome = _sweep(cfg, operator, x_true, [("B", HilbertScalePenalty())], C, keep=True)
    ok = successful(outcome.records["B"])
    errs = [r.error_X for r in ok]
    outcome.check("B: error has interior minimum, last >= 1.25 * min",
                  len(ok) == len(outcome.records["B"]) and is_interior_minimum(errs, 0.25),
                  ", ".join(f"{e:.4g}" for e in errs))
    s_values = cfg.s_values or (0.1, 0.5)
    # zero extension: x = 1 on [0, 1] extended by zero lies in H^s only for s < 1/2
    penalties = [(f"s={s:g}", SobolevPenalty(s, extension="zero")) for s in s_values]
    part = _sweep(cfg, operator, x_true, penalties, C)
    outcome.records.update(part.records)
    outcome.summaries += part.summaries
    outcome.checks += part.checks
    summary = _summary(outcome, "s=0.5")
    if summary is not None:
        outcome.check("s=0.5: regime diverging", summary.regime == "diverging",
                      f"{summary.regime} (2 - kappa_alpha = {2 - summary.kappa_alpha:.3f})")
    return outcome


def spectral_power_solution(basis, p):
    """Grid function with coefficients ``(1 + 1/sigma_k)^(-p/2 - 1/4)`` in the ``J*J`` eigenbasis."""
    return basis.synthesize((1.0 + 1.0 / basis.sigma) ** (-0.5 * p - 0.25))


LEMMA_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4)


def lemma_verify(cfg):
    basis = build_basis(cfg.n)
    outcome = StudyOutcome()
    p, a = 1.0 / 3.0, 1.0
    cases = {
        "spectral-power": spectral_power_solution(basis, p),
        "single-mode": basis.vectors[:, 3].copy(),
        "zero": np.zeros(cfg.n),
    }
    for label, x_dag in cases.items():
        rows = verify_lemma_bounds(x_dag, p, a, LEMMA_DELTAS, basis)
        outcome.tables[label] = rows
        worst = max(max(r[k] for k in r if k.endswith("_ratio")) for r in rows)
        outcome.check(f"{label}: all four bounds hold", all(r["passed"] for r in rows),
                      f"max ratio {worst:.4f}")
    return outcome


STUDIES = {
    "mp1-reference": mp1_reference,
    "mp1-sobolev-sweep": mp1_sobolev_sweep,
    "mp2-pitfall": mp2_pitfall,
    "mp3-case-b": mp3_case_b,
    "lemma-verify": lemma_verify,
}


def run_study(cfg):
    try:
        study = STUDIES[cfg.name]
    except KeyError:
        raise ValueError(f"unknown study {cfg.name!r}; choose from {', '.join(STUDIES)}") from None
    return study(cfg)


SUMMARY_FIELDS = ["label", "n_ok", "n_failed", "c_x", "kappa_x", "r2_x",
                  "c_alpha", "kappa_alpha", "r2_alpha", "regime", "estimated_p"]


def _slug(label):
    return "".join(ch if ch.isalnum() or ch in ".-" else "_" for ch in label)


def write_outputs(outcome, out_dir):
    """Write records, fit summaries, snapshots and lemma tables below ``out_dir``."""
    import csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, recs in outcome.records.items():
        write_records(recs, out_dir / f"records_{_slug(label)}.csv")
    if outcome.summaries:
        write_summaries(outcome.summaries, out_dir)
    for label, (levels, x_true, xs) in outcome.snapshots.items():
        t = grid.nodes(len(x_true))
        cols = {"t": t, "x_true": x_true}
        for lvl, x in zip(levels, xs):
            if x is not None:
                cols[f"x_rel{lvl:.3e}"] = x
        with open(out_dir / f"snapshots_{_slug(label)}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in zip(*cols.values()):
                w.writerow([repr(float(v)) for v in row])
    for label, rows in outcome.tables.items():
        with open(out_dir / f"lemma_{_slug(label)}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    with open(out_dir / "checks.jsonl", "w") as fh:
        for c in outcome.checks:
            fh.write(json.dumps({"check": c.name, "passed": c.passed, "detail": c.detail}) + "\n")


def write_summaries(summaries, out_dir):
    import csv

    out_dir = Path(out_dir)
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_FIELDS)
        for s in summaries:
            w.writerow([_cell(getattr(s, k)) for k in SUMMARY_FIELDS])
    with open(out_dir / "summary.jsonl", "w") as fh:
        for s in summaries:
            fh.write(json.dumps({k: getattr(s, k) for k in SUMMARY_FIELDS}) + "\n")


def _cell(v):
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def format_summary(summaries):
    head = f"{'label':<14}{'ok':>4}{'c_x':>10}{'kappa_x':>10}{'c_alpha':>12}{'kappa_alpha':>13}{'est. p':>9}  regime"
    lines = [head, "-" * len(head)]
    for s in summaries:
        p = "-" if s.estimated_p is None or not math.isfinite(s.estimated_p) else f"{s.estimated_p:.4f}"
        lines.append(f"{s.label:<14}{s.n_ok:>4}{s.c_x:>10.4f}{s.kappa_x:>10.4f}"
                     f"{s.c_alpha:>12.4g}{s.kappa_alpha:>13.4f}{p:>9}  {s.regime}")
    return "\n".join(lines)
