"""Command line: ``hsreg study NAME [flags]`` and ``hsreg fit RECORDS.csv``.

Exit codes: 0 on success, 1 if an embedded check of a study failed,
2 for usage errors and 3 for errors raised while running.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from .experiments import read_records, summarize
from .studies import STUDIES, StudyConfig, format_summary, run_study, write_outputs, write_summaries

OUT_ENV = "HSREG_OUTPUT_DIR"
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ERROR = 3

log = logging.getLogger("hsreg")


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}")


def read_config(path):
    """Parse a plain-text ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="hsreg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="run a named case study")
    st.add_argument("name", choices=sorted(STUDIES))
    st.add_argument("--config", type=Path, help="key=value file; explicit flags win")
    st.add_argument("--noise-levels", dest="noise_levels", type=_floats,
                    help="relative noise levels, e.g. 1e-1,1e-2,1e-3,1e-4")
    st.add_argument("--seed", type=int)
    st.add_argument("--N", dest="n", type=int, help="number of grid points")
    st.add_argument("--C", dest="C", type=float, help="discrepancy multiplier")
    st.add_argument("--s", dest="s_values", type=_floats, help="Sobolev indices")
    st.add_argument("--rs", type=_ints, help="reference solutions 1..5")
    st.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./results)")
    st.add_argument("--jobs", type=int, help="parallel noise levels (default 1)")

    fit = sub.add_parser("fit", help="refit stored records without re-solving")
    fit.add_argument("path", type=Path)
    fit.add_argument("--a", type=float, default=1.0, help="smoothing of the operator (default 1)")
    fit.add_argument("--out", type=Path, help="also write summary.csv/summary.jsonl here")
    return parser


_CONFIG_TYPES = {
    "noise_levels": _floats, "seed": int, "n": int, "N": int, "C": float,
    "s": _floats, "s_values": _floats, "rs": _ints, "out": Path, "jobs": int,
}
_CONFIG_ALIASES = {"N": "n", "s": "s_values"}


def study_config(args):
    merged = {}
    if args.config is not None:
        for key, raw in read_config(args.config).items():
            if key not in _CONFIG_TYPES:
                raise UsageError(f"{args.config}: unknown key {key!r}")
            try:
                merged[_CONFIG_ALIASES.get(key, key)] = _CONFIG_TYPES[key](raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{args.config}: bad value for {key}: {exc}")
    for key in ("noise_levels", "seed", "n", "C", "s_values", "rs", "out", "jobs"):
        value = getattr(args, key)
        if value is not None:
            merged[key] = value

    cfg = StudyConfig(name=args.name)
    if "noise_levels" in merged:
        levels = merged.pop("noise_levels")
        if len(levels) < 4 or min(levels) <= 0:
            raise UsageError("--noise-levels needs at least 4 positive values")
        cfg.levels = levels
    for key, value in merged.items():
        setattr(cfg, key, value)
    if "out" not in merged:
        cfg.out = Path(os.environ.get(OUT_ENV, "results")) / args.name
    if cfg.n < 4:
        raise UsageError("--N must be at least 4")
    if cfg.rs and not set(cfg.rs) <= {1, 2, 3, 4, 5}:
        raise UsageError("--rs takes indices from 1 to 5")
    if cfg.jobs is None or cfg.jobs < 1:
        raise UsageError("--jobs must be a positive integer")
    return cfg


def cmd_study(args):
    cfg = study_config(args)
    outcome = run_study(cfg)
    write_outputs(outcome, cfg.out)
    if outcome.summaries:
        print(format_summary(outcome.summaries))
    for label, rows in outcome.tables.items():
        print(f"\n{label}")
        print(f"{'delta':>10}{'error_X':>10}{'error_-a':>10}{'penalty':>10}{'error_p':>10}  (ratios)")
        for r in rows:
            print(f"{r['delta']:>10.0e}{r['error_X_ratio']:>10.4f}{r['error_minus_a_ratio']:>10.4f}"
                  f"{r['penalty_ratio']:>10.4f}{r['error_p_ratio']:>10.4f}  {'pass' if r['passed'] else 'FAIL'}")
    print()
    for c in outcome.checks:
        print(f"[{'pass' if c.passed else 'FAIL'}] {c.name}" + (f"  ({c.detail})" if c.detail else ""))
    print(f"\noutputs written to {cfg.out}")
    return 0 if outcome.passed else EXIT_CHECK_FAILED


def cmd_fit(args):
    records = read_records(args.path)
    label = args.path.stem.removeprefix("records_")
    summary = summarize(records, label, a=args.a)
    print(format_summary([summary]))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_summaries([summary], args.out)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "study":
            return cmd_study(args)
        return cmd_fit(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hsreg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"hsreg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
