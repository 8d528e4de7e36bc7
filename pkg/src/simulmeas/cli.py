"""Command line entry point.

    simulmeas check <scenario> [--seed N] [--tol T] [--format text|structured]
    simulmeas sample <scenario> --n 100000
    simulmeas epr --theta 0,pi/3,pi/2,pi --n 100000

``<scenario>`` is a path to a JSON scenario or the name of a shipped fixture
(cnot_luders, swap_counter, epr_singlet, theorem2_random).
"""

from __future__ import annotations

import argparse
import math
import re
import sys

from .report import EXIT_LOAD, emit_report
from .sampling import epr_demo
from .scenario import CheckResult, ScenarioError, load_scenario, run_checks, run_samples

_PI = re.compile(r"^([-+]?\d*\.?\d*)\*?pi(?:/(\d+\.?\d*))?$")


def parse_angle(text: str) -> float:
    """A real number or a multiple of pi such as ``pi/3``, ``2pi/3``, ``-0.5*pi``."""
    text = text.strip().replace(" ", "")
    m = _PI.match(text)
    if m:
        coef = m.group(1)
        coef = 1.0 if coef in ("", "+") else (-1.0 if coef == "-" else float(coef))
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    return float(text)


def parse_angles(text: str) -> list[float]:
    return [parse_angle(t) for t in text.split(",") if t.strip()]


def _global_flags(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--seed", type=int, default=default,
                   help="override the scenario seed (epr: sampling seed, default 0)")
    p.add_argument("--tol", type=float, default=default, help="override eq_tol")
    p.add_argument("--format", choices=("text", "structured"), default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulmeas",
                                     description="Verify quantum measurement models.")
    _global_flags(parser, None)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_check = sub.add_parser("check", help="run the analytic checks of a scenario")
    p_check.add_argument("scenario")
    _global_flags(p_check, argparse.SUPPRESS)

    p_sample = sub.add_parser("sample", help="Monte Carlo sampling of consecutive measurements")
    p_sample.add_argument("scenario")
    p_sample.add_argument("--n", type=int, default=100_000)
    _global_flags(p_sample, argparse.SUPPRESS)

    p_epr = sub.add_parser("epr", help="singlet correlations from local measurement models")
    p_epr.add_argument("--theta", type=parse_angles, default=parse_angles("0,pi/3,pi/2,pi"))
    p_epr.add_argument("--n", type=int, default=100_000)
    _global_flags(p_epr, argparse.SUPPRESS)
    return parser


def _epr_results(thetas, n, seed) -> list[CheckResult]:
    rep = epr_demo(thetas, n, seed)
    out = []
    for i, row in enumerate(rep.rows):
        dev = abs(row.sampled_correlation - row.correlation)
        if dev <= 1e-12:
            z = 0.0
        else:
            z = dev / row.standard_error if row.standard_error > 0 else math.inf
        ok = (row.cos_residual <= 1e-9 and row.order_residual <= 1e-10
              and row.formula_residual <= 1e-10 and row.sampled_ok)
        out.append(CheckResult(
            f"epr{i}", "epr", "pass" if ok else "fail",
            {"cos": row.cos_residual, "order": row.order_residual,
             "formula": row.formula_residual, "sampled_z": z},
            1e-9,
            f"theta={row.theta:.6g} E={row.correlation:.6f} sampled={row.sampled_correlation:.6f}"
            f"+-{row.standard_error:.2g}",
            {"theta": row.theta, "correlation": row.correlation,
             "sampled_correlation": row.sampled_correlation,
             "standard_error": row.standard_error,
             "exact": [{"a": a, "b": b, "p": p} for (a, b), p in sorted(row.exact.items())],
             "counts": [{"a": a, "b": b, "count": c} for (a, b), c in sorted(row.counts.items())]},
        ))
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or "text"
    try:
        if args.verb == "epr":
            seed = 0 if args.seed is None else args.seed
            results = _epr_results(args.theta, args.n, seed)
            header = {"verb": "epr", "seed": seed, "n": args.n}
        else:
            sc = load_scenario(args.scenario, args.tol)
            if args.seed is not None:
                sc.seed = args.seed
            header = {"verb": args.verb, "scenario": sc.name, "seed": sc.seed}
            if args.verb == "check":
                results = run_checks(sc)
            else:
                if args.n < 1:
                    raise ScenarioError("--n must be at least 1")
                header["n"] = args.n
                results = run_samples(sc, args.n)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    text, code = emit_report(results, fmt, header)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
