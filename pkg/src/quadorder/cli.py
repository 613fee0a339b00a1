"""Command-line front end.

Exit codes: 0 success / Certified, 1 Refuted, 2 Inconclusive or a failed
moment hypothesis, 64 usage errors, 65 unreadable or invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import measure as measure_mod
from .measure import Interval, MeasureError, from_rule, parse_interval
from .ordering import (
    Verdict,
    certify_s_convex_order,
    crossing_scan,
    incomparability_check,
)
from .rules import RuleError, make_rule, parse_rule, rule_to_dict, uniform_moment
from .sandwich import MomentHypothesisError, certify_sandwich, verify_corpus

EX_OK = 0
EX_REFUTED = 1
EX_INCONCLUSIVE = 2
EX_USAGE = 64
EX_DATAERR = 65

_EXIT_FOR_VERDICT = {Verdict.CERTIFIED: EX_OK, Verdict.REFUTED: EX_REFUTED, Verdict.INCONCLUSIVE: EX_INCONCLUSIVE}
PLOT_POINTS = 2048


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _g(x) -> str:
    return f"{float(x):.17g}"


def _add_common(p):
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--interval", default=None, help="a,b (default 0,1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quadorder", description="Quadrature rules and n-convex ordering of measures")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("rule", help="print nodes and weights of a rule")
    p.add_argument("--family", required=True,
                   choices=["gauss", "lobatto", "radau-left", "radau-right", "chebyshev3"])
    p.add_argument("--points", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("moments", help="moments of a measure against the uniform ones")
    p.add_argument("--measure", required=True)
    p.add_argument("--max-k", type=int, default=8)
    _add_common(p)

    p = sub.add_parser("crossings", help="sign changes of F_second - F_first")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--plot-data", metavar="CSV", default=None)
    _add_common(p)

    p = sub.add_parser("certify", help="certify s-convex ordering of two measures")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)

    p = sub.add_parser("sandwich", help="quadrature bounds for a moment-matched measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checks", type=int, default=50)
    _add_common(p)

    p = sub.add_parser("compare", help="comparability of two rules in the n-convex order")
    p.add_argument("--rule1", required=True, help="e.g. gauss:3, or a measure JSON file")
    p.add_argument("--rule2", required=True)
    p.add_argument("--order", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("verify-corpus", help="check the bounds on seeded random measures")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--functions", type=int, default=50)
    p.add_argument("--csv", metavar="FILE", default=None)
    _add_common(p)
    return parser


def _normalize_argv(argv):
    # "--interval -1,1" would otherwise be read as an unknown flag.
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--interval":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--interval={nxt}")
        else:
            out.append(tok)
    return out


def _interval(args) -> Interval:
    return parse_interval(args.interval) if args.interval else Interval(0.0, 1.0)


def _load(path, args):
    try:
        mu = measure_mod.load(path)
    except OSError as exc:
        raise MeasureError(f"cannot read {path}: {exc.strerror}") from exc
    if args.interval and parse_interval(args.interval) != mu.interval:
        raise MeasureError(f"{path} lives on {tuple(mu.interval)}, not on --interval {args.interval}")
    return mu


def _emit(out, args, payload, lines):
    if args.json:
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write("\n".join(lines) + "\n")


def cmd_rule(args, out):
    rule = make_rule(args.family, args.points, _interval(args))
    lines = [f"# {rule.label} on [{_g(rule.interval.a)}, {_g(rule.interval.b)}], exact to degree {rule.exactness_degree}"]
    lines += [f"{_g(x):>24} {_g(w):>24}" for x, w in zip(rule.nodes, rule.weights)]
    _emit(out, args, rule_to_dict(rule), lines)
    return EX_OK


def cmd_moments(args, out):
    mu = _load(args.measure, args)
    rows = []
    for k in range(args.max_k + 1):
        m, u = mu.moment(k), uniform_moment(mu.interval, k)
        rows.append({"k": k, "moment": m, "uniform": u, "difference": m - u})
    lines = [f"{'k':>3} {'moment':>24} {'uniform':>24} {'difference':>24}"]
    lines += [f"{r['k']:>3} {_g(r['moment']):>24} {_g(r['uniform']):>24} {_g(r['difference']):>24}" for r in rows]
    _emit(out, args, {"interval": list(mu.interval), "moments": rows}, lines)
    return EX_OK


def _write_plot_data(path, mu, nu, report):
    a, b = mu.interval
    xs = np.union1d(np.linspace(a, b, PLOT_POINTS), np.asarray(report.crossings, dtype=float))
    f1, f2 = mu.cdf(xs), nu.cdf(xs)
    marks = set(report.crossings)
    with open(path, "w") as fh:
        fh.write("x,F1,F2,diff,is_crossing\n")
        for x, u, v in zip(xs, f1, f2):
            fh.write(f"{_g(x)},{_g(u)},{_g(v)},{_g(v - u)},{int(float(x) in marks)}\n")


def cmd_crossings(args, out):
    mu, nu = _load(args.first, args), _load(args.second, args)
    report = crossing_scan(mu, nu)
    if args.plot_data:
        _write_plot_data(args.plot_data, mu, nu, report)
    lines = [f"crossings: {report.count}", f"initial sign of F_second - F_first: {report.initial_sign.value}"]
    lines += [f"  {_g(x)}" for x in report.crossings]
    _emit(out, args, report.to_dict(), lines)
    return EX_OK


def cmd_certify(args, out):
    mu, nu = _load(args.first, args), _load(args.second, args)
    cert = certify_s_convex_order(mu, nu, args.order, args.tol)
    lines = [f"verdict: {cert.verdict.value}"]
    if cert.certified and cert.crossing_report.identical:
        lines.append("direction: both (measures coincide)")
    else:
        lines.append(f"direction: {cert.direction.value}")
    lines.append(f"crossings ({cert.crossing_report.count}): " + " ".join(_g(x) for x in cert.crossing_report.crossings))
    lines.append("moment residuals: " + " ".join(f"{r:.3g}" for r in cert.moment_residuals))
    for w in cert.witnesses:
        lines.append(f"witness {w.function.describe()} refutes {w.refutes.value} by {w.violation:.3g}")
    lines.append(f"notes: {cert.notes}")
    _emit(out, args, cert.to_dict(), lines)
    return _EXIT_FOR_VERDICT[cert.verdict]


def cmd_sandwich(args, out):
    mu = _load(args.measure, args)
    res = certify_sandwich(mu, args.order, seed=args.seed, checks=args.checks)
    lines = [
        f"n = {res.n}: {res.lower_rule.label} <= mu <= {res.upper_rule.label}",
        f"lower certificate: {res.lower_certificate.verdict.value} ({res.lower_certificate.notes})",
        f"upper certificate: {res.upper_certificate.verdict.value} ({res.upper_certificate.notes})",
        f"spot checks (seed {res.seed}): {len(res.spot_checks)}, max relative violation "
        f"{res.max_relative_violation(mu.interval):.3g}",
    ]
    _emit(out, args, res.to_dict(), lines)
    return EX_OK if res.certified else EX_INCONCLUSIVE


def _rule_or_measure(text, args):
    if ":" in text or text.lower() == "chebyshev3":
        return from_rule(parse_rule(text, _interval(args)))
    return _load(text, args)


def cmd_compare(args, out):
    mu, nu = _rule_or_measure(args.rule1, args), _rule_or_measure(args.rule2, args)
    result = incomparability_check(mu, nu, args.order)
    payload = result.to_dict()
    lines = [result.describe()]
    if result.verdict.value == "NecessaryConditionsHold":
        cert = certify_s_convex_order(mu, nu, args.order)
        payload["certificate"] = cert.to_dict()
        lines.append(f"certificate: {cert.verdict.value} {cert.direction.value} ({cert.notes})")
    _emit(out, args, payload, lines)
    return EX_OK


def cmd_verify_corpus(args, out):
    interval = _interval(args)
    report = verify_corpus(args.order, args.count, args.seed, interval, args.functions)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    certified = sum(r.lower_verdict == "Certified" and r.upper_verdict == "Certified" for r in report.rows)
    lines = [
        f"order {report.n}, seed {report.seed}: {report.count} measures x {report.functions} functions",
        f"both bounds certified: {certified}/{report.count}",
        f"violations: {report.violations} (max relative {report.max_violation:.3g})",
    ]
    _emit(out, args, report.to_dict(), lines)
    return EX_OK if report.violations == 0 else EX_REFUTED


COMMANDS = {
    "rule": cmd_rule,
    "moments": cmd_moments,
    "crossings": cmd_crossings,
    "certify": cmd_certify,
    "sandwich": cmd_sandwich,
    "compare": cmd_compare,
    "verify-corpus": cmd_verify_corpus,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EX_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except MomentHypothesisError as exc:
        err.write(f"moment hypothesis fails: {exc}\n")
        return EX_INCONCLUSIVE
    except (MeasureError, RuleError) as exc:
        err.write(f"error: {exc}\n")
        return EX_DATAERR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
