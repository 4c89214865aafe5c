"""Command-line interface.

Exit codes: 0 success, 1 contract or numerical failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import expr as ex
from .axioms import check_fap, check_hull_membership, check_markov
from .config import load_config
from .errors import ConfigError, MVQError, ParseError
from .integrate import mean_vector
from .pipeline import QuadratureRule, synthesize, verify

EXIT_OK, EXIT_CONTRACT, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mvquad", description="Shared-weight quadrature rules from mean value decompositions.")
    p.add_argument("-v", "--verbose", action="store_true", help="log pipeline progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synthesize", help="build a rule with at most n (or n+1) nodes")
    s.add_argument("--config", required=True)
    s.add_argument("--output", help="write the rule here instead of stdout")
    s.add_argument("--trace", action="store_true", help="emit per-round JSON lines on stderr")
    s.add_argument("--unnormalized", action="store_true", help="weights sum to mu(S) instead of 1")

    v = sub.add_parser("verify", help="re-verify a saved rule against its config")
    v.add_argument("--config", required=True)
    v.add_argument("--rule", required=True)

    i = sub.add_parser("integrate", help="print the mean vector E X")
    i.add_argument("--config", required=True)

    c = sub.add_parser("check", help="run a property check")
    c.add_argument("--config", required=True)
    c.add_argument("--property", required=True, choices=["markov", "fap", "hull"])
    c.add_argument("--epsilon", type=float, action="append",
                   help="markov thresholds (repeatable; default 0.1 0.5 1 2)")
    c.add_argument("--trials", type=int, default=200, help="fap trial count")
    return p


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _emit(obj, output=None):
    text = _dump(obj) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_synthesize(args) -> int:
    cfg = load_config(args.config)
    if args.unnormalized:
        cfg = cfg.with_unnormalized()
    rule = synthesize(cfg, trace=args.trace)
    if args.trace:
        for rec in rule.trace:
            sys.stderr.write(json.dumps(rec) + "\n")
    _emit(rule.to_json(), args.output)
    if not rule.meets(cfg.tolerance):
        sys.stderr.write(f"residual {rule.residual:.3e} exceeds tolerance {cfg.tolerance:.3e}\n")
        return EXIT_CONTRACT
    return EXIT_OK


def _cmd_verify(args) -> int:
    cfg = load_config(args.config)
    try:
        data = json.loads(Path(args.rule).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read rule {args.rule}: {exc}") from exc
    rule = QuadratureRule.from_json(data)
    if abs(rule.total_mass - 1.0) > 1e-12 and not cfg.unnormalized:
        cfg = cfg.with_unnormalized()
    report = verify(rule, cfg)
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_CONTRACT


def _cmd_integrate(args) -> int:
    cfg = load_config(args.config)
    mv = mean_vector(cfg.fns, cfg.measure, cfg.tolerance)
    _emit({
        "target": mv.values.tolist(),
        "error_estimate": mv.error_estimate.tolist(),
        "function_evals": int(mv.function_evals),
        "total_mass": float(mv.total_mass),
    })
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    if args.property == "markov":
        eps = args.epsilon or [0.1, 0.5, 1.0, 2.0]
        reports = []
        for f in cfg.functions:
            try:
                reports.append(check_markov(f.expr, cfg.measure, eps, min(cfg.tolerance, 1e-10)))
            except ValueError as exc:
                raise ConfigError(f"{f.source}: {exc}") from exc
        out = reports[0].to_json() if len(reports) == 1 else {
            "property_name": "markov", "passed": all(r.passed for r in reports),
            "reports": [r.to_json() for r in reports]}
        passed = all(r.passed for r in reports)
    elif args.property == "fap":
        try:
            report = check_fap(cfg.measure, args.trials, cfg.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        out, passed = report.to_json(), report.passed
    else:
        report = check_hull_membership(cfg.fns, cfg.measure, cfg.tolerance, cfg.resolution)
        out, passed = report.to_json(), report.passed
    _emit(out)
    return EXIT_OK if passed else EXIT_CONTRACT


_COMMANDS = {
    "synthesize": _cmd_synthesize,
    "verify": _cmd_verify,
    "integrate": _cmd_integrate,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        src = f" in {exc.source!r}" if exc.source else ""
        sys.stderr.write(f"parse error{src}: {exc.message} (position {exc.position})\n")
        return EXIT_USAGE
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_USAGE
    except MVQError as exc:
        stage = getattr(exc, "stage", None)
        sys.stderr.write(f"failed{f' in stage {stage}' if stage else ''}: {exc}\n")
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
