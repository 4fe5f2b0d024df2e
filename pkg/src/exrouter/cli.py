"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 engine failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import fermion, planner, runner, verify
from .errors import ExrouterError, NoPeak, ValidationError
from .network import Mode, NetworkSpec, check

EXIT_OK, EXIT_USAGE, EXIT_ENGINE = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _add_run_flags(p):
    p.add_argument("--config", help="JSON run config or bare network document")
    p.add_argument("--nw", type=int, help="wire length")
    p.add_argument("--j", type=float, help="intra-wire coupling")
    p.add_argument("--js", type=float, help="sender coupling")
    p.add_argument("--jr", type=float, help="target receiver coupling")
    p.add_argument("--j0", type=float, help="weak block-to-wire coupling")
    p.add_argument("--contact", type=int, help="target receiver contact point (1..n_w)")
    p.add_argument("--sender-contact", type=int)
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--target", type=int, help="index of the target receiver block")
    p.add_argument("--engine", choices=runner.ENGINES)
    p.add_argument("--t-max", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float, help="spin propagation tolerance")
    p.add_argument("-o", "--output", help="output CSV path (default: stdout)")
    p.add_argument("--json", dest="json_out", help="also write a JSON dump here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exrouter", description="Two-excitation routing through a quantum wire.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="routing table for a wire")
    p.add_argument("--nw", type=int, required=True)
    p.add_argument("--sender-contact", "-s", type=int, default=1)
    p.add_argument("-o", "--output", help="write JSON here (text table goes to stdout)")

    p = sub.add_parser("simulate", help="transfer probability versus time")
    _add_run_flags(p)

    p = sub.add_parser("sweep", help="peak transfer probability over a parameter")
    _add_run_flags(p)
    p.add_argument("--parameter", choices=runner.SWEEP_PARAMETERS)
    p.add_argument("--values", type=_float_list, help="comma-separated values")
    p.add_argument("--no-tie-jr", action="store_true",
                   help="J_s sweeps leave the receiver coupling unchanged")
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("verify", help="run oracle and invariant checks")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--config", help="also check unitarity on this network")
    p.add_argument("--report", help="write the JSON report here (default: stdout)")
    return parser


def _run_config(args) -> runner.RunConfig:
    if args.config:
        cfg = runner.RunConfig.load(args.config)
    elif args.nw is not None:
        cfg = runner.RunConfig(network=NetworkSpec(n_w=args.nw))
    else:
        raise ValidationError(["need --config or --nw"])
    spec = cfg.network
    overrides = {k: v for k, v in {
        "n_w": args.nw, "J": args.j, "J_s": args.js, "J0": args.j0,
        "sender_contact": args.sender_contact, "mode": args.mode,
    }.items() if v is not None}
    spec = replace(spec, **overrides)
    target = args.target if args.target is not None else cfg.target
    if args.contact is not None or args.jr is not None or not spec.receivers:
        J_r = args.jr if args.jr is not None else (None if spec.receivers else spec.J_s)
        spec = runner.retarget(spec, target, contact=args.contact, J_r=J_r)
    cfg = replace(cfg, network=spec, target=target)
    for field, value in (("engine", args.engine), ("t_max", args.t_max),
                         ("samples", args.samples), ("tol", args.tol), ("output", args.output)):
        if value is not None:
            cfg = replace(cfg, **{field: value})
    if getattr(args, "parameter", None) or getattr(args, "values", None) is not None:
        base = cfg.sweep or runner.Sweep(args.parameter or "contact", ())
        cfg = replace(cfg, sweep=runner.Sweep(
            args.parameter or base.parameter,
            tuple(args.values) if args.values is not None else base.values,
            base.tie_jr and not args.no_tie_jr,
        ))
    check(cfg.network)
    return cfg.check()


def _emit(text, path):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_plan(args) -> int:
    if args.nw < 2:
        raise ValidationError([f"--nw must be >= 2, got {args.nw}"])
    if not 1 <= args.sender_contact <= args.nw:
        raise ValidationError([f"--sender-contact must lie in 1..{args.nw}"])
    plan = planner.routing_table(args.nw, args.sender_contact)
    if args.output:
        Path(args.output).write_text(plan.to_json(indent=2) + "\n", encoding="utf-8")
    sys.stdout.write(plan.to_text())
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _run_config(args)
    series = runner.simulate(cfg.network, cfg.engine, cfg.times(), cfg.target, cfg.tol)
    _emit(series.to_csv(), cfg.output)
    if args.json_out:
        series.to_json(args.json_out)
    peak, t_peak = series.peak()
    summary = f"peak {peak:.6f} at t={t_peak:.6g}"
    try:
        first = fermion.first_peak(series)
        summary += f"; first peak >= 0.5 at t={first.t_peak:.6g}"
    except NoPeak:
        pass
    print(summary, file=sys.stdout if cfg.output else sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    if cfg.sweep is None:
        raise ValidationError(["sweep needs --parameter and --values (or a sweep in --config)"])
    rows = runner.run_sweep(cfg, args.threads)
    _emit(runner.sweep_csv(rows), cfg.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    extra = runner.RunConfig.load(args.config).network if args.config else None
    if extra is not None:
        check(extra)
    results = verify.run_checks(args.level, extra)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: measured={r.measured!r} tol={r.tolerance!r} ({r.seconds:.1f}s) {r.detail}",
              file=sys.stderr)
    report = {"level": args.level, "passed": all(r.passed for r in results),
              "checks": [r.to_dict() for r in results]}
    _emit(json.dumps(report, indent=2) + "\n", args.report)
    return EXIT_OK if report["passed"] else EXIT_ENGINE


COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"exrouter: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExrouterError as exc:
        print(f"exrouter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
