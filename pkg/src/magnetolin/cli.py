"""Command line entry point.

Exit codes: 0 success, 1 failed checks, 2 solver non-convergence,
3 configuration or usage error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, Inadmissible
from .harness import (
    empirical_rate,
    hypothesis_check,
    linear_solve,
    liminf_check,
    recovery_gaps,
    recovery_initializer,
    report_json,
    rigidity_probe,
    rows_to_csv,
    run_sweep,
    state_dump,
)
from .optimize import minimize

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CONFIG = 3

log = logging.getLogger("magnetolin")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, "argv")


def _global_flags(suppress):
    # subcommand copies must not overwrite flags given before the subcommand
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--config", help="JSON run configuration", **kw)
    flags.add_argument("--out", help="output file (CSV or JSON depending on the command)", **kw)
    flags.add_argument("--seed", type=int, help="override the configured seed", **kw)
    flags.add_argument("--quiet", action="store_true", help="suppress progress logging", **kw)
    return flags


def build_parser():
    top = _global_flags(False)
    common = _global_flags(True)

    parser = _Parser(prog="magnetolin", description=__doc__.splitlines()[0], parents=[top])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sweep = sub.add_parser("sweep", parents=[common], help="eps sweep, CSV of records")
    sweep.add_argument("--parallel", action="store_true", help="independent cold starts in parallel")
    mini = sub.add_parser("minimize", parents=[common], help="minimize at one eps")
    mini.add_argument("--eps", type=float, required=True)
    sub.add_parser("linear", parents=[common], help="minimize the limit functional")
    rec = sub.add_parser("recovery", parents=[common], help="recovery-sequence gap at eps")
    rec.add_argument("--eps", type=float, required=True)
    sub.add_parser("rigidity", parents=[common], help="rigidity ratio statistics")
    sub.add_parser("check", parents=[common], help="stored-energy hypothesis suite")
    return parser


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_json(payload, out):
    _emit(json.dumps(payload, indent=2, default=float), out)


def _cmd_sweep(cfg, args):
    result = run_sweep(cfg, parallel=args.parallel)
    _emit(result.csv_text(), args.out or cfg.output)
    log.info("empirical gap rate %.3f, liminf check %s", empirical_rate(result.records),
             liminf_check(result.records, cfg.grid.n))
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _limit_minimizer(cfg, problem):
    s = cfg.solver
    return minimize(problem, problem.initial_state(), 0.0, s.tol, s.max_iter, s.memory)


def _cmd_minimize(cfg, args):
    if not args.eps >= 0:
        raise ConfigError("must be nonnegative", "--eps")
    problem = cfg.build_problem()
    s = cfg.solver
    state, report, stats = minimize(problem, problem.initial_state(), args.eps, s.tol, s.max_iter, s.memory)
    _emit_json(state_dump(problem.grid, state, args.eps, report, stats), args.out or cfg.output)
    return EXIT_OK if stats.converged else EXIT_NO_CONVERGENCE


def _cmd_linear(cfg, args):
    problem = cfg.build_problem()
    state, report, stats = _limit_minimizer(cfg, problem)
    direct = linear_solve(problem, state.phi)
    dump = state_dump(problem.grid, state, 0.0, report, stats)
    dump["direct_solve_max_diff"] = float(abs(direct - state.u).max())
    _emit_json(dump, args.out or cfg.output)
    return EXIT_OK if stats.converged else EXIT_NO_CONVERGENCE


def _cmd_recovery(cfg, args):
    if not args.eps > 0:
        raise ConfigError("must be positive", "--eps")
    problem = cfg.build_problem()
    state, report, stats = _limit_minimizer(cfg, problem)
    try:
        rec = recovery_initializer(state, args.eps, problem.grid)
    except Inadmissible as err:
        log.error("%s", err)
        return EXIT_FAILED
    eps_values = [args.eps / 2**k for k in range(4)]
    payload = {
        "eps": args.eps,
        "limit_energy": report.total,
        "recovery_energy": problem.energy(rec, args.eps).total,
        "halving": recovery_gaps(problem, state, eps_values, with_loads=True),
        "limit_solver": {"status": stats.status, "iterations": stats.iterations},
    }
    payload["gap"] = abs(payload["recovery_energy"] - payload["limit_energy"])
    _emit_json(payload, args.out or cfg.output)
    return EXIT_OK if stats.converged else EXIT_NO_CONVERGENCE


def _cmd_rigidity(cfg, args):
    r = cfg.rigidity
    rows, summary = rigidity_probe(r.n, r.p, r.samples, cfg.seed, r.amplitude, r.modes)
    out = args.out or cfg.output
    if out:
        Path(out).write_text(rows_to_csv(rows))
    _emit_json(summary, None)
    return EXIT_OK if summary["all_finite"] else EXIT_FAILED


def _cmd_check(cfg, args):
    report = hypothesis_check(cfg.build_model(), cfg.check.samples, cfg.seed)
    _emit(report_json(report), args.out or cfg.output)
    return EXIT_OK if report["passed"] else EXIT_FAILED


COMMANDS = {
    "sweep": _cmd_sweep,
    "minimize": _cmd_minimize,
    "linear": _cmd_linear,
    "recovery": _cmd_recovery,
    "rigidity": _cmd_rigidity,
    "check": _cmd_check,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.WARNING if args.quiet else logging.INFO,
            format="%(levelname)s %(message)s",
            stream=sys.stderr,
        )
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("must be nonnegative", "--seed")
            cfg = cfg.model_copy(update={"seed": args.seed})
        return COMMANDS[args.command](cfg, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
