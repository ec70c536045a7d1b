"""``ladsolve`` command line.

Exit codes: 0 success, 1 argument or validation error, 2 solver infeasible,
3 I/O or travel-provider failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .exact import ExactSolver, InfeasibleError
from .experiments import generate_scenario, group_scenario, parse_fleet_sizes, run_bench, summarize
from .geo import TravelError, make_travel_model
from .greedy import GreedySolver
from .lpexport import export_lp
from .model import (ScenarioError, config_hash, dumps_scenario, load_scenario, save_scenario, save_solution,
                    solution_to_dict)
from .segments import precompute_segments

logger = logging.getLogger("ladsolve")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3

GLOBAL_DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "travel": "euclidean",
    "matrix": None,
    "endpoint": None,
    "circuity": 1.3,
    "speed": 40.0,
    "verbose": False,
}

COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "gen": {"n_customers": 500, "n_vehicles": 50, "box_km": 20.0, "type_mix": "1,1,1", "out": None},
    "group": {"max_size": 10, "n_groups": None, "out": None},
    "solve": {"algo": "greedy", "out": None, "time_limit": 300.0, "allow_reload": False,
              "branch_limit": 4},
    "export-lp": {"out": None},
    "bench": {"fleet": "10:100:10", "algo": "greedy", "out": "report.csv", "time_limit": 300.0,
              "branch_limit": 4, "no_timing": False, "jobs": 1},
    "report": {"out": None},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which means "infeasible" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return n


def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _add_globals(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=S, help="random seed (default 0)")
    g.add_argument("--travel", choices=["euclidean", "matrix", "http"], default=S,
                   help="travel provider (default euclidean)")
    g.add_argument("--matrix", default=S, help="distance/duration CSV for --travel matrix")
    g.add_argument("--endpoint", default=S, help="table service URL for --travel http")
    g.add_argument("--circuity", type=_positive_float, default=S, help="road/straight-line ratio (default 1.3)")
    g.add_argument("--speed", type=_positive_float, default=S, help="vehicle speed in km/h (default 40)")
    g.add_argument("--config", default=S, help="JSON file with option defaults")
    g.add_argument("-v", "--verbose", action="store_true", default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="ladsolve", description="Assign drone delivery groups to private autonomous vehicles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random scenario")
    _add_globals(p)
    p.add_argument("--customers", dest="n_customers", type=_positive_int, default=S)
    p.add_argument("--vehicles", dest="n_vehicles", type=_positive_int, default=S)
    p.add_argument("--box-km", dest="box_km", type=_positive_float, default=S)
    p.add_argument("--type-mix", dest="type_mix", default=S, help="weights of types 1,2,3, e.g. 0,0,1")
    p.add_argument("-o", "--out", default=S, help="output path (default stdout)")

    p = sub.add_parser("group", help="partition customers into drone groups")
    _add_globals(p)
    p.add_argument("scenario")
    p.add_argument("--max-size", dest="max_size", type=_positive_int, default=S)
    p.add_argument("--groups", dest="n_groups", type=_positive_int, default=S, help="target number of groups")
    p.add_argument("-o", "--out", default=S, help="output path (default: overwrite input)")

    p = sub.add_parser("solve", help="solve one scenario")
    _add_globals(p)
    p.add_argument("scenario")
    p.add_argument("--algo", choices=["exact", "greedy"], default=S)
    p.add_argument("-o", "--out", default=S, help="solution JSON path (default stdout)")
    p.add_argument("--time-limit", dest="time_limit", type=_positive_float, default=S)
    p.add_argument("--allow-reload", dest="allow_reload", action="store_true", default=S)
    p.add_argument("--branch-limit", dest="branch_limit", type=_positive_int, default=S)

    p = sub.add_parser("export-lp", help="write the MILP model in LP format")
    _add_globals(p)
    p.add_argument("scenario")
    p.add_argument("-o", "--out", default=S)

    p = sub.add_parser("bench", help="fleet-size sweep over scenarios")
    _add_globals(p)
    p.add_argument("scenarios", nargs="+")
    p.add_argument("--fleet", default=S, help="start:stop:step (inclusive) or a comma list")
    p.add_argument("--algo", default=S, help="greedy, exact or greedy,exact")
    p.add_argument("-o", "--out", default=S)
    p.add_argument("--time-limit", dest="time_limit", type=_positive_float, default=S)
    p.add_argument("--branch-limit", dest="branch_limit", type=_positive_int, default=S)
    p.add_argument("--no-timing", dest="no_timing", action="store_true", default=S,
                   help="leave runtime_s empty so reruns are byte-identical")
    p.add_argument("--jobs", type=_positive_int, default=S)

    p = sub.add_parser("report", help="summarize a bench CSV per algorithm and fleet size")
    _add_globals(p)
    p.add_argument("csv")
    p.add_argument("-o", "--out", default=S)
    return parser


def _load_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    return doc


def resolve_options(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from ``--config`` and then from the built-in defaults."""
    config = _load_config(args.config) if getattr(args, "config", None) else {}
    known = {**GLOBAL_DEFAULTS, **COMMAND_DEFAULTS[args.command]}
    unknown = sorted(set(config) - known.keys())
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    for key, default in known.items():
        if not hasattr(args, key):
            setattr(args, key, config.get(key, default))
    args.config_used = config
    return args


def _travel(args):
    if args.travel == "matrix" and not args.matrix:
        raise UsageError("--travel matrix needs --matrix PATH")
    if args.travel == "http" and not args.endpoint:
        raise UsageError("--travel http needs --endpoint URL")
    return make_travel_model(args.travel, args.circuity, args.speed, args.matrix, args.endpoint)


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _provenance(args, extra: dict) -> dict:
    options = {k: getattr(args, k) for k in (*GLOBAL_DEFAULTS, *COMMAND_DEFAULTS[args.command]) if k != "verbose"}
    return {"tool": "ladsolve", "version": __version__, "command": args.command,
            "config_hash": config_hash(options), **options, **extra}


def cmd_gen(args) -> int:
    try:
        mix = [float(x) for x in str(args.type_mix).split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --type-mix {args.type_mix!r}") from exc
    s = generate_scenario(int(args.n_customers), int(args.n_vehicles), float(args.box_km), mix, int(args.seed))
    _write_text(dumps_scenario(s), args.out)
    return EXIT_OK


def cmd_group(args) -> int:
    s = load_scenario(args.scenario)
    grouped = group_scenario(s, int(args.max_size), args.n_groups, int(args.seed))
    save_scenario(grouped, args.out or args.scenario)
    logger.info("wrote %d groups", len(grouped.groups))
    return EXIT_OK


def _grouped(path: str, seed: int):
    s = load_scenario(path)
    if not s.groups:
        logger.info("%s has no groups; grouping with defaults", path)
        s = group_scenario(s, seed=seed)
    return s


def cmd_solve(args) -> int:
    s = _grouped(args.scenario, int(args.seed))
    travel = _travel(args)
    cache = precompute_segments(s, travel)
    t0 = time.perf_counter()
    if args.algo == "exact":
        sol = ExactSolver(time_limit_s=float(args.time_limit), allow_reload=bool(args.allow_reload)).fit(
            s, cache).solution_
    else:
        sol = GreedySolver(branch_limit=args.branch_limit).fit(s, cache).solution_
    runtime = time.perf_counter() - t0
    if sol.uncovered:
        logger.warning("%d groups left uncovered", len(sol.uncovered))
    doc = _provenance(args, {"scenario": str(args.scenario), "runtime_s": runtime})
    if args.out is None:
        sys.stdout.write(json.dumps(solution_to_dict(sol, doc), indent=2) + "\n")
    else:
        save_solution(sol, args.out, doc)
    return EXIT_OK


def cmd_export_lp(args) -> int:
    s = _grouped(args.scenario, int(args.seed))
    cache = precompute_segments(s, _travel(args))
    out = args.out or str(Path(args.scenario).with_suffix(".lp"))
    export_lp(s, cache, out)
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        fleets = parse_fleet_sizes(str(args.fleet))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    algos = [a.strip() for a in str(args.algo).split(",") if a.strip()]
    bad = [a for a in algos if a not in ("exact", "greedy")]
    if bad or not algos:
        raise UsageError(f"--algo must list exact and/or greedy, got {args.algo!r}")
    for path in args.scenarios:
        if not Path(path).is_file():
            raise FileNotFoundError(path)
    results = run_bench(args.scenarios, fleets, algos, args.out, _travel(args), float(args.time_limit),
                        args.branch_limit, timing=not args.no_timing, jobs=int(args.jobs))
    invalid = sum(1 for r in results if r.problems)
    if invalid:
        logger.error("%d rows failed the constraint re-check", invalid)
    logger.info("wrote %d rows to %s", len(results), args.out)
    return EXIT_OK


def _cell(x) -> str:
    if isinstance(x, float):
        return "" if math.isnan(x) else f"{x:.3f}"
    return str(x)


def cmd_report(args) -> int:
    with open(args.csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    summary = summarize(rows)
    cols = ["algorithm", "fleet_size", "rows", "ok", "total_cost", "savings", "per_vehicle_profit",
            "completion_time_s", "runtime_s"]
    lines = [",".join(cols)]
    for r in summary:
        lines.append(",".join(_cell(r[c]) for c in cols))
    _write_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "group": cmd_group, "solve": cmd_solve, "export-lp": cmd_export_lp,
            "bench": cmd_bench, "report": cmd_report}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args = resolve_options(args)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except (UsageError, ScenarioError, ValueError) as exc:
        print(f"ladsolve: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"ladsolve: infeasible ({exc.kind}): {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, TravelError) as exc:
        print(f"ladsolve: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
