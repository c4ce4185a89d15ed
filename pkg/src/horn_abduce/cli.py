"""Command-line front end.

Exit codes: 0 optimal (or valid), 2 timeout, 3 infeasible, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

from . import __version__
from .asp_export import VARIANTS, ExportError, emit_program
from .grounder import (DEFAULT_POT_LIMIT, GroundingError, SkolemPolicy, acyclic_subtheory,
                       ground_potential_graph, grounding_stats)
from .ingest import ParseError, SolutionFormatError, parse_instance, parse_solution, render_solution, solution_to_dict
from .objectives import OBJECTIVES
from .solver import INFEASIBLE, OPTIMAL, TIMEOUT, OracleLimit, SolveOptions, brute_force, solve, verify

EXIT_OK, EXIT_ERROR, EXIT_TIMEOUT, EXIT_INFEASIBLE = 0, 1, 2, 3
_EXIT = {OPTIMAL: EXIT_OK, TIMEOUT: EXIT_TIMEOUT, INFEASIBLE: EXIT_INFEASIBLE}

BENCH_COLUMNS = ["instance", "objective", "policy", "status", "cost", "time",
                 "pot_count", "skolem_count", "nodes_explored", "nogoods_learned", "incumbent_updates"]


@dataclass
class RunReport:
    status: str
    cost: Optional[int] = None
    wall_time_ms: int = 0
    stats: dict = field(default_factory=dict)

    def to_dict(self):
        return dataclasses.asdict(self)


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_instance(args):
    inst = parse_instance(_read(args.instance))
    if getattr(args, "constraints", "on") == "off":
        inst = dataclasses.replace(inst, nogoods=(), unique_slots=())
    return inst


def _policy(args):
    return SkolemPolicy.parse(args.skolem, args.skolem_naming)


def run_solve(instance, objective, policy, lazy=True, time_limit=None, pot_limit=DEFAULT_POT_LIMIT):
    """Ground, solve and summarize; returns (SolveResult, RunReport)."""
    t0 = time.monotonic()
    graph = ground_potential_graph(instance, policy, pot_limit)
    res = solve(instance, graph, objective, SolveOptions(lazy=lazy, time_limit=time_limit))
    report = RunReport(
        status=res.status,
        cost=res.cost,
        wall_time_ms=int(round((time.monotonic() - t0) * 1000)),
        stats={
            "pot_count": len(graph.pot),
            "skolem_count": graph.skolem_count,
            "nodes_explored": res.stats.get("nodes", 0),
            "nogoods_learned": res.stats.get("learned_nogoods", 0),
            "incumbent_updates": res.stats.get("incumbents", 0),
        },
    )
    return res, report


def cmd_solve(args):
    inst = _load_instance(args)
    res, report = run_solve(inst, args.objective, _policy(args), args.lazy == "on",
                            args.time_limit, args.pot_limit)
    if args.format == "json":
        doc = {"report": report.to_dict(),
               "solution": None if res.solution is None else solution_to_dict(res.solution)}
        _write(json.dumps(doc, indent=2), args.output)
    else:
        lines = ["status: %s" % report.status]
        if report.cost is not None:
            lines.append("cost: %d" % report.cost)
        lines.append("time: %d ms" % report.wall_time_ms)
        lines += ["%s: %s" % kv for kv in report.stats.items()]
        if res.solution is not None:
            sol = res.solution
            lines.append("abduced: %s" % ", ".join(str(a) for a in sorted(sol.abduced)))
            for head, inf in sorted(sol.inferred.items()):
                lines.append("inferred: %s via %s" % (head, inf.axiom_id))
            for src, dst in sorted(sol.factored.items()):
                lines.append("factored: %s -> %s" % (src, dst))
            for cls in sol.eq.classes():
                lines.append("eq: %s" % " ~ ".join(str(t) for t in cls))
        _write("\n".join(lines), args.output)
    return _EXIT[res.status]


def cmd_ground(args):
    inst = _load_instance(args)
    g = ground_potential_graph(inst, _policy(args), args.pot_limit)
    if args.stats:
        _write(json.dumps(grounding_stats(g), indent=2), args.output)
    else:
        _write(g.to_json(), args.output)
    return EXIT_OK


def cmd_export(args):
    inst = _load_instance(args)
    _write(emit_program(inst, args.encoding, args.objective, args.constraints == "on"), args.output)
    return EXIT_OK


def cmd_verify(args):
    inst = _load_instance(args)
    sol = parse_solution(_read(args.solution))
    res = verify(inst, sol, args.objective, policy=_policy(args))
    if args.format == "json":
        _write(json.dumps(dataclasses.asdict(res), indent=2), args.output)
    else:
        _write(str(res), args.output)
    return EXIT_OK if res.valid else EXIT_ERROR


def cmd_oracle(args):
    inst = _load_instance(args)
    g = ground_potential_graph(inst, _policy(args), args.pot_limit)
    cost, sols = brute_force(inst, g, args.objective, args.factoring,
                             max_pot=args.max_pot, max_terms=args.max_terms)
    doc = {"status": OPTIMAL if cost is not None else INFEASIBLE, "cost": cost, "optima": len(sols),
           "solution": solution_to_dict(sols[0]) if sols else None}
    if args.format == "json":
        _write(json.dumps(doc, indent=2), args.output)
    else:
        text = "status: %s\ncost: %s\noptima: %d" % (doc["status"], cost, len(sols))
        if sols:
            text += "\n" + render_solution(sols[0])
        _write(text, args.output)
    return EXIT_OK if cost is not None else EXIT_INFEASIBLE


def _bench_one(job):
    path, objective, policy_text, lazy, time_limit, pot_limit = job
    row = {"instance": os.path.basename(path), "objective": objective, "policy": policy_text}
    try:
        inst = parse_instance(_read(path))
        policy = SkolemPolicy.parse(policy_text)
        if policy.unlimited:
            inst = acyclic_subtheory(inst)
        res, report = run_solve(inst, objective, policy, lazy, time_limit, pot_limit)
        row.update(status=report.status, cost="" if report.cost is None else report.cost,
                   time="%.3f" % (report.wall_time_ms / 1000.0), **report.stats)
    except (GroundingError, ParseError, ValueError) as exc:
        row.update(status="error: %s" % exc)
    return row


def cmd_bench(args):
    jobs = [(p, o, pol, args.lazy == "on", args.time_limit, args.pot_limit)
            for p in args.instances for o in args.objectives.split(",") for pol in args.policies.split(",")]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="", encoding="utf-8")
    try:
        w = csv.DictWriter(out, BENCH_COLUMNS, restval="", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _common(p, objective=True):
    p.add_argument("-i", "--instance", required=True, help="instance file ('-' for stdin)")
    p.add_argument("-o", "--output", help="write output here instead of stdout")
    if objective:
        p.add_argument("--objective", choices=OBJECTIVES, default="wa")
    p.add_argument("--constraints", choices=("on", "off"), default="on",
                   help="keep or drop the instance's nogoods and unique slots")


def _grounding(p):
    p.add_argument("--skolem", default="inf", help="inf, pN (parent depth) or gN (rule generations)")
    p.add_argument("--skolem-naming", choices=("structured", "flat"), default="structured")
    p.add_argument("--pot-limit", type=int, default=DEFAULT_POT_LIMIT)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="horn-abduce", description="Cost-based Horn abduction without unique names.")
    ap.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find an optimal explanation")
    _common(p)
    _grounding(p)
    p.add_argument("--lazy", choices=("on", "off"), default="on")
    p.add_argument("--time-limit", type=float, help="seconds")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ground", help="build the potential graph")
    _common(p, objective=False)
    _grounding(p)
    p.add_argument("--stats", action="store_true", help="print counts only")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("export-asp", help="print the ASP encoding")
    _common(p)
    p.add_argument("--encoding", choices=VARIANTS, default="bwda")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("verify", help="check a solution file")
    _common(p, objective=False)
    _grounding(p)
    p.add_argument("-s", "--solution", required=True)
    p.add_argument("--objective", choices=OBJECTIVES, help="defaults to the objective recorded in the solution")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive search on a small instance")
    _common(p)
    _grounding(p)
    p.add_argument("--factoring", choices=("bwda", "bwdg"), default="bwda")
    p.add_argument("--max-pot", type=int, default=12)
    p.add_argument("--max-terms", type=int, default=8)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="objective x policy matrix as CSV")
    p.add_argument("instances", nargs="+")
    p.add_argument("-o", "--output")
    p.add_argument("--objectives", default="card,coh,wa")
    p.add_argument("--policies", default="p1,p2,inf,g1,g2")
    p.add_argument("--lazy", choices=("on", "off"), default="on")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--pot-limit", type=int, default=DEFAULT_POT_LIMIT)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SolutionFormatError, GroundingError, ExportError, OracleLimit, ValueError, OSError) as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
