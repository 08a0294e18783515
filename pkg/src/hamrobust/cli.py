"""Command-line front end: ``hamrobust {gen,verify,tour,oracle,match}``.

Every command prints one JSON report (keys sorted, so equal inputs give
byte-identical output) whose ``outcome`` field determines the exit code:

====  ==================  ==================================================
code  outcome             meaning
====  ==================  ==================================================
0     ``success``         the object was built, or the check passed
1     ``failure``         a validated negative or a structured step failure
2     ``input_error``     malformed files, flags or parameters
3     ``indeterminate``   a search budget ran out before a verdict
====  ==================  ==================================================

``HAMROBUST_THREADS`` caps the worker count.  It must be a positive integer;
every search currently runs in a single worker, which respects any cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections.abc import Callable, Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import HamRobustError, Indeterminate, InputError
from .generators import (
    PLANTED_SHAPES,
    build_extremal_gn,
    build_three_clique,
    random_regular,
    sample_planted,
)
from .graph_core import Graph, format_edge_list, read_edge_list, regular_degree
from .matching_engine import blossom_matching, konig_matching
from .oracles import check_dominating, find_hamilton, longest_cycle
from .path_system import (
    PathSystem,
    character_of,
    check_basic_connector,
    check_p123,
    check_two_balanced,
    check_v_tour,
)
from .robustness import (
    PartitionSpec,
    RobustParams,
    check_robust_partition,
    check_weak_robust_partition,
)
from .tour_builder import TOUR_CONTACT, hamiltonicity_pipeline

OUTCOME_CODES = {"success": 0, "failure": 1, "input_error": 2, "indeterminate": 3}

Report = dict[str, Any]


# ---------------------------------------------------------------------------
# file and flag helpers
# ---------------------------------------------------------------------------


def worker_cap(env: dict[str, str] | None = None) -> int:
    """The worker cap from ``HAMROBUST_THREADS`` (default 1)."""
    raw = (os.environ if env is None else env).get("HAMROBUST_THREADS")
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"HAMROBUST_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"HAMROBUST_THREADS must be a positive integer, got {raw!r}")
    return value


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None


def _read_graph(path: str) -> Graph:
    try:
        return read_edge_list(path)
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from None


def _read_spec(path: str, args: argparse.Namespace | None = None) -> PartitionSpec:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: a partition spec must be a JSON object")
    spec = PartitionSpec.from_json({"params": {"rho": 0.01, "nu": 0.01, "tau": 0.01}, **data})
    if args is not None and any(getattr(args, k, None) is not None for k in ("rho", "nu", "tau", "eta")):
        p = spec.params
        spec = spec.with_params(
            RobustParams(
                args.rho if args.rho is not None else p.rho,
                args.nu if args.nu is not None else p.nu,
                args.tau if args.tau is not None else p.tau,
                args.eta if args.eta is not None else p.eta,
                ordered=p.ordered,
            )
        )
    return spec


def _read_system(path: str) -> PathSystem:
    data = _read_json(path)
    if isinstance(data, dict) and "system" in data and isinstance(data["system"], dict):
        data = data["system"]
    if isinstance(data, list):
        data = {"edges": data}
    if not isinstance(data, dict):
        raise InputError(f"{path}: a path system must be a JSON object or edge list")
    return PathSystem.from_json(data)


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"{path}: cannot write: {exc.strerror}") from None


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _shape(text: str) -> tuple[int, int]:
    if len(text) != 2 or not text.isdigit():
        raise argparse.ArgumentTypeError(f"shape must be two digits such as 21, got {text!r}")
    return int(text[0]), int(text[1])


def _graph_summary(g: Graph) -> dict[str, Any]:
    return {"n": g.n, "m": g.m, "degree": regular_degree(g)}


def _emit_graph(report: Report, g: Graph, spec: PartitionSpec | None, args: argparse.Namespace) -> None:
    report["graph"] = _graph_summary(g)
    if args.graph_out:
        _write(args.graph_out, format_edge_list(g))
        report["graph"]["path"] = args.graph_out
    else:
        report["graph"]["edges"] = [list(e) for e in g.edges()]
    if spec is not None:
        if args.spec_out:
            _write(args.spec_out, json.dumps(spec.to_json(), sort_keys=True, indent=2) + "\n")
            report["spec_path"] = args.spec_out
        report["spec"] = spec.to_json()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> Report:
    report: Report = {"command": f"gen {args.family}", "outcome": "success"}
    spec = None
    if args.family == "extremal":
        g, desc = build_extremal_gn(args.n)
        report["descriptor"] = desc.to_json()
        spec = desc.natural_spec()
    elif args.family == "three-clique":
        g, desc = build_three_clique(args.k)
        report["descriptor"] = {"k": desc.k, "cut": [desc.a, desc.b]}
    elif args.family == "random":
        g = random_regular(args.n, args.degree, args.seed)
        report["seed"] = args.seed
    else:
        if args.shape not in PLANTED_SHAPES:
            raise InputError(f"planted shapes are {[f'{k}{l}' for k, l in PLANTED_SHAPES]}")
        g, spec, draw = sample_planted(args.shape, args.seed, (args.n_min, args.n_max))
        report["seed"] = args.seed
        report["draw"] = {k: v for k, v in sorted(draw.items()) if k != "cross_edges" or isinstance(v, int)}
    _emit_graph(report, g, spec, args)
    return report


def cmd_verify(args: argparse.Namespace) -> Report:
    g = _read_graph(args.graph)
    spec = _read_spec(args.spec, args)
    report: Report = {"command": f"verify {args.target}"}
    if args.target == "partition":
        kw = {"samples": args.samples, "seed": args.seed}
        check = check_weak_robust_partition if args.weak else check_robust_partition
        result = check(g, spec, **kw)
    else:
        p = _read_system(args.system)
        if args.kind == "v-tour":
            gamma = args.gamma if args.gamma is not None else Fraction(TOUR_CONTACT, g.n)
            result = check_v_tour(g, spec, p, gamma)
        elif args.kind == "basic-connector":
            result = check_basic_connector(g, spec, p)
        elif args.kind == "two-balanced":
            result = check_two_balanced(g, spec, p)
        else:
            d = regular_degree(g)
            if d is None:
                raise InputError("(P1)-(P3) are defined for regular graphs")
            if spec.shape != (2, 1):
                raise InputError(f"(P1)-(P3) need a (2,1) partition, got {spec.shape}")
            ((a, _b),) = spec.bipartite
            u = list(spec.expander[0]) + list(spec.expander[1])
            ch = character_of(g, a, u, Fraction(d, 2), args.eps)
            report["character"] = ch.to_json()
            result = check_p123(g, spec, p, ch)
        report["kind"] = args.kind
    report["validator_report"] = result.to_json()
    report["outcome"] = "success" if result.holds else "failure"
    return report


def cmd_tour(args: argparse.Namespace) -> Report:
    g = _read_graph(args.graph)
    spec = _read_spec(args.spec)
    if spec.shape != args.shape:
        raise InputError(f"--shape {args.shape[0]}{args.shape[1]} does not match the partition's shape {spec.shape}")
    result = hamiltonicity_pipeline(
        g,
        spec,
        complete=args.complete,
        check_hypotheses=not args.skip_hypotheses,
        refine=not args.no_refine,
        budget=args.budget,
    )
    body = result.to_json()
    status = body.pop("outcome")
    ok = status in ("hamilton_cycle", "validated_system")
    return {"command": "tour", "outcome": "success" if ok else "failure", "status": status, **body}


def cmd_oracle(args: argparse.Namespace) -> Report:
    g = _read_graph(args.graph)
    report: Report = {"command": f"oracle {args.find}", "budget": args.budget}
    if args.find == "hamilton":
        cycle = find_hamilton(g, args.budget)
    else:
        cycle = longest_cycle(g, args.budget)
    report["cycle"] = cycle
    report["length"] = 0 if cycle is None else len(cycle)
    if cycle is not None and args.check_dominating:
        report["dominating"] = check_dominating(g, cycle)
    found = cycle is not None and (not args.check_dominating or report["dominating"])
    report["outcome"] = "success" if found else "failure"
    return report


def cmd_match(args: argparse.Namespace) -> Report:
    g = _read_graph(args.graph)
    if args.delta is None:
        m = blossom_matching(g)
        kind = "maximum"
    else:
        m = konig_matching(g, args.delta)
        kind = "edge_count_bound"
    return {
        "command": "match",
        "outcome": "success",
        "kind": kind,
        "size": len(m),
        "matching": [list(e) for e in sorted(m)],
    }


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Argument errors become ``InputError`` so they share the JSON report path."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hamrobust", description=__doc__.splitlines()[0])
    parser.add_argument("--report", help="also write the JSON report to this file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate graphs")
    fam = gen.add_subparsers(dest="family", required=True, parser_class=_Parser)
    for name in ("extremal", "three-clique", "random", "planted"):
        p = fam.add_parser(name)
        p.add_argument("--graph-out", help="write the edge list here instead of into the report")
        p.add_argument("--spec-out", help="write the partition spec JSON here")
        if name == "extremal":
            p.add_argument("--n", type=int, required=True)
        elif name == "three-clique":
            p.add_argument("--k", type=int, required=True)
        elif name == "random":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--degree", type=int, required=True)
            p.add_argument("--seed", type=int, required=True)
        else:
            p.add_argument("--shape", type=_shape, required=True)
            p.add_argument("--seed", type=int, required=True)
            p.add_argument("--n-min", type=int, default=30)
            p.add_argument("--n-max", type=int, default=80)
    gen.set_defaults(run=cmd_gen)

    ver = sub.add_parser("verify", help="run a validator")
    target = ver.add_subparsers(dest="target", required=True, parser_class=_Parser)
    for name in ("partition", "path-system"):
        p = target.add_parser(name)
        p.add_argument("--graph", required=True)
        p.add_argument("--spec", required=True)
        for param in ("rho", "nu", "tau", "eta"):
            p.add_argument(f"--{param}", type=float)
        if name == "partition":
            p.add_argument("--weak", action="store_true", help="check the weak conditions")
            p.add_argument("--samples", type=int, default=4000)
            p.add_argument("--seed", type=int, default=0)
        else:
            p.add_argument("--system", required=True)
            p.add_argument("--kind", choices=["v-tour", "basic-connector", "two-balanced", "p123"], required=True)
            p.add_argument("--gamma", type=_fraction, help="contact parameter (default 33/n)")
            p.add_argument("--eps", type=_fraction, default=Fraction(1, 4))
    ver.set_defaults(run=cmd_verify)

    tour = sub.add_parser("tour", help="run the builder for a partition shape")
    tour.add_argument("--shape", type=_shape, required=True, choices=[(4, 0), (0, 2), (2, 1)], metavar="{40,02,21}")
    tour.add_argument("--graph", required=True)
    tour.add_argument("--spec", required=True)
    tour.add_argument("--complete", action="store_true", help="complete to a Hamilton cycle (n <= 16)")
    tour.add_argument("--budget", type=int, help="node budget for the searches")
    tour.add_argument(
        "--skip-hypotheses", action="store_true", help="do not check regularity/connectivity/degree hypotheses"
    )
    tour.add_argument("--no-refine", action="store_true", help="use a (2,1) partition as given")
    tour.set_defaults(run=cmd_tour)

    orc = sub.add_parser("oracle", help="exhaustive cycle searches")
    orc.add_argument("--graph", required=True)
    orc.add_argument("--find", choices=["hamilton", "longest"], required=True)
    orc.add_argument("--check-dominating", action="store_true")
    orc.add_argument("--budget", type=int)
    orc.set_defaults(run=cmd_oracle)

    mat = sub.add_parser("match", help="matchings")
    mat.add_argument("--graph", required=True)
    mat.add_argument("--delta", type=int, help="bipartite graph: a matching of ceil(e/delta) edges")
    mat.set_defaults(run=cmd_match)
    return parser


def _failure_report(exc: HamRobustError, command: str | None) -> Report:
    if isinstance(exc, InputError):
        outcome = "input_error"
    elif isinstance(exc, Indeterminate):
        outcome = "indeterminate"
    else:
        outcome = "failure"
    return {"command": command, "outcome": outcome, "error": exc.to_json()}


def run(argv: Sequence[str] | None = None) -> tuple[int, Report, str | None]:
    """Parse ``argv``, run the command and return ``(exit code, report, report path)``."""
    command = None
    report_path = None
    try:
        worker_cap()
        args = build_parser().parse_args(argv)
        command, report_path = args.command, args.report
        runner: Callable[[argparse.Namespace], Report] = args.run
        report = runner(args)
    except HamRobustError as exc:
        report = _failure_report(exc, command)
    return OUTCOME_CODES[report["outcome"]], report, report_path


def main(argv: Sequence[str] | None = None) -> int:
    code, report, report_path = run(argv)
    text = json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"
    sys.stdout.write(text)
    if report_path:
        try:
            Path(report_path).write_text(text)
        except OSError as exc:
            sys.stderr.write(f"{report_path}: cannot write report: {exc.strerror}\n")
            return OUTCOME_CODES["input_error"]
    return code


if __name__ == "__main__":
    sys.exit(main())
