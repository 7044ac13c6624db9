"""Command-line front end.

Exit codes: 0 when every checked formula holds, 1 when one fails, 2 on any
input or resource error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

from kmc.ctl import CheckOutcome, check
from kmc.errors import KmcError, SourceError, StateLimitExceeded
from kmc.graph import DEFAULT_STATE_LIMIT, StateGraph, build_state_graph
from kmc.lang import format_model, parse_model
from kmc.model import ModelDef
from kmc.scenario import scenario_text

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
LIMIT_ENV = "KMC_STATE_LIMIT"


@dataclass
class RunReport:
    model_path: str
    state_count: int
    edge_count: int
    build_millis: int
    outcomes: list[CheckOutcome] = field(default_factory=list)

    @property
    def exit_status(self) -> int:
        return EXIT_OK if all(o.verdict for o in self.outcomes) else EXIT_FAIL


class UsageError(KmcError):
    pass


def _limit(arg: Optional[int]) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(LIMIT_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{LIMIT_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_STATE_LIMIT


def _load(path: str) -> ModelDef:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    return parse_model(text)


def _build(m: ModelDef, limit: int) -> StateGraph:
    if limit <= 0:
        raise UsageError("state limit must be positive")
    return build_state_graph(m, limit)


def check_model(path: str, formulas: Sequence[str] = (), limit: Optional[int] = None
                ) -> tuple[RunReport, StateGraph]:
    m = _load(path)
    names = list(formulas) or [f.name for f in m.formulas]
    known = {f.name for f in m.formulas}
    missing = [n for n in names if n not in known]
    if missing:
        raise UsageError(f"no formula named {', '.join(missing)}")
    g = _build(m, _limit(limit))
    report = RunReport(path, g.n_states, g.n_edges, int(round(g.build_seconds * 1000)))
    for name in names:
        report.outcomes.append(check(g, m.formula(name), name))
    return report, g


def report_json(report: RunReport, g: StateGraph) -> dict:
    formulas = []
    for o in report.outcomes:
        trace = None
        if o.counterexample is not None:
            trace = [g.state(i).as_dict() for i in o.counterexample.states]
        formulas.append({"name": o.name, "verdict": o.verdict, "sat_count": o.sat_count,
                         "trace": trace})
    return {"states": report.state_count, "edges": report.edge_count,
            "build_ms": report.build_millis, "formulas": formulas}


def _render_check(report: RunReport, out: TextIO) -> None:
    out.write(f"model: {report.model_path}\n")
    out.write(f"states: {report.state_count}  edges: {report.edge_count}  "
              f"build: {report.build_millis} ms\n")
    width = max((len(o.name) for o in report.outcomes), default=4)
    for o in report.outcomes:
        line = f"{o.name:<{width}}  {'TRUE' if o.verdict else 'FALSE':<5}  sat={o.sat_count}"
        if not o.verdict:
            if o.counterexample is not None:
                line += f"  counterexample: {len(o.counterexample)} states"
            else:
                line += "  counterexample: unsupported fragment"
        out.write(line + "\n")
    failed = sum(not o.verdict for o in report.outcomes)
    out.write(f"{len(report.outcomes) - failed} hold, {failed} fail\n")


def render_trace(g: StateGraph, outcome: CheckOutcome, out: TextIO) -> None:
    trace = outcome.counterexample
    prev = None
    for step, idx in enumerate(trace.states):
        tag = ""
        if step == trace.violation:
            tag = "  <- violation"
        elif step > trace.violation:
            tag = "  <- witness successor"
        out.write(f"{step}. state #{idx}{tag}\n")
        cur = g.state(idx).as_dict()
        for k, v in cur.items():
            mark = "*" if prev is not None and prev[k] != v else " "
            out.write(f"   {mark} {k} = {v}\n")
        prev = cur


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kmc", description="Explicit-state CTL model checker.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="check formulas of a model file")
    c.add_argument("file")
    c.add_argument("--json", action="store_true", help="write one JSON report to stdout")
    c.add_argument("--limit", type=int, help=f"state limit (default {DEFAULT_STATE_LIMIT}, or ${LIMIT_ENV})")
    c.add_argument("--formula", action="append", default=[], metavar="NAME")
    r = sub.add_parser("reach", help="build the state graph and print its size")
    r.add_argument("file")
    r.add_argument("--limit", type=int)
    e = sub.add_parser("explain", help="print a counterexample trace")
    e.add_argument("file")
    e.add_argument("--formula", required=True, metavar="NAME")
    e.add_argument("--limit", type=int)
    f = sub.add_parser("fmt", help="print the canonical form of a model file")
    f.add_argument("file")
    sub.add_parser("scenario", help="print the bundled USV scenario")
    return p


def run(argv: Optional[Sequence[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        if args.command == "scenario":
            out.write(scenario_text())
            return EXIT_OK
        if args.command == "fmt":
            out.write(format_model(_load(args.file)))
            return EXIT_OK
        if args.command == "reach":
            g = _build(_load(args.file), _limit(args.limit))
            out.write(f"states: {g.n_states}\nedges: {g.n_edges}\n")
            return EXIT_OK
        if args.command == "explain":
            report, g = check_model(args.file, [args.formula], args.limit)
            o = report.outcomes[0]
            if o.verdict:
                out.write(f"{o.name} holds; there is no counterexample\n")
            elif o.counterexample is None:
                out.write(f"{o.name} fails: unsupported fragment\n")
            else:
                out.write(f"{o.name} fails; counterexample of {len(o.counterexample)} states\n")
                render_trace(g, o, out)
            return EXIT_OK
        report, g = check_model(args.file, args.formula, args.limit)
        if args.json:
            out.write(json.dumps(report_json(report, g), indent=2) + "\n")
        else:
            _render_check(report, out)
        return report.exit_status
    except SourceError as exc:
        err.write(f"{args.file}:{exc}\n" if exc.span else f"{args.file}: {exc}\n")
        return EXIT_ERROR
    except (StateLimitExceeded, KmcError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
