"""Acceptance criteria, one pass/fail line each.

Run under pytest (lines are echoed in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import functools
import json
import os
import random
import subprocess
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kmc import ctl, eval_expr, format_model, normalize, parse_model, sat, successors  # noqa: E402
from kmc import expr as ex  # noqa: E402
from kmc.model import make_state  # noqa: E402
from kmc.scenario import BehaviorClass, consumption_amount, expected_verdicts  # noqa: E402

from helpers import ACCEPTANCE_LINES, naive_sat, random_formula, random_graph, random_model, random_propositional  # noqa: E402

# published energy consumption table, rows LECB/MECB/HECB
TABLE_I = {
    ("LECB", "LECC"): 0, ("LECB", "MECC"): -1, ("LECB", "HECC"): -2,
    ("MECB", "LECC"): -1, ("MECB", "MECC"): -2, ("MECB", "HECC"): -3,
    ("HECB", "LECC"): -2, ("HECB", "MECC"): -3, ("HECB", "HECC"): -4,
}
PUBLISHED_STATE_COUNT = 209286
TIME_BUDGET = 60.0
RANDOM_GRAPHS = 200
FORMULAS_PER_GRAPH = 5
GENERATED_MODELS = 50


def scenario_path() -> str:
    return str(resources.files("kmc.data").joinpath("usv_scenario.kmc"))


def cli(*args: str):
    env = {k: v for k, v in os.environ.items() if k != "KMC_STATE_LIMIT"}
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "kmc", *args], capture_output=True, text=True, env=env)
    return proc, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def scenario_check():
    proc, secs = cli("check", scenario_path(), "--json")
    return proc.returncode, json.loads(proc.stdout), secs


@functools.lru_cache(maxsize=None)
def scenario_model():
    return parse_model(Path(scenario_path()).read_text(encoding="utf-8"))


# -- criteria -----------------------------------------------------------------

def verdict_table():
    code, doc, secs = scenario_check()
    got = {f["name"]: f["verdict"] for f in doc["formulas"]}
    ok = got == expected_verdicts() and code == 1 and secs < TIME_BUDGET
    failing = sorted(n for n, v in got.items() if not v)
    return ok, f"{sum(got[n] == v for n, v in expected_verdicts().items())}/15 verdicts match, " \
               f"FALSE = {failing}, exit {code}, {secs:.1f} s (budget {TIME_BUDGET:.0f} s)"


def f4_counterexample():
    _, doc, _ = scenario_check()
    m = scenario_model()
    trace = next(f["trace"] for f in doc["formulas"] if f["name"] == "F4")
    states = [make_state(m, s) for s in trace]
    valid = states[0] == make_state(m) and all(b in successors(m, a) for a, b in zip(states, states[1:]))
    f4 = m.formula("F4")
    premise = _as_expr(f4.arg.left)
    last, witness = states[-2], states[-1]
    battery = last["Battery", "level"]
    surplus = last["GenModule", "amount"] > -last["ConsModule", "amount"]
    ok = (valid and eval_expr(premise, last) and battery > 8 and surplus
          and witness["USV", "state"] == "PFH")
    return ok, f"{len(trace)} states, valid path {valid}; violating step has Battery={battery}, " \
               f"Gen={last['GenModule', 'amount']}, Cons={last['ConsModule', 'amount']}, " \
               f"next USV={witness['USV', 'state']}"


def _as_expr(f):
    """Conjunction of atoms back to one boolean expression."""
    if isinstance(f, ctl.Atom):
        return f.expr
    return ex.BoolOp("and", _as_expr(f.left), _as_expr(f.right))


def battery_arithmetic(g):
    lv = g.column("Battery.level").astype(np.int64)
    gen = g.column("GenModule.amount").astype(np.int64)
    cons = g.column("ConsModule.amount").astype(np.int64)
    src, dst = g.succ_src, g.succ_idx
    bad = int((lv[dst] != np.clip(lv[src] + gen[src] + cons[src], 0, 10)).sum())
    m = g.model
    (rule,) = m.agent("Battery").rules
    rhs = rule.assignments[0][1]
    spot = eval_expr(rhs, make_state(m, {"Battery.level": 5, "GenModule.amount": 1, "ConsModule.amount": -2}))
    return bad == 0 and spot == 4, f"{g.n_edges} edges checked, {bad} mismatches; (5, +1, -2) -> {spot}"


def table_one():
    cells = {(c, k): consumption_amount(BehaviorClass[c], k) for c, k in TABLE_I}
    zero = [consumption_amount(BehaviorClass.ZERO, k) for k in ("LECC", "MECC", "HECC")]
    wrong = [key for key, v in TABLE_I.items() if cells[key] != v]
    return not wrong and zero == [0, 0, 0], f"9 cells, {len(wrong)} wrong; ZERO row {zero}"


def random_corpus(seed=2024):
    rng = random.Random(seed)
    return [(rng, *random_graph(rng)) for _ in range(RANDOM_GRAPHS)]


def oracle_equivalence():
    mismatches = checks = 0
    for rng, g, states, succ in random_corpus():
        for _ in range(FORMULAS_PER_GRAPH):
            f = random_formula(rng, 4)
            got = set(np.flatnonzero(sat(g, normalize(f))).tolist())
            mismatches += got != naive_sat(states, succ, f)
            checks += 1
    return mismatches == 0, f"{RANDOM_GRAPHS} graphs x {FORMULAS_PER_GRAPH} formulas = {checks} checks, " \
                            f"{mismatches} mismatches"


def dualities():
    bad = 0
    for rng, g, _, _ in random_corpus():
        p = random_propositional(rng, 3)
        everything = np.ones(g.n_states, dtype=bool)
        ag = sat(g, normalize(ctl.AG(p)))
        ef = sat(g, normalize(ctl.EF(ctl.Not(p))))
        af = sat(g, normalize(ctl.AF(p)))
        eg = sat(g, normalize(ctl.EG(ctl.Not(p))))
        bad += not np.array_equal(ag, everything & ~ef)
        bad += not np.array_equal(af, everything & ~eg)
    return bad == 0, f"{2 * RANDOM_GRAPHS} identities (AG/EF, AF/EG), {bad} violated"


def parser_round_trip():
    texts = [Path(scenario_path()).read_text(encoding="utf-8")]
    texts += [format_model(random_model(seed)) for seed in range(GENERATED_MODELS)]
    broken = 0
    for text in texts:
        first = parse_model(text)
        broken += parse_model(format_model(first)) != first
    return broken == 0, f"{len(texts)} models (scenario + {GENERATED_MODELS} generated), {broken} not fixed points"


def state_count():
    runs = [cli("reach", scenario_path()) for _ in range(2)]
    outs = [p.stdout for p, _ in runs]
    ok = all(p.returncode == 0 for p, _ in runs) and outs[0] == outs[1] and outs[0].startswith("states: ")
    count = outs[0].split()[1] if ok else "?"
    return ok, f"reach printed {count} states in both runs (published count about {PUBLISHED_STATE_COUNT}; " \
               "reference only)"


CRITERIA = [
    ("verdict table", verdict_table),
    ("F4 counterexample", f4_counterexample),
    ("battery arithmetic", battery_arithmetic),
    ("Table I", table_one),
    ("CTL oracle equivalence", oracle_equivalence),
    ("dualities", dualities),
    ("parser round-trip", parser_round_trip),
    ("state-count reporting", state_count),
]


def record(name, result):
    ok, detail = result
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


# -- pytest entry points ------------------------------------------------------

def test_verdict_table():
    assert record("verdict table", verdict_table())


def test_f4_counterexample():
    assert record("F4 counterexample", f4_counterexample())


def test_battery_arithmetic(usv_graph):
    assert record("battery arithmetic", battery_arithmetic(usv_graph))


def test_table_one():
    assert record("Table I", table_one())


def test_oracle_equivalence():
    assert record("CTL oracle equivalence", oracle_equivalence())


def test_dualities():
    assert record("dualities", dualities())


def test_parser_round_trip():
    assert record("parser round-trip", parser_round_trip())


@pytest.mark.slow
def test_state_count():
    assert record("state-count reporting", state_count())


def main() -> int:
    from kmc import build_state_graph

    failed = 0
    graph = None
    for name, fn in CRITERIA:
        if fn is battery_arithmetic:
            graph = graph or build_state_graph(scenario_model())
            result = fn(graph)
        else:
            result = fn()
        failed += not record(name, result)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
