# The unmanned surface vehicle scenario: energy tables, state space, verdicts.
# Building the graph takes a few seconds and under a gigabyte of memory.

# %%
import time

import numpy as np

from kmc import build_state_graph, check
from kmc.scenario import (
    CONS_CONDITIONS,
    BehaviorClass,
    build_usv_model,
    consumption_amount,
    expected_verdicts,
)

# consumption per behaviour class and consumption condition
print({cls.name: [consumption_amount(cls, c) for c in CONS_CONDITIONS] for cls in BehaviorClass})

# %%
m = build_usv_model()
print([a.name for a in m.agents])

# %%
t0 = time.perf_counter()
g = build_state_graph(m)
print(f"{g.n_states} states, {g.n_edges} edges, {time.perf_counter() - t0:.1f} s")

# %%
# battery bookkeeping holds on every edge
lv, gen, cons = (g.column(q).astype(int) for q in ("Battery.level", "GenModule.amount", "ConsModule.amount"))
src, dst = g.succ_src, g.succ_idx
assert np.array_equal(lv[dst], np.clip(lv[src] + gen[src] + cons[src], 0, 10))

# %%
expected = expected_verdicts()
for f in m.formulas:
    out = check(g, f.formula, f.name)
    tag = "" if out.verdict == expected[f.name] else "  (unexpected)"
    print(f"{f.name:<8} {out.verdict!s:<5} sat={out.sat_count}{tag}")

# %%
# F4 fails because a full battery with surplus generation prefers high speed
out = check(g, m.formula("F4"), "F4")
*_, before, after = (g.state(i).as_dict() for i in out.counterexample.states)
print({k: before[k] for k in ("USV.state", "Battery.level", "GenModule.amount", "ConsModule.amount")}, after["USV.state"])
