# Shortest counterexamples for AG(p), AG(p -> q) and AG(p -> AX q).

# %%
import io

from kmc import build_state_graph, check, parse_model
from kmc.cli import render_trace

m = parse_model("""
agent Tank {
  var level : 0..4 init 0;
  rule level < 4 -> level := level + 1;
  rule level > 0 -> level := level - 1;
}
agent Valve {
  var open : {no, yes} init no;
  rule Tank.level >= 3 -> open := yes;
  rule Tank.level < 2 -> open := no;
}

formula never_full := AG(Tank.level < 4);
formula opens_in_time := AG(Tank.level = 3 -> AX(Valve.open = yes));
formula stays_open := AG(Valve.open = yes -> AX(Valve.open = yes));
""")
g = build_state_graph(m)

# %%
# breadth-first search from the initial state gives a shortest path
out = check(g, m.formula("never_full"), "never_full")
print(out.verdict, out.counterexample)

# %%
# AX shapes append one successor that breaks the target
for name in ("opens_in_time", "stays_open"):
    out = check(g, m.formula(name), name)
    buf = io.StringIO()
    if out.counterexample is not None:
        render_trace(g, out, buf)
    print(name, out.verdict)
    print(buf.getvalue())
