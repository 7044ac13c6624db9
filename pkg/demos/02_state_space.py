# Synchronous composition and breadth-first reachability.

# %%
import numpy as np

from kmc import build_state_graph, enabled_moves, initial_states, parse_model, successors

m = parse_model("""
agent Gen  { var amount : 0..2 init 1; rule true -> amount := 0; rule true -> amount := 2; }
agent Load { var amount : -2..0 init 0; rule true -> amount := -1; rule true -> amount := -2; }
agent Bat  {
  var level : 0..5 init 5;
  rule true -> level := clamp(level + Gen.amount + Load.amount, 0, 5);
}
""")
(s0,) = initial_states(m)
print(s0.as_dict())

# %%
# each agent proposes moves; a step picks one move per agent
print({a.name: sorted(enabled_moves(a, s0)) for a in m.agents})

# %%
# every right-hand side reads the pre-state: Bat uses the old Gen/Load values
print(sorted(t.values for t in successors(m, s0)))

# %%
g = build_state_graph(m)
print(g.n_states, g.n_edges)

# %%
# states are rows of natural values in discovery order
print(g.values[:6])

# %%
# stutter keeps the relation total, and pred is the transpose of succ
assert (np.diff(g.succ_ptr) >= 1).all()
print([list(g.pred(i)) for i in range(3)])
