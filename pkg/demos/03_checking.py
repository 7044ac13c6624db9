# CTL by fixpoint labelling on a small mutual exclusion protocol.

# %%
from kmc import build_state_graph, check, format_formula, normalize, parse_model, sat

m = parse_model("""
agent P {
  var pc : {idle, wait, crit} init idle;
  rule pc = idle -> pc := wait;
  rule pc = wait and Q.pc != crit and Turn.who = p -> pc := crit;
  rule pc = crit -> pc := idle;
  rule pc = idle -> pc := idle;
}
agent Q {
  var pc : {idle, wait, crit} init idle;
  rule pc = idle -> pc := wait;
  rule pc = wait and P.pc != crit and Turn.who = q -> pc := crit;
  rule pc = crit -> pc := idle;
  rule pc = idle -> pc := idle;
}
agent Turn {
  var who : {p, q} init p;
  rule P.pc = crit -> who := q;
  rule Q.pc = crit -> who := p;
}

formula exclusion := AG(not (P.pc = crit and Q.pc = crit));
formula p_can_enter := AG(P.pc = wait -> EF(P.pc = crit));
formula p_must_enter := AG(P.pc = wait -> AF(P.pc = crit));
formula q_forced := AG(EF(Q.pc = crit));
""")
g = build_state_graph(m)
print(g.n_states)

# %%
for f in m.formulas:
    out = check(g, f.formula, f.name)
    print(f"{f.name:<14} {out.verdict!s:<5} sat={out.sat_count}")

# %%
# sugar reduces to atoms, not, and, EX, EU and EG before labelling
print(format_formula(normalize(m.formula("p_must_enter"))))

# %%
# sat() returns a boolean mask over reachable states
mask = sat(g, normalize(m.formula("p_can_enter").arg))
print([g.state(i).as_dict() for i in range(g.n_states) if not mask[i]])
