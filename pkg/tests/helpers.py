"""Test oracles and random generators.

The CTL oracle here works on Python sets, evaluates atoms with the scalar
``eval_expr`` and iterates each operator's own fixpoint equation from the
bottom or top element until nothing changes. It shares no code with the
engine's normalization or worklist fixpoints.
"""

from __future__ import annotations

import random

from kmc import ctl
from kmc import expr as ex
from kmc.graph import StateGraph
from kmc.lang import parse_model
from kmc.model import (
    AgentDef,
    Define,
    EnumDomain,
    GlobalState,
    GuardedRule,
    IntDomain,
    ModelDef,
    NamedFormula,
    VariableDecl,
)

# -- naive CTL ----------------------------------------------------------------


def naive_sat(states: list[GlobalState], succ: dict[int, set[int]], f) -> set[int]:
    everything = set(range(len(states)))

    def ex_(z):
        return {s for s in everything if succ[s] & z}

    def ax_(z):
        return {s for s in everything if succ[s] <= z}

    def lfp(step):
        z = set()
        while True:
            nz = step(z)
            if nz == z:
                return z
            z = nz

    def gfp(step):
        z = set(everything)
        while True:
            nz = step(z)
            if nz == z:
                return z
            z = nz

    def go(f):
        if isinstance(f, ctl.Atom):
            return {i for i in everything if ex.eval_expr(f.expr, states[i])}
        if isinstance(f, ctl.Not):
            return everything - go(f.arg)
        if isinstance(f, ctl.And):
            return go(f.left) & go(f.right)
        if isinstance(f, ctl.Or):
            return go(f.left) | go(f.right)
        if isinstance(f, ctl.Implies):
            return (everything - go(f.left)) | go(f.right)
        if isinstance(f, ctl.EX):
            return ex_(go(f.arg))
        if isinstance(f, ctl.AX):
            return ax_(go(f.arg))
        if isinstance(f, ctl.EF):
            p = go(f.arg)
            return lfp(lambda z: p | ex_(z))
        if isinstance(f, ctl.AF):
            p = go(f.arg)
            return lfp(lambda z: p | ax_(z))
        if isinstance(f, ctl.EG):
            p = go(f.arg)
            return gfp(lambda z: p & ex_(z))
        if isinstance(f, ctl.AG):
            p = go(f.arg)
            return gfp(lambda z: p & ax_(z))
        if isinstance(f, ctl.EU):
            p, q = go(f.left), go(f.right)
            return lfp(lambda z: q | (p & ex_(z)))
        if isinstance(f, ctl.AU):
            p, q = go(f.left), go(f.right)
            return lfp(lambda z: q | (p & ax_(z)))
        raise TypeError(f)

    return go(f)


# -- random labelled graphs ---------------------------------------------------

LABEL_MODEL = parse_model("""
agent L {
  var id : 0..99 init 0;
  var p0 : 0..1 init 0;
  var p1 : 0..1 init 0;
  var p2 : 0..1 init 0;
}
""")


def label_atom(k: int) -> ctl.Atom:
    return ctl.Atom(ex.Cmp("=", ex.Var("L", f"p{k}"), ex.Int(1)))


def random_graph(rng: random.Random, max_states: int = 8, n_atoms: int = 3):
    """Total random graph with ``n_atoms`` random labels; init = {0}."""
    n = rng.randint(1, max_states)
    rows = [[i] + [rng.randint(0, 1) for _ in range(3)] for i in range(n)]
    for row in rows:
        for k in range(n_atoms, 3):
            row[1 + k] = 0
    edges = set()
    for u in range(n):
        for v in rng.sample(range(n), rng.randint(1, n)):
            edges.add((u, v))
    g = StateGraph.from_edges(LABEL_MODEL, rows, sorted(edges), [0])
    states = list(g.states())
    succ = {u: set() for u in range(n)}
    for u, v in edges:
        succ[u].add(v)
    return g, states, succ


def random_formula(rng: random.Random, depth: int, n_atoms: int = 3):
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.1:
            return ctl.TRUE
        if r < 0.15:
            return ctl.Atom(ex.FALSE)
        return label_atom(rng.randrange(n_atoms))
    unary = [ctl.Not, ctl.EX, ctl.AX, ctl.EF, ctl.AF, ctl.EG, ctl.AG]
    binary = [ctl.And, ctl.Or, ctl.Implies, ctl.EU, ctl.AU]
    if rng.random() < 0.5:
        return rng.choice(unary)(random_formula(rng, depth - 1, n_atoms))
    return rng.choice(binary)(random_formula(rng, depth - 1, n_atoms),
                              random_formula(rng, depth - 1, n_atoms))


def random_propositional(rng: random.Random, depth: int, n_atoms: int = 3):
    if depth == 0 or rng.random() < 0.3:
        return label_atom(rng.randrange(n_atoms))
    r = rng.random()
    if r < 0.25:
        return ctl.Not(random_propositional(rng, depth - 1, n_atoms))
    cls = rng.choice([ctl.And, ctl.Or, ctl.Implies])
    return cls(random_propositional(rng, depth - 1, n_atoms),
               random_propositional(rng, depth - 1, n_atoms))


# -- random well-typed models -------------------------------------------------

MEMBERS = ["m0", "m1", "m2", "m3", "m4"]


class ModelGen:
    """Random models that validate and never leave their domains."""

    def __init__(self, rng: random.Random, max_agents: int = 3, max_vars: int = 2,
                 max_rules: int = 4, depth: int = 3):
        self.rng = rng
        self.max_agents = max_agents
        self.max_vars = max_vars
        self.max_rules = max_rules
        self.depth = depth

    def domain(self):
        rng = self.rng
        if rng.random() < 0.5:
            return EnumDomain(tuple(rng.sample(MEMBERS, rng.randint(1, 3))))
        lo = rng.randint(-3, 2)
        return IntDomain(lo, lo + rng.randint(0, 3))

    def model(self) -> ModelDef:
        rng = self.rng
        decls = []
        shapes = []
        for a in range(rng.randint(1, self.max_agents)):
            name = f"A{a}"
            vs = [VariableDecl(f"x{a}{k}", self.domain(), name) for k in range(rng.randint(1, self.max_vars))]
            decls.extend(vs)
            shapes.append((name, vs))
        self.decls = decls
        agents = []
        for name, vs in shapes:
            init = tuple(rng.choice(list(v.domain.values())) for v in vs)
            rules = tuple(self.rule(name, vs) for _ in range(rng.randint(0, self.max_rules)))
            agents.append(AgentDef(name, tuple(vs), init, rules))
        defines = tuple(Define(f"d{k}", self.bool_expr(self.depth)) for k in range(rng.randint(0, 2)))
        formulas = tuple(NamedFormula(f"f{k}", self.formula(2)) for k in range(rng.randint(0, 2)))
        return ModelDef(tuple(agents), defines, formulas)

    def rule(self, agent, vs):
        rng = self.rng
        targets = rng.sample(vs, rng.randint(1, len(vs)))
        assigns = tuple((v.name, self.value_for(v)) for v in targets)
        return GuardedRule(self.bool_expr(self.depth), assigns, rng.choice([0, 1, 1, 2]))

    def value_for(self, v: VariableDecl):
        rng = self.rng
        d = v.domain
        if isinstance(d, EnumDomain):
            same = [w for w in self.decls if w.domain == d]
            if same and rng.random() < 0.3:
                w = rng.choice(same)
                return ex.Var(w.owner, w.name)
            return ex.Sym(rng.choice(d.members))
        return ex.Call("clamp", (self.int_expr(self.depth), ex.Int(d.lo), ex.Int(d.hi)))

    def int_vars(self):
        return [w for w in self.decls if isinstance(w.domain, IntDomain)]

    def enum_vars(self):
        return [w for w in self.decls if isinstance(w.domain, EnumDomain)]

    def int_expr(self, depth):
        rng = self.rng
        ivs = self.int_vars()
        r = rng.random()
        if depth == 0 or r < 0.3:
            if ivs and rng.random() < 0.6:
                w = rng.choice(ivs)
                return ex.Var(w.owner, w.name)
            return ex.Int(rng.randint(-3, 5))
        if r < 0.75:
            return ex.Arith(rng.choice("+-"), self.int_expr(depth - 1), self.int_expr(depth - 1))
        fn = rng.choice(["clamp", "min", "max"])
        n = ex.BUILTINS[fn]
        return ex.Call(fn, tuple(self.int_expr(depth - 1) for _ in range(n)))

    def atom_expr(self, depth):
        rng = self.rng
        evs = self.enum_vars()
        r = rng.random()
        if r < 0.1:
            return ex.Bool(rng.random() < 0.5)
        if evs and r < 0.6:
            w = rng.choice(evs)
            if rng.random() < 0.3:
                others = [u for u in evs if u.domain == w.domain]
                other = rng.choice(others)
                right = ex.Var(other.owner, other.name)
            else:
                right = ex.Sym(rng.choice(w.domain.members))
            return ex.Cmp(rng.choice(["=", "!="]), ex.Var(w.owner, w.name), right)
        return ex.Cmp(rng.choice(ex.CMP_OPS), self.int_expr(depth - 1), self.int_expr(depth - 1))

    def bool_expr(self, depth):
        rng = self.rng
        if depth == 0 or rng.random() < 0.35:
            return self.atom_expr(max(depth, 1))
        if rng.random() < 0.2:
            return ex.Not(self.bool_expr(depth - 1))
        return ex.BoolOp(rng.choice(ex.BOOL_OPS), self.bool_expr(depth - 1), self.bool_expr(depth - 1))

    def formula(self, depth):
        rng = self.rng
        if depth == 0 or rng.random() < 0.3:
            return ctl.Atom(self.atom_expr(2))
        unary = [ctl.Not, ctl.EX, ctl.AX, ctl.EF, ctl.AF, ctl.EG, ctl.AG]
        binary = [ctl.And, ctl.Or, ctl.Implies, ctl.EU, ctl.AU]
        if rng.random() < 0.5:
            return rng.choice(unary)(self.formula(depth - 1))
        return rng.choice(binary)(self.formula(depth - 1), self.formula(depth - 1))


def random_model(seed: int, **kw) -> ModelDef:
    return ModelGen(random.Random(seed), **kw).model()


def toy(text: str) -> ModelDef:
    return parse_model(text)


# lines printed by the acceptance suite, echoed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []
