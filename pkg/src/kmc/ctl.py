"""CTL formulas and explicit-state labeling over a :class:`StateGraph`."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from kmc import expr as ex
from kmc.errors import UnsupportedFragment
from kmc.graph import StateGraph, gather


@dataclass(frozen=True)
class Atom:
    expr: ex.Expr


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class EX:
    arg: "Formula"


@dataclass(frozen=True)
class AX:
    arg: "Formula"


@dataclass(frozen=True)
class EF:
    arg: "Formula"


@dataclass(frozen=True)
class AF:
    arg: "Formula"


@dataclass(frozen=True)
class EG:
    arg: "Formula"


@dataclass(frozen=True)
class AG:
    arg: "Formula"


@dataclass(frozen=True)
class EU:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class AU:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, EX, AX, EF, AF, EG, AG, EU, AU]

TRUE = Atom(ex.TRUE)
UNARY_TEMPORAL = (EX, AX, EF, AF, EG, AG)
BINARY_TEMPORAL = (EU, AU)
BOOLEAN = (Not, And, Or, Implies)


def subformulas(f: Formula):
    yield f
    if isinstance(f, (Not,) + UNARY_TEMPORAL):
        yield from subformulas(f.arg)
    elif isinstance(f, (And, Or, Implies) + BINARY_TEMPORAL):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def atoms(f: Formula):
    for g in subformulas(f):
        if isinstance(g, Atom):
            yield g


def is_propositional(f: Formula) -> bool:
    return all(isinstance(g, (Atom,) + BOOLEAN) for g in subformulas(f))


def is_base_form(f: Formula) -> bool:
    return all(isinstance(g, (Atom, Not, And, EX, EU, EG)) for g in subformulas(f))


def normalize(f: Formula) -> Formula:
    """Rewrite into the base operators {atom, not, and, EX, EU, EG}."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return Not(normalize(f.arg))
    if isinstance(f, And):
        return And(normalize(f.left), normalize(f.right))
    if isinstance(f, Or):
        return Not(And(Not(normalize(f.left)), Not(normalize(f.right))))
    if isinstance(f, Implies):
        return Not(And(normalize(f.left), Not(normalize(f.right))))
    if isinstance(f, EX):
        return EX(normalize(f.arg))
    if isinstance(f, AX):
        return Not(EX(Not(normalize(f.arg))))
    if isinstance(f, EF):
        return EU(TRUE, normalize(f.arg))
    if isinstance(f, AG):
        return Not(EU(TRUE, Not(normalize(f.arg))))
    if isinstance(f, EG):
        return EG(normalize(f.arg))
    if isinstance(f, AF):
        return Not(EG(Not(normalize(f.arg))))
    if isinstance(f, EU):
        return EU(normalize(f.left), normalize(f.right))
    if isinstance(f, AU):
        p, q = normalize(f.left), normalize(f.right)
        until = EU(Not(q), And(Not(p), Not(q)))
        # not (until or EG not q), with the disjunction spelled via not/and
        return Not(Not(And(Not(until), Not(EG(Not(q))))))
    raise TypeError(f"not a CTL formula: {f!r}")


def pre_exists(g: StateGraph, z: np.ndarray) -> np.ndarray:
    """States with at least one successor in ``z``."""
    out = np.zeros(g.n_states, dtype=bool)
    out[gather(g.pred_ptr, g.pred_idx, np.flatnonzero(z))] = True
    return out


def _eu(g: StateGraph, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    z = q.copy()
    frontier = np.flatnonzero(z)
    while frontier.size:
        cand = gather(g.pred_ptr, g.pred_idx, frontier)
        cand = np.unique(cand[p[cand] & ~z[cand]])
        z[cand] = True
        frontier = cand
    return z


def _eg(g: StateGraph, p: np.ndarray) -> np.ndarray:
    z = p.copy()
    n = g.n_states
    count = np.bincount(g.succ_src[z[g.succ_idx]], minlength=n)
    dead = np.flatnonzero(z & (count == 0))
    while dead.size:
        z[dead] = False
        preds = gather(g.pred_ptr, g.pred_idx, dead)
        np.subtract.at(count, preds, 1)
        dead = np.unique(preds[z[preds] & (count[preds] == 0)])
    return z


def sat(g: StateGraph, f: Formula, _memo: Optional[dict] = None) -> np.ndarray:
    """Boolean mask of states satisfying base-form formula ``f``."""
    memo = {} if _memo is None else _memo
    if f in memo:
        return memo[f]
    if isinstance(f, Atom):
        out = g.evaluate(f.expr).copy()
    elif isinstance(f, Not):
        out = ~sat(g, f.arg, memo)
    elif isinstance(f, And):
        out = sat(g, f.left, memo) & sat(g, f.right, memo)
    elif isinstance(f, EX):
        out = pre_exists(g, sat(g, f.arg, memo))
    elif isinstance(f, EU):
        out = _eu(g, sat(g, f.left, memo), sat(g, f.right, memo))
    elif isinstance(f, EG):
        out = _eg(g, sat(g, f.arg, memo))
    else:
        raise ValueError(f"{type(f).__name__} is not a base-form operator; normalize first")
    memo[f] = out
    return out


@dataclass(frozen=True)
class Trace:
    """A path from an initial state; ``violation`` indexes the offending step.

    For ``AG(p -> AX q)`` counterexamples the trace ends with one extra
    successor witnessing ``not q``; ``violation`` then points at the state
    before it.
    """

    states: tuple[int, ...]
    violation: int
    note: str = ""

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    verdict: bool
    sat_count: int
    counterexample: Optional[Trace] = None
    supported: bool = field(default=True)

    def __post_init__(self):
        if self.verdict and self.counterexample is not None:
            raise ValueError("a formula that holds has no counterexample")


def check(g: StateGraph, f: Formula, name: str = "") -> CheckOutcome:
    mask = sat(g, normalize(f))
    verdict = bool(mask[g.init].all())
    trace, supported = None, True
    if not verdict:
        try:
            trace = counterexample(g, f)
        except UnsupportedFragment:
            supported = False
    return CheckOutcome(name, verdict, int(mask.sum()), trace, supported)


def _ag_shape(f: Formula):
    """Return (premise, body, kind) for the supported AG shapes."""
    if not isinstance(f, AG):
        raise UnsupportedFragment(f"counterexamples need an AG formula, got {type(f).__name__}")
    body = f.arg
    if isinstance(body, Implies) and isinstance(body.right, AX):
        if is_propositional(body.left) and is_propositional(body.right.arg):
            return body.left, body.right.arg, "ax"
    if is_propositional(body):
        return None, body, "prop"
    raise UnsupportedFragment("only AG(p), AG(p -> q) and AG(p -> AX q) with propositional p, q")


def shortest_path(g: StateGraph, targets: np.ndarray) -> list[int]:
    """Breadth-first shortest path from an initial state into ``targets``.

    Ties are broken towards the smallest target index and, along the way, the
    smallest parent index.
    """
    n = g.n_states
    parent = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    frontier = np.asarray(g.init, dtype=np.int64)
    seen[frontier] = True
    parent[frontier] = frontier
    while frontier.size:
        hit = frontier[targets[frontier]]
        if hit.size:
            node = int(hit.min())
            path = [node]
            while parent[node] != node:
                node = int(parent[node])
                path.append(node)
            return path[::-1]
        lens = np.diff(g.succ_ptr)[frontier]
        src = np.repeat(frontier, lens)
        dst = gather(g.succ_ptr, g.succ_idx, frontier)
        fresh = ~seen[dst]
        src, dst = src[fresh], dst[fresh]
        # first occurrence per destination, sources are already in ascending order
        order = np.lexsort((src, dst))
        dst, src = dst[order], src[order]
        first = np.concatenate(([True], dst[1:] != dst[:-1])) if dst.size else np.zeros(0, bool)
        dst, src = dst[first], src[first]
        parent[dst] = src
        seen[dst] = True
        frontier = np.sort(dst)
    raise ValueError("no target reachable from the initial states")


def counterexample(g: StateGraph, f: Formula) -> Trace:
    """Shortest counterexample for a violated AG-fragment formula."""
    premise, body, kind = _ag_shape(f)
    if kind == "prop":
        bad = ~sat(g, normalize(body))
        path = shortest_path(g, bad)
        return Trace(tuple(path), len(path) - 1, "state violates the invariant")
    p = sat(g, normalize(premise))
    not_q = ~sat(g, normalize(body))
    bad = p & pre_exists(g, not_q)
    path = shortest_path(g, bad)
    last = path[-1]
    witness = int(min(s for s in g.succ(last) if not_q[s]))
    return Trace(tuple(path) + (witness,), len(path) - 1, "premise holds but a successor violates the AX target")
