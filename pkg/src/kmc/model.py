"""Agents, models, global states and the synchronous transition relation.

Every agent owns a disjoint set of finite-domain variables and a list of
guarded rules. In each tick every agent takes exactly one move: among its
rules whose guards hold in the current state only the lowest priority tier
is kept, each kept rule giving one move. An agent with no enabled rule
stutters. The global successors are the cross product of the agents' moves,
all right-hand sides being evaluated in the pre-state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Union

from kmc.errors import DomainViolation, SourceSpan
from kmc.expr import Expr, eval_expr

DEFAULT_PRIORITY = 1


@dataclass(frozen=True)
class EnumDomain:
    members: tuple[str, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("enumeration needs at least one member")
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"duplicate enumeration members in {self.members}")

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def lo(self) -> int:
        return 0

    def values(self) -> tuple[str, ...]:
        return self.members

    def contains(self, value) -> bool:
        return isinstance(value, str) and value in self.members

    def encode(self, value) -> int:
        """Member name -> position."""
        return self.members.index(value)

    def decode(self, natural: int) -> str:
        return self.members[natural]


@dataclass(frozen=True)
class IntDomain:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty integer range {self.lo}..{self.hi}")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def values(self) -> range:
        return range(self.lo, self.hi + 1)

    def contains(self, value) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def encode(self, value) -> int:
        return value

    def decode(self, natural: int) -> int:
        return int(natural)


Domain = Union[EnumDomain, IntDomain]


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: Domain
    owner: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, str]:
        return (self.owner, self.name)

    @property
    def qualified(self) -> str:
        return f"{self.owner}.{self.name}"


@dataclass(frozen=True)
class GuardedRule:
    guard: Expr
    assignments: tuple[tuple[str, Expr], ...]
    priority: int = DEFAULT_PRIORITY
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AgentDef:
    name: str
    vars: tuple[VariableDecl, ...]
    init: tuple
    rules: tuple[GuardedRule, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)
    init_spans: tuple = field(default=(), compare=False, repr=False)

    def var(self, name: str) -> VariableDecl:
        for v in self.vars:
            if v.name == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class Define:
    name: str
    expr: Expr
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NamedFormula:
    name: str
    formula: object  # kmc.ctl formula node
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModelDef:
    agents: tuple[AgentDef, ...]
    defines: tuple[Define, ...] = ()
    formulas: tuple[NamedFormula, ...] = ()

    @cached_property
    def variables(self) -> tuple[VariableDecl, ...]:
        """All variables in canonical order (agent order, then declaration order)."""
        return tuple(v for a in self.agents for v in a.vars)

    @cached_property
    def var_index(self) -> dict[tuple[str, str], int]:
        return {v.key: i for i, v in enumerate(self.variables)}

    def agent(self, name: str) -> AgentDef:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)

    def formula(self, name: str):
        for f in self.formulas:
            if f.name == name:
                return f.formula
        raise KeyError(name)

    def decl(self, agent: str, name: str) -> VariableDecl:
        return self.variables[self.var_index[agent, name]]


@dataclass(frozen=True)
class GlobalState:
    """A total assignment; equality and hashing look at the value vector only."""

    values: tuple
    index: Mapping[tuple[str, str], int] = field(compare=False, repr=False, hash=False)

    def __getitem__(self, key: tuple[str, str]):
        return self.values[self.index[key]]

    def replace(self, updates: Mapping[tuple[str, str], object]) -> "GlobalState":
        vals = list(self.values)
        for k, v in updates.items():
            vals[self.index[k]] = v
        return GlobalState(tuple(vals), self.index)

    def as_dict(self) -> dict[str, object]:
        out = {}
        for (agent, name), i in sorted(self.index.items(), key=lambda kv: kv[1]):
            out[f"{agent}.{name}"] = self.values[i]
        return out


def make_state(m: ModelDef, assignment: Mapping[str, object] | None = None, **kw) -> GlobalState:
    """Initial state of ``m`` with some variables overridden.

    Keys are qualified names (``"USV.state"``); keyword arguments use
    ``Agent__var`` spelling for convenience in tests.
    """
    updates = dict(assignment or {})
    for k, v in kw.items():
        updates[k.replace("__", ".")] = v
    base = next(iter(initial_states(m)))
    keyed = {}
    for qname, v in updates.items():
        agent, _, name = qname.partition(".")
        if (agent, name) not in m.var_index:
            raise KeyError(qname)
        keyed[agent, name] = v
    return base.replace(keyed)


def initial_states(m: ModelDef) -> frozenset[GlobalState]:
    values = tuple(val for a in m.agents for val in a.init)
    return frozenset({GlobalState(values, m.var_index)})


def enabled_moves(a: AgentDef, s: GlobalState) -> frozenset[tuple[tuple[str, object], ...]]:
    """Moves of agent ``a`` in state ``s``.

    Each move is a full assignment of the agent's variables, as a tuple of
    ``(name, value)`` pairs in declaration order.
    """
    enabled = [r for r in a.rules if eval_expr(r.guard, s)]
    current = tuple((v.name, s[a.name, v.name]) for v in a.vars)
    if not enabled:
        return frozenset({current})
    best = min(r.priority for r in enabled)
    moves = set()
    for r in enabled:
        if r.priority != best:
            continue
        updated = dict(current)
        for target, rhs in r.assignments:
            value = eval_expr(rhs, s)
            if not a.var(target).domain.contains(value):
                raise DomainViolation(a.name, target, value, s.as_dict())
            updated[target] = value
        moves.add(tuple((v.name, updated[v.name]) for v in a.vars))
    return frozenset(moves)


def successors(m: ModelDef, s: GlobalState) -> frozenset[GlobalState]:
    per_agent = [sorted(enabled_moves(a, s), key=repr) for a in m.agents]
    out = set()
    for combo in itertools.product(*per_agent):
        values = tuple(value for move in combo for _, value in move)
        out.add(GlobalState(values, s.index))
    return frozenset(out)
