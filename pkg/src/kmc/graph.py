"""Reachable state graph construction.

States are encoded as mixed-radix integers (first declared variable most
significant), so numeric order of codes is lexicographic order of value
vectors. Each agent owns a disjoint block of digits, which lets the
synchronous product be formed by adding per-agent contributions. Frontier
expansion is vectorized with numpy over batches of states.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from kmc import expr as ex
from kmc.errors import DomainViolation, StateLimitExceeded
from kmc.model import EnumDomain, GlobalState, IntDomain, ModelDef, initial_states

log = logging.getLogger(__name__)

DEFAULT_STATE_LIMIT = 5_000_000
_MAX = np.iinfo(np.int64).max
_BATCH_CELLS = 1 << 21
_IDX = np.int32


class _Compiler:
    """Compiles expressions to functions of a value matrix (rows = states).

    Columns hold natural values: member position for enumerations, the
    integer itself otherwise.
    """

    def __init__(self, m: ModelDef):
        self.m = m

    def compile(self, e: ex.Expr):
        if isinstance(e, ex.Int):
            return (lambda cols, v=e.value: v), "int"
        if isinstance(e, ex.Bool):
            return (lambda cols, v=e.value: v), "bool"
        if isinstance(e, ex.Sym):
            return None, ("sym", e.name)
        if isinstance(e, ex.Var):
            i = self.m.var_index[e.key]
            dom = self.m.variables[i].domain
            kind = ("enum", dom) if isinstance(dom, EnumDomain) else "int"
            return (lambda cols, i=i: cols[:, i].astype(np.int64)), kind
        if isinstance(e, ex.Not):
            f, _ = self.compile(e.operand)
            return (lambda cols: np.logical_not(f(cols))), "bool"
        if isinstance(e, ex.BoolOp):
            f, _ = self.compile(e.left)
            g, _ = self.compile(e.right)
            if e.op == "and":
                return (lambda cols: np.logical_and(f(cols), g(cols))), "bool"
            if e.op == "or":
                return (lambda cols: np.logical_or(f(cols), g(cols))), "bool"
            return (lambda cols: np.logical_or(np.logical_not(f(cols)), g(cols))), "bool"
        if isinstance(e, ex.Cmp):
            return self._cmp(e), "bool"
        if isinstance(e, ex.Arith):
            f, _ = self.compile(e.left)
            g, _ = self.compile(e.right)
            if e.op == "+":
                return (lambda cols: np.add(f(cols), g(cols))), "int"
            return (lambda cols: np.subtract(f(cols), g(cols))), "int"
        if isinstance(e, ex.Call):
            fs = [self.compile(a)[0] for a in e.args]
            if e.fn == "clamp":
                x, lo, hi = fs
                return (lambda cols: np.minimum(hi(cols), np.maximum(lo(cols), x(cols)))), "int"
            op = np.minimum if e.fn == "min" else np.maximum

            def fold(cols, fs=fs, op=op):
                out = fs[0](cols)
                for g in fs[1:]:
                    out = op(out, g(cols))
                return out

            return fold, "int"
        raise TypeError(f"cannot compile {e!r}")

    def _cmp(self, e: ex.Cmp):
        f, fk = self.compile(e.left)
        g, gk = self.compile(e.right)
        if e.op in ("=", "!="):
            neg = e.op == "!="
            if isinstance(fk, tuple) or isinstance(gk, tuple):
                eq = self._enum_eq(f, fk, g, gk)
                return (lambda cols: np.logical_not(eq(cols))) if neg else eq
            if neg:
                return lambda cols: np.not_equal(f(cols), g(cols))
            return lambda cols: np.equal(f(cols), g(cols))
        op = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}[e.op]
        return lambda cols: op(f(cols), g(cols))

    @staticmethod
    def _enum_eq(f, fk, g, gk):
        if fk[0] == "sym" and gk[0] == "sym":
            same = fk[1] == gk[1]
            return lambda cols: same
        if fk[0] == "sym":
            f, fk, g, gk = g, gk, f, fk
        dom = fk[1]
        if gk[0] == "sym":
            if gk[1] not in dom.members:
                return lambda cols: False
            idx = dom.members.index(gk[1])
            return lambda cols: np.equal(f(cols), idx)
        other = gk[1]
        if other.members == dom.members:
            return lambda cols: np.equal(f(cols), g(cols))
        table = np.array([dom.members.index(x) if x in dom.members else -1 for x in other.members])
        return lambda cols: np.equal(f(cols), table[g(cols)])

    def compile_into(self, e: ex.Expr, dom) -> Callable:
        """Compile a right-hand side to natural values of the target domain."""
        f, kind = self.compile(e)
        if isinstance(dom, IntDomain):
            return f
        if kind[0] == "sym":
            idx = dom.members.index(kind[1])
            return lambda cols: idx
        src = kind[1]
        if src.members == dom.members:
            return f
        table = np.array([dom.members.index(x) for x in src.members])
        return lambda cols: table[f(cols)]


def compile_predicate(m: ModelDef, e: ex.Expr) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized boolean predicate over a natural-value matrix."""
    f, _ = _Compiler(m).compile(e)

    def pred(cols):
        return np.broadcast_to(np.asarray(f(cols), dtype=bool), (cols.shape[0],))

    return pred


@dataclass
class _Layout:
    sizes: np.ndarray
    lows: np.ndarray
    weights: np.ndarray

    @classmethod
    def of(cls, m: ModelDef) -> "_Layout":
        sizes = np.array([v.domain.size for v in m.variables], dtype=np.int64)
        lows = np.array([v.domain.lo for v in m.variables], dtype=np.int64)
        weights = np.ones(len(sizes), dtype=np.int64)
        total = 1
        for i in range(len(sizes) - 1, -1, -1):
            weights[i] = total
            total *= int(sizes[i])
            if total > _MAX // 4:
                raise OverflowError("state space too large for 63-bit state codes")
        return cls(sizes, lows, weights)

    def encode(self, naturals: np.ndarray) -> np.ndarray:
        return (np.asarray(naturals, dtype=np.int64) - self.lows) @ self.weights

    def decode(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        return (codes[:, None] // self.weights) % self.sizes + self.lows


class _AgentPlan:
    def __init__(self, m: ModelDef, agent, comp: _Compiler, layout: _Layout):
        self.name = agent.name
        self.var_cols = np.array([m.var_index[v.key] for v in agent.vars], dtype=np.int64)
        self.var_weights = layout.weights[self.var_cols]
        self.guards = [compile_predicate(m, r.guard) for r in agent.rules]
        self.tiers = np.array([r.priority for r in agent.rules], dtype=np.int64)
        self.assigns = []
        for r in agent.rules:
            items = []
            for target, rhs in r.assignments:
                decl = agent.var(target)
                col = m.var_index[decl.key]
                items.append((col, layout.weights[col], decl, comp.compile_into(rhs, decl.domain)))
            self.assigns.append(items)

    def moves(self, cols: np.ndarray, m: ModelDef):
        """Distinct move contributions per row, padded; returns (codes, valid)."""
        n = cols.shape[0]
        if len(self.var_cols):
            own = cols[:, self.var_cols] @ self.var_weights
        else:
            own = np.zeros(n, dtype=np.int64)
        if not self.guards:
            return own[:, None], np.ones((n, 1), dtype=bool)
        g = np.stack([p(cols) for p in self.guards])
        best = np.where(g, self.tiers[:, None], _MAX).min(axis=0)
        keep = g & (self.tiers[:, None] == best[None, :])
        rows = []
        for j, items in enumerate(self.assigns):
            c = own.copy()
            for col, w, decl, fn in items:
                new = np.broadcast_to(np.asarray(fn(cols), dtype=np.int64), (n,))
                if isinstance(decl.domain, IntDomain):
                    bad = keep[j] & ((new < decl.domain.lo) | (new > decl.domain.hi))
                    if bad.any():
                        r = int(np.flatnonzero(bad)[0])
                        state = _natural_state(m, cols[r]).as_dict()
                        raise DomainViolation(decl.owner, decl.name, int(new[r]), state)
                c = c + (new - cols[:, col]) * w
            rows.append(np.where(keep[j], c, _MAX))
        rows.append(np.where(g.any(axis=0), _MAX, own))
        key = np.stack(rows, axis=1)
        key.sort(axis=1)
        if key.shape[1] > 1:
            dup = key[:, 1:] == key[:, :-1]
            key[:, 1:][dup] = _MAX
            key.sort(axis=1)
        width = int((key != _MAX).sum(axis=1).max())
        key = key[:, :width]
        return key, key != _MAX


def _natural_state(m: ModelDef, row) -> GlobalState:
    vals = tuple(v.domain.decode(int(x)) for v, x in zip(m.variables, row))
    return GlobalState(vals, m.var_index)


class StateGraph:
    """Reachable states with CSR forward and backward adjacency.

    ``values[i]`` holds the natural values of state ``i``; state 0 is the
    initial state for built graphs.
    """

    def __init__(self, model: ModelDef, values: np.ndarray, succ_ptr: np.ndarray,
                 succ_idx: np.ndarray, init: Sequence[int]):
        self.model = model
        self.values = np.asarray(values)
        self.succ_ptr = np.asarray(succ_ptr, dtype=np.int64)
        self.succ_idx = np.asarray(succ_idx, dtype=_IDX)
        self.init = np.unique(np.asarray(init, dtype=np.int64))
        n = self.values.shape[0]
        order = np.argsort(self.succ_idx, kind="stable")
        self.pred_idx = self.succ_src[order]
        del order
        self.pred_ptr = np.concatenate(([0], np.cumsum(np.bincount(self.succ_idx, minlength=n))))
        self.build_seconds = 0.0

    @cached_property
    def succ_src(self) -> np.ndarray:
        """Source state of each entry of ``succ_idx``."""
        return np.repeat(np.arange(self.n_states, dtype=_IDX), np.diff(self.succ_ptr))

    @classmethod
    def from_edges(cls, model: ModelDef, values, edges: Iterable[tuple[int, int]],
                   init: Sequence[int]) -> "StateGraph":
        values = np.asarray(values, dtype=np.int64)
        n = values.shape[0]
        adj = [set() for _ in range(n)]
        for u, v in edges:
            adj[u].add(v)
        ptr = np.concatenate(([0], np.cumsum([len(a) for a in adj]))).astype(np.int64)
        idx = np.array([v for a in adj for v in sorted(a)], dtype=np.int64)
        return cls(model, values, ptr, idx, init)

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.succ_idx.shape[0])

    def __len__(self) -> int:
        return self.n_states

    def succ(self, i: int) -> np.ndarray:
        return self.succ_idx[self.succ_ptr[i]:self.succ_ptr[i + 1]]

    def pred(self, i: int) -> np.ndarray:
        return self.pred_idx[self.pred_ptr[i]:self.pred_ptr[i + 1]]

    def edges(self) -> np.ndarray:
        return np.stack([self.succ_src, self.succ_idx], axis=1)

    def state(self, i: int) -> GlobalState:
        return _natural_state(self.model, self.values[i])

    def states(self) -> Iterable[GlobalState]:
        for i in range(self.n_states):
            yield self.state(i)

    def column(self, qualified: str) -> np.ndarray:
        agent, _, name = qualified.partition(".")
        return self.values[:, self.model.var_index[agent, name]]

    def evaluate(self, e: ex.Expr) -> np.ndarray:
        """Boolean vector of ``e`` over all states."""
        return compile_predicate(self.model, e)(self.values)


def gather(ptr: np.ndarray, idx: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Concatenated neighbour lists of ``rows`` in a CSR structure."""
    rows = np.asarray(rows, dtype=np.int64)
    starts = ptr[rows]
    lens = ptr[rows + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offs = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return idx[offs + np.arange(total, dtype=np.int64)]


def _expand(plans, layout: _Layout, m: ModelDef, codes: np.ndarray):
    cols = layout.decode(codes)
    n = cols.shape[0]
    total = np.zeros((n, 1), dtype=np.int64)
    valid = np.ones((n, 1), dtype=bool)
    for plan in plans:
        mv, ok = plan.moves(cols, m)
        total = (total[:, :, None] + np.where(ok, mv, 0)[:, None, :]).reshape(n, -1)
        valid = (valid[:, :, None] & ok[:, None, :]).reshape(n, -1)
    # contributions were computed on natural values; shift by the lows offset
    offset = int(layout.lows @ layout.weights)
    key = np.where(valid, total - offset, _MAX)
    key.sort(axis=1)
    valid = key != _MAX
    return key, valid


def build_state_graph(m: ModelDef, state_limit: int = DEFAULT_STATE_LIMIT) -> StateGraph:
    """Breadth-first reachable state graph of ``m``.

    State indices follow discovery order: frontier states in index order, each
    expanding its successors in ascending code order.
    """
    if state_limit <= 0:
        raise ValueError("state_limit must be positive")
    t0 = time.perf_counter()
    layout = _Layout.of(m)
    comp = _Compiler(m)
    plans = [_AgentPlan(m, a, comp, layout) for a in m.agents]
    init_state = next(iter(initial_states(m))).values
    init_nat = np.array([v.domain.encode(x) for v, x in zip(m.variables, init_state)], dtype=np.int64)
    init_code = int(layout.encode(init_nat[None, :])[0])

    code_levels = [np.array([init_code], dtype=np.int64)]
    seen_codes = code_levels[0].copy()
    seen_ids = np.zeros(1, dtype=np.int64)
    n = 1
    if n > state_limit:
        raise StateLimitExceeded(state_limit)
    degrees = []
    dst_parts = []
    width_guess = 4096
    frontier = code_levels[0]
    while frontier.size:
        level_dst = []
        start = 0
        while start < frontier.size:
            batch = max(1, _BATCH_CELLS // width_guess)
            chunk = frontier[start:start + batch]
            key, valid = _expand(plans, layout, m, chunk)
            width_guess = max(key.shape[1], 1)
            degrees.append(valid.sum(axis=1))
            level_dst.append(key[valid])
            start += chunk.size
        dst = np.concatenate(level_dst)
        pos = np.searchsorted(seen_codes, dst)
        pos_c = np.minimum(pos, seen_codes.size - 1)
        known = seen_codes[pos_c] == dst
        fresh = dst[~known]
        uniq, first = np.unique(fresh, return_index=True)
        new_codes = uniq[np.argsort(first, kind="stable")]
        if n + new_codes.size > state_limit:
            raise StateLimitExceeded(state_limit)
        new_ids = np.arange(n, n + new_codes.size, dtype=np.int64)
        n += new_codes.size
        all_codes = np.concatenate((seen_codes, new_codes))
        all_ids = np.concatenate((seen_ids, new_ids))
        order = np.argsort(all_codes, kind="stable")
        seen_codes, seen_ids = all_codes[order], all_ids[order]
        dst_parts.append(seen_ids[np.searchsorted(seen_codes, dst)].astype(_IDX))
        code_levels.append(new_codes)
        frontier = new_codes
        log.debug("level %d: %d new states (%d total)", len(code_levels) - 1, new_codes.size, n)

    codes = np.concatenate(code_levels)
    deg = np.concatenate(degrees)
    ptr = np.concatenate(([0], np.cumsum(deg))).astype(np.int64)
    idx = np.concatenate(dst_parts)
    del dst_parts, seen_codes, seen_ids
    values = layout.decode(codes)
    highs = layout.lows + layout.sizes - 1
    if layout.lows.min() >= np.iinfo(np.int16).min and highs.max() <= np.iinfo(np.int16).max:
        values = values.astype(np.int16)
    g = StateGraph(m, values, ptr, idx, [0])
    g.codes = codes
    g.build_seconds = time.perf_counter() - t0
    return g
