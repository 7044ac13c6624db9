"""Expression trees used for guards, assignments, defines and formula atoms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from kmc.errors import SourceSpan, UnresolvedVariable

CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("and", "or", "->")
ARITH_OPS = ("+", "-")
BUILTINS = {"clamp": 3, "min": 2, "max": 2}


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Int:
    value: int
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Bool:
    value: bool
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Sym:
    """An enumeration member used as a constant."""

    name: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Var:
    agent: str
    name: str
    span: SourceSpan | None = _span()

    @property
    def key(self) -> tuple[str, str]:
        return (self.agent, self.name)


@dataclass(frozen=True)
class Name:
    """Bare identifier awaiting resolution (local variable, define or symbol)."""

    name: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class BoolOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expr", ...]
    span: SourceSpan | None = _span()


Expr = Union[Int, Bool, Sym, Var, Name, Not, BoolOp, Cmp, Arith, Call]

TRUE = Bool(True)
FALSE = Bool(False)


def children(e: Expr) -> tuple:
    if isinstance(e, Not):
        return (e.operand,)
    if isinstance(e, (BoolOp, Cmp, Arith)):
        return (e.left, e.right)
    if isinstance(e, Call):
        return e.args
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def variables(e: Expr) -> set[tuple[str, str]]:
    return {n.key for n in walk(e) if isinstance(n, Var)}


def conj(*parts: Expr) -> Expr:
    """Left-nested conjunction; ``true`` for no parts."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = BoolOp("and", out, p)
    return out


def disj(*parts: Expr) -> Expr:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = BoolOp("or", out, p)
    return out


def clamp(x: int, lo: int, hi: int) -> int:
    return min(hi, max(lo, x))


def eval_expr(e: Expr, s) -> int | bool | str:
    """Evaluate ``e`` in state ``s``.

    ``s`` is anything indexable by ``(agent, var)`` pairs, normally a
    :class:`kmc.model.GlobalState`. Enumeration values are their member names.
    """
    if isinstance(e, Int):
        return e.value
    if isinstance(e, Bool):
        return e.value
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Var):
        try:
            return s[e.agent, e.name]
        except KeyError:
            raise UnresolvedVariable(e.agent, e.name) from None
    if isinstance(e, Not):
        return not eval_expr(e.operand, s)
    if isinstance(e, BoolOp):
        left = eval_expr(e.left, s)
        if e.op == "and":
            return bool(left) and bool(eval_expr(e.right, s))
        if e.op == "or":
            return bool(left) or bool(eval_expr(e.right, s))
        return (not left) or bool(eval_expr(e.right, s))
    if isinstance(e, Cmp):
        a, b = eval_expr(e.left, s), eval_expr(e.right, s)
        if e.op == "=":
            return a == b
        if e.op == "!=":
            return a != b
        if e.op == "<":
            return a < b
        if e.op == "<=":
            return a <= b
        if e.op == ">":
            return a > b
        return a >= b
    if isinstance(e, Arith):
        a, b = eval_expr(e.left, s), eval_expr(e.right, s)
        return a + b if e.op == "+" else a - b
    if isinstance(e, Call):
        args = [eval_expr(a, s) for a in e.args]
        if e.fn == "clamp":
            return clamp(*args)
        return min(args) if e.fn == "min" else max(args)
    if isinstance(e, Name):
        raise UnresolvedVariable("?", e.name)
    raise TypeError(f"not an expression: {e!r}")
