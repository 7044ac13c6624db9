"""Parser and pretty-printer for the ``.kmc`` modeling language.

Grammar::

    model      := item* ;
    item       := agent | define | formula ;
    agent      := "agent" IDENT "{" (vardecl | rule)* "}" ;
    vardecl    := "var" IDENT ":" domain "init" value ";" ;
    domain     := "{" IDENT ("," IDENT)* "}" | INT ".." INT ;
    rule       := "rule" ("[" "prio" INT "]")? expr "->" assign ("," assign)* ";" ;
    assign     := IDENT ":=" expr ;
    define     := "define" IDENT ":=" expr ";" ;
    formula    := "formula" IDENT ":=" ctl ";" ;

Operator binding, tightest first: arithmetic, comparisons, ``not``, ``and``,
``or``, ``->`` (right associative). A rule guard stops before ``->``, so an
implication inside a guard must be parenthesized.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from kmc import ctl
from kmc import expr as ex
from kmc.errors import ParseError, SourceSpan, ValidationError
from kmc.model import (
    DEFAULT_PRIORITY,
    AgentDef,
    Define,
    EnumDomain,
    GuardedRule,
    IntDomain,
    ModelDef,
    NamedFormula,
    VariableDecl,
)

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>//[^\n]*)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<int>[0-9]+)"
    r"|(?P<op>:=|\.\.|->|!=|<=|>=|[{}()\[\],;:.=<>+\-])"
)

TEMPORAL_UNARY = {"EX": ctl.EX, "AX": ctl.AX, "EF": ctl.EF, "AF": ctl.AF, "EG": ctl.EG, "AG": ctl.AG}
CMP_TOKENS = set(ex.CMP_OPS)
ARITH_TOKENS = set(ex.ARITH_OPS)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | op | eof
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            end = pos + 1
            while end < len(text) and text[end] != "\n" and _TOKEN.match(text, end) is None:
                end += 1
            junk = text[pos:end]
            what = "character" if len(junk) == 1 else "characters"
            raise ParseError(SourceSpan(line, col, len(junk)), f"unexpected {what} {junk!r}")
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, SourceSpan(line, col, len(chunk))))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(line, pos - line_start + 1, 0)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.ctl = False

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("op", "ident") and t.text == text

    def advance(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def fail(self, expected: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(tok.span, f"unexpected {found}", expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "ident":
            self.fail(what)
        return self.advance()

    def integer(self) -> tuple[int, SourceSpan]:
        start = self.peek().span
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        t = self.peek()
        if t.kind != "int":
            self.fail("integer")
        self.advance()
        return sign * int(t.text), start

    # model structure
    def model(self):
        agents, defines, formulas = [], [], []
        while self.peek().kind != "eof":
            if self.at("agent"):
                agents.append(self.agent())
            elif self.at("define"):
                self.advance()
                name = self.ident("define name")
                self.expect(":=")
                body = self.implies()
                self.expect(";")
                defines.append((name.text, body, name.span))
            elif self.at("formula"):
                self.advance()
                name = self.ident("formula name")
                self.expect(":=")
                self.ctl = True
                body = self.implies()
                self.ctl = False
                self.expect(";")
                formulas.append((name.text, body, name.span))
            else:
                self.fail("'agent', 'define' or 'formula'")
        return agents, defines, formulas

    def agent(self):
        self.expect("agent")
        name = self.ident("agent name")
        self.expect("{")
        decls, rules = [], []
        while not self.at("}"):
            if self.at("var"):
                self.advance()
                vname = self.ident("variable name")
                self.expect(":")
                dom = self.domain()
                kw = self.expect("init")
                t = self.peek()
                if t.kind == "ident":
                    self.advance()
                    init, ispan = t.text, t.span
                else:
                    init, ispan = self.integer()
                if ispan.line == kw.span.line:
                    # from the keyword through the value
                    ispan = SourceSpan(kw.span.line, kw.span.column,
                                       ispan.column + ispan.length - kw.span.column)
                self.expect(";")
                decls.append((vname, dom, init, ispan))
            elif self.at("rule"):
                rules.append(self.rule())
            else:
                self.fail("'var', 'rule' or '}'")
        self.expect("}")
        return name, decls, rules

    def domain(self):
        t = self.peek()
        if self.at("{"):
            self.advance()
            members = [self.ident("enumeration member")]
            while self.at(","):
                self.advance()
                members.append(self.ident("enumeration member"))
            self.expect("}")
            return ("enum", members, t.span)
        lo, _ = self.integer()
        self.expect("..")
        hi, _ = self.integer()
        return ("int", (lo, hi), t.span)

    def rule(self):
        kw = self.expect("rule")
        prio = DEFAULT_PRIORITY
        if self.at("["):
            self.advance()
            self.expect("prio")
            prio, _ = self.integer()
            self.expect("]")
        guard = self.disjunction()
        self.expect("->")
        assigns = [self.assign()]
        while self.at(","):
            self.advance()
            assigns.append(self.assign())
        self.expect(";")
        return guard, assigns, prio, kw.span

    def assign(self):
        target = self.ident("assignment target")
        self.expect(":=")
        return target, self.implies()

    # expressions; in ctl mode the boolean layer builds formula nodes
    def implies(self):
        left = self.disjunction()
        if self.at("->"):
            t = self.advance()
            right = self.implies()
            return ctl.Implies(left, right) if self.ctl else ex.BoolOp("->", left, right, t.span)
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.at("or"):
            t = self.advance()
            right = self.conjunction()
            left = ctl.Or(left, right) if self.ctl else ex.BoolOp("or", left, right, t.span)
        return left

    def conjunction(self):
        left = self.negation()
        while self.at("and"):
            t = self.advance()
            right = self.negation()
            left = ctl.And(left, right) if self.ctl else ex.BoolOp("and", left, right, t.span)
        return left

    def negation(self):
        if self.at("not"):
            t = self.advance()
            arg = self.negation()
            return ctl.Not(arg) if self.ctl else ex.Not(arg, t.span)
        if self.ctl:
            return self.ctl_primary()
        return self.comparison()

    def ctl_primary(self):
        t = self.peek()
        if t.kind == "ident" and t.text in TEMPORAL_UNARY and self.at("(", 1):
            self.advance()
            self.advance()
            arg = self.implies()
            self.expect(")")
            return TEMPORAL_UNARY[t.text](arg)
        if t.kind == "ident" and t.text in ("A", "E") and self.at("[", 1):
            self.advance()
            self.advance()
            left = self.implies()
            self.expect("U")
            right = self.implies()
            self.expect("]")
            return (ctl.AU if t.text == "A" else ctl.EU)(left, right)
        saved = self.pos
        first_error = None
        if self.at("("):
            try:
                self.advance()
                inner = self.implies()
                self.expect(")")
                if not (self.peek().kind == "op" and self.peek().text in CMP_TOKENS | ARITH_TOKENS):
                    return inner
            except ParseError as err:
                first_error = err
            self.pos = saved
        self.ctl = False
        try:
            return ctl.Atom(self.comparison())
        except ParseError as err:
            if first_error is not None and _later(first_error.span, err.span):
                raise first_error from None
            raise
        finally:
            self.ctl = True

    def comparison(self):
        left = self.arith()
        t = self.peek()
        if t.kind == "op" and t.text in CMP_TOKENS:
            self.advance()
            right = self.arith()
            return ex.Cmp(t.text, left, right, t.span)
        return left

    def arith(self):
        left = self.unary()
        while self.peek().kind == "op" and self.peek().text in ARITH_TOKENS:
            t = self.advance()
            right = self.unary()
            left = ex.Arith(t.text, left, right, t.span)
        return left

    def unary(self):
        if self.at("-"):
            t = self.advance()
            if self.peek().kind == "int":
                n = self.advance()
                return ex.Int(-int(n.text), t.span)
            return ex.Arith("-", ex.Int(0, t.span), self.unary(), t.span)
        return self.primary()

    def primary(self):
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return ex.Int(int(t.text), t.span)
        if t.kind == "ident":
            self.advance()
            if t.text in ("true", "false"):
                return ex.Bool(t.text == "true", t.span)
            if t.text in ex.BUILTINS and self.at("("):
                self.advance()
                args = [self.implies()]
                while self.at(","):
                    self.advance()
                    args.append(self.implies())
                self.expect(")")
                return ex.Call(t.text, tuple(args), t.span)
            if self.at("."):
                self.advance()
                name = self.ident("variable name")
                span = SourceSpan(t.span.line, t.span.column,
                                  name.span.column + name.span.length - t.span.column
                                  if name.span.line == t.span.line else t.span.length)
                return ex.Var(t.text, name.text, span)
            return ex.Name(t.text, t.span)
        if self.at("("):
            self.advance()
            inner = self.implies()
            self.expect(")")
            return inner
        self.fail("expression")


def _later(a: Optional[SourceSpan], b: Optional[SourceSpan]) -> bool:
    if a is None or b is None:
        return False
    return (a.line, a.column) > (b.line, b.column)


def _key(err: ValidationError):
    s = err.span
    return (s.line, s.column) if s is not None else (0, 0)


class _Resolver:
    """Resolves names, expands defines and type-checks a parsed model."""

    def __init__(self, agents, defines, formulas):
        self.errors: list[ValidationError] = []
        self.raw_agents = agents
        self.raw_defines = {}
        self.raw_formulas = formulas
        self.decls: dict[tuple[str, str], VariableDecl] = {}
        self.agent_vars: dict[str, dict[str, VariableDecl]] = {}
        self.define_cache: dict[str, ex.Expr] = {}
        self.define_stack: list[str] = []
        self.enum_members: set[str] = set()
        for name, body, span in defines:
            if name in self.raw_defines:
                self.error(span, f"duplicate define '{name}'")
            else:
                self.raw_defines[name] = (body, span)

    def error(self, span, message):
        self.errors.append(ValidationError(span, message))

    def declare(self):
        seen_agents = set()
        for (name_tok, decls, _rules) in self.raw_agents:
            aname = name_tok.text
            if aname in seen_agents:
                self.error(name_tok.span, f"duplicate agent '{aname}'")
            seen_agents.add(aname)
            table = self.agent_vars.setdefault(aname, {})
            for vtok, (kind, data, dspan), _init, _ispan in decls:
                dom = None
                if kind == "enum":
                    names = [m.text for m in data]
                    if len(set(names)) != len(names):
                        self.error(dspan, "duplicate enumeration member")
                    else:
                        dom = EnumDomain(tuple(names))
                        self.enum_members.update(names)
                else:
                    lo, hi = data
                    if lo > hi:
                        self.error(dspan, f"empty range {lo}..{hi}")
                    else:
                        dom = IntDomain(lo, hi)
                if vtok.text in table:
                    self.error(vtok.span, f"duplicate variable '{aname}.{vtok.text}'")
                    continue
                if dom is None:
                    continue
                decl = VariableDecl(vtok.text, dom, aname, vtok.span)
                table[vtok.text] = decl
                self.decls[aname, vtok.text] = decl

    # name resolution
    def resolve(self, e, agent: Optional[str]):
        if isinstance(e, ex.Name):
            if agent is not None and e.name in self.agent_vars.get(agent, {}):
                return ex.Var(agent, e.name, e.span)
            if e.name in self.raw_defines:
                return self.expand_define(e.name, e.span)
            return ex.Sym(e.name, e.span)
        if isinstance(e, ex.Var):
            if e.key not in self.decls:
                self.error(e.span, f"unknown variable '{e.agent}.{e.name}'")
            return e
        if isinstance(e, ex.Not):
            return ex.Not(self.resolve(e.operand, agent), e.span)
        if isinstance(e, (ex.BoolOp, ex.Cmp, ex.Arith)):
            return type(e)(e.op, self.resolve(e.left, agent), self.resolve(e.right, agent), e.span)
        if isinstance(e, ex.Call):
            if len(e.args) != ex.BUILTINS[e.fn]:
                self.error(e.span, f"{e.fn} takes {ex.BUILTINS[e.fn]} arguments, got {len(e.args)}")
            return ex.Call(e.fn, tuple(self.resolve(a, agent) for a in e.args), e.span)
        return e

    def expand_define(self, name, span):
        if name in self.define_cache:
            return self.define_cache[name]
        if name in self.define_stack:
            self.error(span, f"define '{name}' refers to itself")
            return ex.FALSE
        self.define_stack.append(name)
        body, dspan = self.raw_defines[name]
        out = self.resolve(body, None)
        self.define_stack.pop()
        self.define_cache[name] = out
        return out

    # typing: 'int', 'bool', EnumDomain, ('sym', name) or None after an error
    def infer(self, e):
        if isinstance(e, ex.Int):
            return "int"
        if isinstance(e, ex.Bool):
            return "bool"
        if isinstance(e, ex.Sym):
            if e.name not in self.enum_members:
                self.error(e.span, f"unknown identifier '{e.name}'")
                return None
            return ("sym", e.name)
        if isinstance(e, ex.Var):
            decl = self.decls.get(e.key)
            if decl is None:
                return None
            return "int" if isinstance(decl.domain, IntDomain) else decl.domain
        if isinstance(e, ex.Not):
            self.want(e.operand, "bool")
            return "bool"
        if isinstance(e, ex.BoolOp):
            self.want(e.left, "bool")
            self.want(e.right, "bool")
            return "bool"
        if isinstance(e, ex.Arith):
            self.want(e.left, "int")
            self.want(e.right, "int")
            return "int"
        if isinstance(e, ex.Call):
            for a in e.args:
                self.want(a, "int")
            return "int"
        if isinstance(e, ex.Cmp):
            a, b = self.infer(e.left), self.infer(e.right)
            if a is None or b is None:
                return "bool"
            if e.op not in ("=", "!="):
                if a != "int" or b != "int":
                    self.error(e.span, f"'{e.op}' needs integer operands")
                return "bool"
            if not _comparable(a, b):
                self.error(e.span, f"type mismatch: cannot compare {_tname(a)} with {_tname(b)}")
            return "bool"
        raise TypeError(e)

    def want(self, e, expected):
        t = self.infer(e)
        if t is not None and t != expected:
            self.error(_span_of(e), f"expected {expected} expression, found {_tname(t)}")

    def check_value(self, e, decl: VariableDecl, span):
        t = self.infer(e)
        if t is None:
            return
        dom = decl.domain
        if isinstance(dom, IntDomain):
            if t != "int":
                self.error(span, f"cannot assign {_tname(t)} to integer variable {decl.qualified}")
        elif isinstance(t, tuple):
            if t[1] not in dom.members:
                self.error(_span_of(e) or span, f"'{t[1]}' is not in the domain of {decl.qualified}")
        elif isinstance(t, EnumDomain):
            if set(t.members) != set(dom.members):
                self.error(span, f"enumeration mismatch assigning to {decl.qualified}")
        else:
            self.error(span, f"cannot assign {_tname(t)} to enumeration variable {decl.qualified}")

    def lift(self, f):
        """Resolve a parsed formula; boolean structure inside atoms becomes formula structure."""
        if isinstance(f, ctl.Atom):
            e = self.resolve(f.expr, None)
            return _lift(e)
        if isinstance(f, (ctl.Not,) + ctl.UNARY_TEMPORAL):
            return type(f)(self.lift(f.arg))
        return type(f)(self.lift(f.left), self.lift(f.right))

    def build(self) -> ModelDef:
        self.declare()
        agents = []
        for name_tok, decls, rules in self.raw_agents:
            aname = name_tok.text
            table = self.agent_vars[aname]
            vars_, init, ispans = [], [], []
            for vtok, _dom, ival, ispan in decls:
                decl = table.get(vtok.text)
                if decl is None or decl.span is not vtok.span:
                    continue
                if not decl.domain.contains(ival):
                    self.error(ispan, f"init out of domain for {decl.qualified}")
                vars_.append(decl)
                init.append(ival)
                ispans.append(ispan)
            out_rules = []
            for guard, assigns, prio, rspan in rules:
                g = self.resolve(guard, aname)
                self.want(g, "bool")
                if prio < 0:
                    self.error(rspan, "priority must be non-negative")
                targets = set()
                out_assigns = []
                for ttok, rhs in assigns:
                    r = self.resolve(rhs, aname)
                    if ttok.text not in table:
                        self.error(ttok.span, f"agent {aname} has no variable '{ttok.text}'")
                    elif ttok.text in targets:
                        self.error(ttok.span, f"'{ttok.text}' assigned twice in one rule")
                    else:
                        self.check_value(r, table[ttok.text], ttok.span)
                    targets.add(ttok.text)
                    out_assigns.append((ttok.text, r))
                out_rules.append(GuardedRule(g, tuple(out_assigns), prio, rspan))
            agents.append(AgentDef(aname, tuple(vars_), tuple(init), tuple(out_rules),
                                   name_tok.span, tuple(ispans)))
        defines = []
        for name, (body, span) in self.raw_defines.items():
            e = self.expand_define(name, span)
            self.want(e, "bool")
            defines.append(Define(name, e, span))
        formulas = []
        seen = set()
        for name, body, span in self.raw_formulas:
            if name in seen:
                self.error(span, f"duplicate formula '{name}'")
            seen.add(name)
            f = self.lift(body)
            for a in ctl.atoms(f):
                self.want(a.expr, "bool")
            formulas.append(NamedFormula(name, f, span))
        if self.errors:
            raise min(self.errors, key=_key)
        return ModelDef(tuple(agents), tuple(defines), tuple(formulas))


def _lift(e):
    if isinstance(e, ex.Not):
        return ctl.Not(_lift(e.operand))
    if isinstance(e, ex.BoolOp):
        cls = {"and": ctl.And, "or": ctl.Or, "->": ctl.Implies}[e.op]
        return cls(_lift(e.left), _lift(e.right))
    return ctl.Atom(e)


def _comparable(a, b) -> bool:
    if a in ("int", "bool") or b in ("int", "bool"):
        return a == b
    if isinstance(a, tuple) and isinstance(b, tuple):
        return False
    if isinstance(a, tuple):
        a, b = b, a
    if isinstance(b, tuple):
        return b[1] in a.members
    return set(a.members) == set(b.members)


def _tname(t) -> str:
    if isinstance(t, EnumDomain):
        return "{" + ", ".join(t.members) + "}"
    if isinstance(t, tuple):
        return f"symbol {t[1]}"
    return str(t)


def _span_of(e):
    return getattr(e, "span", None)


def parse_model(text: str) -> ModelDef:
    """Parse and validate model text.

    Raises :class:`ParseError` for syntax errors and :class:`ValidationError`
    for the earliest semantic error.
    """
    agents, defines, formulas = _Parser(text).model()
    return _Resolver(agents, defines, formulas).build()


def parse_formula(text: str, model: Optional[ModelDef] = None) -> ctl.Formula:
    """Parse a CTL formula, resolving names against ``model`` when given.

    Without a model, ``Agent.var`` references are taken at face value and bare
    identifiers become enumeration symbols.
    """
    p = _Parser(text)
    p.ctl = True
    raw = p.implies()
    if p.peek().kind != "eof":
        p.fail("end of formula")
    if model is None:
        return _lift_unresolved(raw)
    r = _Resolver([], [(d.name, d.expr, d.span) for d in model.defines], [])
    for v in model.variables:
        r.decls[v.key] = v
        if isinstance(v.domain, EnumDomain):
            r.enum_members.update(v.domain.members)
    f = r.lift(raw)
    for a in ctl.atoms(f):
        r.want(a.expr, "bool")
    if r.errors:
        raise min(r.errors, key=_key)
    return f


def _lift_unresolved(f):
    def fix(e):
        if isinstance(e, ex.Name):
            return ex.Sym(e.name, e.span)
        if isinstance(e, ex.Not):
            return ex.Not(fix(e.operand), e.span)
        if isinstance(e, (ex.BoolOp, ex.Cmp, ex.Arith)):
            return type(e)(e.op, fix(e.left), fix(e.right), e.span)
        if isinstance(e, ex.Call):
            return ex.Call(e.fn, tuple(fix(a) for a in e.args), e.span)
        return e

    if isinstance(f, ctl.Atom):
        return _lift(fix(f.expr))
    if isinstance(f, (ctl.Not,) + ctl.UNARY_TEMPORAL):
        return type(f)(_lift_unresolved(f.arg))
    return type(f)(_lift_unresolved(f.left), _lift_unresolved(f.right))


# -- formatting ---------------------------------------------------------------

_PREC = {"->": 1, "or": 2, "and": 3}


def format_expr(e, agent: Optional[str] = None, prec: int = 0) -> str:
    """Render ``e``; variables of ``agent`` are printed unqualified."""
    if isinstance(e, ex.Int):
        return str(e.value)
    if isinstance(e, ex.Bool):
        return "true" if e.value else "false"
    if isinstance(e, (ex.Sym, ex.Name)):
        return e.name
    if isinstance(e, ex.Var):
        return e.name if e.agent == agent else f"{e.agent}.{e.name}"
    if isinstance(e, ex.Call):
        return f"{e.fn}(" + ", ".join(format_expr(a, agent) for a in e.args) + ")"
    if isinstance(e, ex.Not):
        return _wrap(f"not {format_expr(e.operand, agent, 4)}", prec > 4)
    if isinstance(e, ex.BoolOp):
        p = _PREC[e.op]
        lp, rp = (p + 1, p) if e.op == "->" else (p, p + 1)
        text = f"{format_expr(e.left, agent, lp)} {e.op} {format_expr(e.right, agent, rp)}"
        return _wrap(text, prec > p)
    if isinstance(e, ex.Cmp):
        text = f"{format_expr(e.left, agent, 6)} {e.op} {format_expr(e.right, agent, 6)}"
        return _wrap(text, prec > 5)
    if isinstance(e, ex.Arith):
        text = f"{format_expr(e.left, agent, 6)} {e.op} {format_expr(e.right, agent, 7)}"
        return _wrap(text, prec > 6)
    raise TypeError(f"cannot format {e!r}")


def _wrap(text: str, cond: bool) -> str:
    return f"({text})" if cond else text


def format_formula(f: ctl.Formula, prec: int = 0) -> str:
    if isinstance(f, ctl.Atom):
        return format_expr(f.expr, None, max(prec, 0))
    if isinstance(f, ctl.Not):
        return _wrap(f"not {format_formula(f.arg, 4)}", prec > 4)
    if isinstance(f, (ctl.And, ctl.Or, ctl.Implies)):
        op = {ctl.And: "and", ctl.Or: "or", ctl.Implies: "->"}[type(f)]
        p = _PREC[op]
        lp, rp = (p + 1, p) if op == "->" else (p, p + 1)
        return _wrap(f"{format_formula(f.left, lp)} {op} {format_formula(f.right, rp)}", prec > p)
    for name, cls in TEMPORAL_UNARY.items():
        if isinstance(f, cls):
            return f"{name}({format_formula(f.arg)})"
    if isinstance(f, (ctl.EU, ctl.AU)):
        q = "E" if isinstance(f, ctl.EU) else "A"
        return f"{q}[{format_formula(f.left)} U {format_formula(f.right)}]"
    raise TypeError(f"cannot format {f!r}")


def _format_domain(d) -> str:
    if isinstance(d, EnumDomain):
        return "{" + ", ".join(d.members) + "}"
    return f"{d.lo}..{d.hi}"


def format_model(m: ModelDef) -> str:
    """Canonical text of ``m``: agents, then defines, then formulas."""
    out = []
    for a in m.agents:
        out.append(f"agent {a.name} {{")
        for v, init in zip(a.vars, a.init):
            out.append(f"  var {v.name} : {_format_domain(v.domain)} init {init};")
        for r in a.rules:
            prio = f"[prio {r.priority}] " if r.priority != DEFAULT_PRIORITY else ""
            assigns = ", ".join(f"{t} := {format_expr(e, a.name)}" for t, e in r.assignments)
            out.append(f"  rule {prio}{format_expr(r.guard, a.name, 2)} -> {assigns};")
        out.append("}")
        out.append("")
    for d in m.defines:
        out.append(f"define {d.name} := {format_expr(d.expr)};")
    if m.defines:
        out.append("")
    for nf in m.formulas:
        out.append(f"formula {nf.name} := {format_formula(nf.formula)};")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"
