"""Explicit-state CTL model checking of synchronously composed agents."""

from kmc.ctl import CheckOutcome, Trace, check, counterexample, normalize, sat
from kmc.errors import (
    DomainViolation,
    KmcError,
    ParseError,
    SourceSpan,
    StateLimitExceeded,
    UnresolvedVariable,
    UnsupportedFragment,
    ValidationError,
)
from kmc.expr import eval_expr
from kmc.graph import DEFAULT_STATE_LIMIT, StateGraph, build_state_graph
from kmc.lang import format_formula, format_model, parse_formula, parse_model
from kmc.model import (
    AgentDef,
    GlobalState,
    ModelDef,
    enabled_moves,
    initial_states,
    successors,
)

__version__ = "0.1.0"

__all__ = [
    "AgentDef", "CheckOutcome", "DEFAULT_STATE_LIMIT", "DomainViolation", "GlobalState",
    "KmcError", "ModelDef", "ParseError", "SourceSpan", "StateGraph", "StateLimitExceeded",
    "Trace", "UnresolvedVariable", "UnsupportedFragment", "ValidationError",
    "build_state_graph", "check", "counterexample", "enabled_moves", "eval_expr",
    "format_formula", "format_model", "initial_states", "normalize", "parse_formula",
    "parse_model", "sat", "successors",
]
