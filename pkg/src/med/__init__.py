"""med: explicit-state exploration and temporal analysis for guarded-event
abstract systems, bundled with a mobile ad-hoc network routing case study.
"""

__version__ = "0.1.0"

from .values import (
    Atom, BoolV, IntV, PairV, SetV, Scope, State, StateSpace, canonical_digest,
    mkset, render_value,
)
from .events import (
    AbstractSystem, Action, Assign, Event, LetIn, VarDecl, enabled_bindings,
    fire, initial_state, resolve_domains, validate_system,
)
from .explore import (
    CoverageReport, StateGraph, Trace, coverage, explore, find_deadlocks,
    find_invariant_violation,
)
from .cbc import CbcViolation, UniverseTooLarge, cbc_check

__all__ = [
    "Atom", "BoolV", "IntV", "PairV", "SetV", "Scope", "State", "StateSpace",
    "canonical_digest", "mkset", "render_value",
    "AbstractSystem", "Action", "Assign", "Event", "LetIn", "VarDecl",
    "enabled_bindings", "fire", "initial_state", "resolve_domains",
    "validate_system",
    "CoverageReport", "StateGraph", "Trace", "coverage", "explore",
    "find_deadlocks", "find_invariant_violation",
    "CbcViolation", "UniverseTooLarge", "cbc_check",
    "__version__",
]
