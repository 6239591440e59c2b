"""Constraint-based invariant preservation checking.

Instead of exploring from the initialisation, enumerate *every* state of
the scoped universe that satisfies the invariant, fire every enabled
binding of every event, and report post-states that break the invariant.
An empty result means each event preserves the invariant at this scope,
reachable or not.

The universe is derived from the variables' typing declarations
(``v <: S`` gives subsets, ``v : A <-> B`` relations, ``v : A +-> B``
partial functions, ``v : lo..hi`` integers), overapproximating
value-dependent bounds by their carrier spaces.  Enumeration refuses to
run when the universe size exceeds the configured cap (MED_MAX_UNIVERSE).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from .evaluate import eval_expr, eval_pred
from .events import AbstractSystem, VarDecl, enabled_bindings, eval_constants, fire
from .exprs import (
    Cross, Expr, Interval, PFunSpace, Pred, Ref, RelSpace, Union, conjuncts,
)
from .explore import Binding
from .values import PairV, Scope, SetV, State, StateSpace, Value, mkset

DEFAULT_MAX_UNIVERSE = 1_000_000
ENV_MAX_UNIVERSE = "MED_MAX_UNIVERSE"


class CbcError(Exception):
    pass


class UniverseTooLarge(CbcError):
    def __init__(self, size: int, bound: int):
        super().__init__(
            f"state universe has {size} candidate states, above the cap of "
            f"{bound}; raise {ENV_MAX_UNIVERSE} or shrink the scope"
        )
        self.size = size
        self.bound = bound


@dataclass(frozen=True)
class CbcViolation:
    state: State
    event: str
    binding: Binding
    conjunct: str  # pretty-printed invariant conjunct that fails afterwards


def _elem_space(expr: Expr, system: AbstractSystem, probe: State) -> tuple[Value, ...]:
    """Possible elements of the set denoted by a typing expression."""
    if isinstance(expr, Ref):
        if expr.name in probe.space.scope:
            return probe.space.scope.atoms(expr.name)
        for decl in system.variables:
            if decl.name == expr.name:
                if decl.op == "<:":
                    return _elem_space(decl.type_expr, system, probe)
                if decl.op == ":":
                    inner = decl.type_expr
                    if isinstance(inner, (RelSpace, PFunSpace)):
                        return _pair_space(inner, system, probe)
                    return _elem_space(inner, system, probe)
                raise CbcError(f"variable '{expr.name}' has no typing declaration")
        # Constant sets are fine: evaluate directly.
        v = eval_expr(expr, {}, probe)
        if isinstance(v, SetV):
            return v.elems
        raise CbcError(f"'{expr.name}' does not denote a set")
    if isinstance(expr, Interval):
        v = eval_expr(expr, {}, probe)
        return v.elems
    if isinstance(expr, Cross):
        return _pair_space_of(
            _elem_space(expr.left, system, probe),
            _elem_space(expr.right, system, probe),
        )
    if isinstance(expr, Union):
        return tuple(
            mkset(
                _elem_space(expr.left, system, probe)
                + _elem_space(expr.right, system, probe)
            )
        )
    if isinstance(expr, (RelSpace, PFunSpace)):
        raise CbcError("nested relation spaces are not enumerable")
    v = eval_expr(expr, {}, probe)
    if isinstance(v, SetV):
        return v.elems
    raise CbcError(f"cannot derive an element space from {type(expr).__name__}")


def _pair_space_of(a, b):
    return tuple(PairV(x, y) for x in a for y in b)


def _pair_space(space, system, probe):
    return _pair_space_of(
        _elem_space(space.left, system, probe),
        _elem_space(space.right, system, probe),
    )


def _subsets(elems: tuple[Value, ...]):
    n = len(elems)
    for mask in range(1 << n):
        yield mkset(elems[i] for i in range(n) if mask >> i & 1)


def _partial_functions(dom: tuple[Value, ...], ran: tuple[Value, ...]):
    choices = [(None, *ran) for _ in dom]
    for pick in itertools.product(*choices):
        yield mkset(
            PairV(d, r) for d, r in zip(dom, pick) if r is not None
        )


def _var_space(decl: VarDecl, system, probe):
    """(count, value iterator) for one variable's candidate values."""
    if decl.op is None or decl.type_expr is None:
        raise CbcError(f"variable '{decl.name}' has no typing declaration")
    if decl.op == "<:":
        elems = _elem_space(decl.type_expr, system, probe)
        return 1 << len(elems), _subsets(elems)
    te = decl.type_expr
    if isinstance(te, RelSpace):
        pairs = _pair_space(te, system, probe)
        return 1 << len(pairs), _subsets(pairs)
    if isinstance(te, PFunSpace):
        dom = _elem_space(te.left, system, probe)
        ran = _elem_space(te.right, system, probe)
        return (len(ran) + 1) ** len(dom), _partial_functions(dom, ran)
    # Scalar membership, e.g. n : 0..2 or x : NODE.
    elems = _elem_space(te, system, probe)
    return len(elems), iter(elems)


def universe_size(system: AbstractSystem, scope: Scope) -> int:
    consts = eval_constants(system, scope)
    probe = StateSpace(scope, (), consts).make(())
    total = 1
    for decl in system.variables:
        count, _ = _var_space(decl, system, probe)
        total *= count
    return total


def enumerate_universe(system: AbstractSystem, scope: Scope, bound: int):
    """Yield every candidate state (invariant not yet applied)."""
    consts = eval_constants(system, scope)
    probe = StateSpace(scope, (), consts).make(())
    counts = []
    iters = []
    for decl in system.variables:
        count, it = _var_space(decl, system, probe)
        counts.append(count)
        iters.append(list(it))
    total = 1
    for c in counts:
        total *= c
    if total > bound:
        raise UniverseTooLarge(total, bound)
    space = StateSpace(scope, system.var_names(), consts)
    names = [d.name for d in system.variables]
    order = [names.index(n) for n in space.names]
    for combo in itertools.product(*iters):
        yield space.make(tuple(combo[i] for i in order))


def configured_bound(explicit: int | None = None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get(ENV_MAX_UNIVERSE)
    return int(env) if env else DEFAULT_MAX_UNIVERSE


def cbc_check(
    system: AbstractSystem,
    scope: Scope,
    *,
    max_universe: int | None = None,
) -> list[CbcViolation]:
    """All (state, event, binding, conjunct) cases where firing an enabled
    event from an invariant-satisfying state breaks the invariant."""
    from .lang.printer import pred_text  # late import; printer is optional here

    bound = configured_bound(max_universe)
    inv_conjuncts = conjuncts(system.invariant)
    out: list[CbcViolation] = []
    for st in enumerate_universe(system, scope, bound):
        if not eval_pred(system.invariant, {}, st):
            continue
        for ev in system.events:
            for env in enabled_bindings(ev, st, fresh=False):
                post = fire(ev, env, st)
                if eval_pred(system.invariant, {}, post):
                    continue
                broken = next(
                    (c for c in inv_conjuncts if not eval_pred(c, {}, post)),
                    system.invariant,
                )
                out.append(
                    CbcViolation(st, ev.name, tuple(env.items()), pred_text(broken))
                )
    return out
