"""Guarded events, parallel substitutions, and abstract systems.

An event is observable exactly when its guard holds for some binding of its
bound variables; firing evaluates every right-hand side against the
pre-state and applies all assignments simultaneously.  Variables not
assigned keep their value.

The SELECT form is the ANY form with no bound variables.  Bound variables
enumerate over finite domains; for an event written ``ANY v WHERE v : D &
...`` the domain is the leading ``v : D`` conjunct, resolved once by
`resolve_domains` (the language front end does this for parsed models).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Tuple

from .exprs import (
    And, Compr, Exists, Expr, Forall, In, Node, Pred, Ref, TrueP, conjuncts,
    free_refs,
)
from .evaluate import EvalError, eval_expr, eval_pred
from .values import Atom, Scope, SetV, State, StateSpace, Value, atoms_of


class SystemError_(Exception):
    """Ill-formed system (duplicate assignment, missing initialisation...)."""


class GuardNotSatisfied(Exception):
    """fire() called with a binding whose guard is false."""


# ------------------------------------------------------------------- actions

@dataclass(frozen=True)
class Assign:
    """Parallel multi-assignment ``v1, v2 := e1, e2``."""
    targets: Tuple[str, ...]
    exprs: Tuple[Expr, ...]


@dataclass(frozen=True)
class LetIn:
    """``LET x BE x = e IN body END``; e is evaluated eagerly against the
    pre-state and x is visible to the body only."""
    name: str
    expr: Expr
    body: Tuple["ActionItem", ...]


ActionItem = Assign | LetIn


@dataclass(frozen=True)
class Action:
    items: Tuple[ActionItem, ...]


def assigned_vars(action: Action) -> list[str]:
    out: list[str] = []

    def walk(items):
        for it in items:
            if isinstance(it, Assign):
                out.extend(it.targets)
            else:
                walk(it.body)

    walk(action.items)
    return out


# -------------------------------------------------------------------- events

@dataclass(frozen=True)
class Event:
    name: str
    params: Tuple[str, ...]
    guard: Pred
    action: Action
    domains: Optional[Tuple[Expr, ...]] = None


@dataclass(frozen=True)
class VarDecl:
    """Variable with its typing declaration: ``v : T`` or ``v <: T``.

    The op/type pair drives constraint-based universe enumeration; parsed
    models get it from the first typing conjunct of the invariant.
    """
    name: str
    op: Optional[str] = None  # ":" (member) or "<:" (subset)
    type_expr: Optional[Expr] = None


@dataclass(frozen=True)
class AbstractSystem:
    name: str
    carriers: Tuple[str, ...]
    consts: Tuple[Tuple[str, Optional[Expr]], ...]
    variables: Tuple[VarDecl, ...]
    invariant: Pred
    init: Action
    events: Tuple[Event, ...]
    # Raw constant-defining predicate as written (PROPERTIES section); the
    # type checker turns its equations into the consts expressions.
    properties: Optional[Pred] = None

    def var_names(self) -> Tuple[str, ...]:
        return tuple(d.name for d in self.variables)

    def event(self, name: str) -> Event:
        for ev in self.events:
            if ev.name == name:
                return ev
        raise KeyError(name)


# -------------------------------------------------------- domain resolution

def _leading_domain(all_vars: Sequence[str], i: int, body: Pred) -> Expr:
    """First ``v : D`` conjunct of `body` for the i-th bound variable; D may
    use state and earlier bound variables, but not v itself or later ones."""
    var = all_vars[i]
    for c in conjuncts(body):
        if isinstance(c, In) and isinstance(c.item, Ref) and c.item.name == var:
            bad = free_refs(c.coll) & set(all_vars[i:])
            if bad:
                raise SystemError_(
                    f"domain of '{var}' depends on {', '.join(sorted(bad))}"
                )
            return c.coll
    raise SystemError_(f"no 'v : D' typing conjunct found for bound variable '{var}'")


def _resolve_pred(p: Pred) -> Pred:
    if isinstance(p, (Exists, Forall)):
        body = _resolve_pred(p.body)
        domains = tuple(_leading_domain(p.vars, i, body) for i in range(len(p.vars)))
        return replace(p, body=body, domains=domains)
    if isinstance(p, And):
        return replace(p, left=_resolve_pred(p.left), right=_resolve_pred(p.right))
    for attr in ("left", "right", "body"):
        v = getattr(p, attr, None)
        if isinstance(v, Pred):
            p = replace(p, **{attr: _resolve_pred(v)})
    if isinstance(p, Node):
        # Comprehensions inside expressions may carry quantified predicates.
        p = _resolve_in_exprs(p)
    return p


def _resolve_in_exprs(node):
    from dataclasses import fields

    changes = {}
    for f in fields(node):
        if f.name in ("span", "domains"):
            continue
        v = getattr(node, f.name)
        if isinstance(v, Pred):
            nv = _resolve_pred(v)
            if nv is not v:
                changes[f.name] = nv
        elif isinstance(v, Node):
            nv = _resolve_in_exprs(v)
            if nv is not v:
                changes[f.name] = nv
        elif isinstance(v, tuple) and v and isinstance(v[0], Node):
            nv = tuple(_resolve_in_exprs(x) for x in v)
            if nv != v:
                changes[f.name] = nv
    return replace(node, **changes) if changes else node


def _resolve_action(a: Action) -> Action:
    def walk(items):
        return tuple(
            Assign(it.targets, tuple(_resolve_in_exprs(e) for e in it.exprs))
            if isinstance(it, Assign)
            else LetIn(it.name, _resolve_in_exprs(it.expr), walk(it.body))
            for it in items
        )

    return Action(walk(a.items))


def resolve_domains(system: AbstractSystem) -> AbstractSystem:
    """Fill enumeration domains for event parameters and quantifiers.

    Each bound variable must have a leading ``v : D`` typing conjunct in
    the guard (or quantifier body) it belongs to.
    """
    events = []
    for ev in system.events:
        guard = _resolve_pred(ev.guard)
        domains = tuple(
            _leading_domain(ev.params, i, guard) for i in range(len(ev.params))
        )
        events.append(
            replace(ev, guard=guard, domains=domains, action=_resolve_action(ev.action))
        )
    return replace(
        system,
        invariant=_resolve_pred(system.invariant),
        init=_resolve_action(system.init),
        events=tuple(events),
    )


# --------------------------------------------------------------- well-formed

def validate_system(system: AbstractSystem) -> None:
    declared = set(system.var_names())
    if len(declared) != len(system.variables):
        raise SystemError_(f"duplicate variable declarations in {system.name}")
    init_targets = assigned_vars(system.init)
    if len(init_targets) != len(set(init_targets)):
        raise SystemError_("initialisation assigns a variable twice")
    missing = declared - set(init_targets)
    if missing:
        raise SystemError_(
            f"initialisation does not assign: {', '.join(sorted(missing))}"
        )
    extra = set(init_targets) - declared
    if extra:
        raise SystemError_(
            f"initialisation assigns undeclared: {', '.join(sorted(extra))}"
        )
    for ev in system.events:
        targets = assigned_vars(ev.action)
        dup = {t for t in targets if targets.count(t) > 1}
        if dup:
            raise SystemError_(
                f"event {ev.name} assigns twice: {', '.join(sorted(dup))}"
            )
        undecl = set(targets) - declared
        if undecl:
            raise SystemError_(
                f"event {ev.name} assigns undeclared: {', '.join(sorted(undecl))}"
            )


# -------------------------------------------------------------------- firing

def _run_action(
    items: Tuple[ActionItem, ...],
    env: dict,
    state: State,
    updates: dict,
) -> None:
    for it in items:
        if isinstance(it, Assign):
            for target, ex in zip(it.targets, it.exprs):
                if target in updates:
                    raise SystemError_(f"variable '{target}' assigned twice")
                updates[target] = eval_expr(ex, env, state)
        else:
            child = dict(env)
            child[it.name] = eval_expr(it.expr, env, state)
            _run_action(it.body, child, state, updates)


def fire(event: Event, env: Mapping[str, Value], state: State) -> State:
    """Apply `event` under `env`; the guard must hold.

    All right-hand sides see the pre-state; assignments land simultaneously
    and unassigned variables are untouched.
    """
    if not eval_pred(event.guard, env, state):
        raise GuardNotSatisfied(f"guard of {event.name} is false under {dict(env)!r}")
    updates: dict = {}
    _run_action(event.action.items, dict(env), state, updates)
    unknown = [v for v in updates if v not in state.space.index]
    if unknown:
        raise SystemError_(f"assignment to undeclared variable {unknown[0]!r}")
    return state.replace(updates)


def enabled_bindings(
    event: Event, state: State, fresh: bool = True
) -> list[dict[str, Value]]:
    """All bindings under which the event's guard holds, in lexicographic
    (bound-variable order, value order) enumeration order.

    With `fresh` on, atoms that occur nowhere in the state (nor in earlier
    positions of the binding being built) are interchangeable, so only the
    least such atom per carrier is offered for each position.  This cuts
    symmetric duplicates; pass fresh=False for the full enumeration.
    """
    if event.params and event.domains is None:
        raise SystemError_(
            f"event {event.name} has unresolved bound-variable domains"
        )
    out: list[dict[str, Value]] = []
    used = state.atom_set() if fresh else None

    def rec(i: int, env: dict):
        if i == len(event.params):
            if eval_pred(event.guard, env, state):
                out.append(dict(env))
            return
        dom = eval_expr(event.domains[i], env, state)
        if type(dom) is not SetV:
            raise EvalError(
                f"domain of '{event.params[i]}' in {event.name} is not a set"
            )
        fresh_seen: set[str] = set()
        env_atoms = None
        if fresh:
            env_atoms = set()
            for v in env.values():
                atoms_of(v, env_atoms)
        for v in dom.elems:
            if fresh and type(v) is Atom and v not in used and v not in env_atoms:
                if v.carrier in fresh_seen:
                    continue
                fresh_seen.add(v.carrier)
            env[event.params[i]] = v
            rec(i + 1, env)
        env.pop(event.params[i], None)

    rec(0, {})
    return out


# ------------------------------------------------------------ initialisation

def eval_constants(system: AbstractSystem, scope: Scope) -> dict[str, Value]:
    """Evaluate constant definitions in declaration order."""
    consts: dict[str, Value] = {}
    probe = StateSpace(scope, (), consts)
    empty = probe.make(())
    for name, ex in system.consts:
        if ex is None:
            raise SystemError_(f"constant '{name}' has no defining equation")
        consts[name] = eval_expr(ex, {}, empty)
    return consts


def initial_state(system: AbstractSystem, scope: Scope) -> State:
    """Run the initialisation; every variable must be assigned."""
    for c in system.carriers:
        if c not in scope:
            raise SystemError_(f"scope does not cover carrier '{c}'")
    consts = eval_constants(system, scope)
    space = StateSpace(scope, system.var_names(), consts)
    # Init right-hand sides are closed over constants and carriers; a probe
    # state with no variables makes any variable read a DefinitionError.
    probe = StateSpace(scope, (), consts).make(())
    updates: dict = {}
    _run_action(system.init.items, {}, probe, updates)
    missing = [n for n in space.names if n not in updates]
    if missing:
        raise SystemError_(
            f"initialisation does not assign: {', '.join(missing)}"
        )
    return space.from_mapping(updates)
