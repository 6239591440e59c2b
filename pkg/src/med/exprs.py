"""Expression and predicate ASTs over the finite value algebra.

Nodes are frozen dataclasses, so structural equality and hashing come for
free; source spans carry position information but never take part in
comparisons.  Relation-space nodes (``A <-> B``, ``A +-> B``) denote value
spaces and only make sense on the right of a membership test; evaluating
them as plain expressions is an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional, Tuple


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_col: int | None = None


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Node:
    pass


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Expr(Node):
    pass


@dataclass(frozen=True)
class Ref(Expr):
    """Reference resolved at evaluation time: bound var, state var,
    constant, or carrier set (in that order)."""
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class SetEnum(Expr):
    """Enumerated set ``{e1, e2, ...}``; ``{}`` is the empty set."""
    items: Tuple[Expr, ...]
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Maplet(Expr):
    """Pair constructor ``a |-> b``."""
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Interval(Expr):
    """Integer range ``lo .. hi`` (empty when lo > hi)."""
    lo: Expr
    hi: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Union(Expr):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Inter(Expr):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Diff(Expr):
    """Set difference, or bounded integer subtraction on integers."""
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Cross(Expr):
    """Cartesian product ``S * T``."""
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Add(Expr):
    """Bounded integer addition."""
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Override(Expr):
    """Relational override ``r <+ s``: s wins on common domain points."""
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class DomSub(Expr):
    """Domain anti-restriction ``S <<| r``: drop pairs whose left is in S."""
    keys: Expr
    rel: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Image(Expr):
    """Relational image ``r[S]``."""
    rel: Expr
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Inverse(Expr):
    """Relational inverse ``r~``."""
    rel: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Dom(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Ran(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Apply(Expr):
    """Function application ``f(x)``; errors outside the domain or when
    the relation is not functional at x."""
    fn: Expr
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Compr(Expr):
    """Set comprehension ``{v | v : domain & pred}`` over a finite domain."""
    var: str
    domain: Expr
    pred: "Pred"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class RelSpace(Expr):
    """Relation space ``A <-> B``; usable only as a membership target."""
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class PFunSpace(Expr):
    """Partial-function space ``A +-> B``; membership target only."""
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


# ----------------------------------------------------------------- predicates

@dataclass(frozen=True)
class Pred(Node):
    pass


@dataclass(frozen=True)
class TrueP(Pred):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class FalseP(Pred):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class In(Pred):
    item: Expr
    coll: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class NotIn(Pred):
    item: Expr
    coll: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Subset(Pred):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Eq(Pred):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Neq(Pred):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Lt(Pred):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Le(Pred):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Gt(Pred):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Ge(Pred):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class And(Pred):
    """Short-circuit conjunction (left to right, like the guards it models)."""
    left: Pred
    right: Pred
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Or(Pred):
    left: Pred
    right: Pred
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Not(Pred):
    body: Pred
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Implies(Pred):
    left: Pred
    right: Pred
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Exists(Pred):
    """``#v1,v2.(P)``; enumeration domains are resolved from the leading
    ``v : D`` conjuncts of the body and cached here (not compared)."""
    vars: Tuple[str, ...]
    body: Pred
    domains: Optional[Tuple[Expr, ...]] = field(default=None, compare=False, repr=False)
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Forall(Pred):
    """``!v1,v2.(P)``; same domain convention as Exists."""
    vars: Tuple[str, ...]
    body: Pred
    domains: Optional[Tuple[Expr, ...]] = field(default=None, compare=False, repr=False)
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Functional(Pred):
    """``FUNCTIONAL(e)``: e is a relation mapping each domain point to at
    most one value.  Doubles as the annotation licensing ``e(x)``."""
    rel: Expr
    span: Optional[Span] = _span_field()


# ------------------------------------------------------------------- helpers

def conjuncts(p: Pred) -> list[Pred]:
    """Flatten a conjunction tree into its top-level conjuncts."""
    out: list[Pred] = []
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, And):
            stack.append(q.right)
            stack.append(q.left)
        else:
            out.append(q)
    return out


def conjoin(ps: list[Pred]) -> Pred:
    if not ps:
        return TrueP()
    out = ps[0]
    for q in ps[1:]:
        out = And(out, q)
    return out


def and_spine(p: Pred) -> list[Pred]:
    """Split only the left-associative spine of a conjunction.

    Unlike `conjuncts` this preserves tree shape: rebuilding the result
    with `conjoin` gives back an equal predicate, which the printer relies
    on for round-trip fidelity.
    """
    out: list[Pred] = []
    while isinstance(p, And):
        out.append(p.right)
        p = p.left
    out.append(p)
    out.reverse()
    return out


def free_refs(node: Node, bound: frozenset = frozenset()) -> set[str]:
    """Names referenced by `node` that are not locally bound."""
    out: set[str] = set()

    def walk(n, bound):
        if isinstance(n, Ref):
            if n.name not in bound:
                out.add(n.name)
            return
        if isinstance(n, Compr):
            walk(n.domain, bound)
            walk(n.pred, bound | {n.var})
            return
        if isinstance(n, (Exists, Forall)):
            walk(n.body, bound | set(n.vars))
            return
        for f in fields(n):
            if f.name == "span":
                continue
            v = getattr(n, f.name)
            if isinstance(v, Node):
                walk(v, bound)
            elif isinstance(v, tuple):
                for item in v:
                    if isinstance(item, Node):
                        walk(item, bound)

    walk(node, bound)
    return out
