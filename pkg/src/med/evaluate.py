"""Evaluation of expressions and predicates in a state.

Everything is enumerative: quantifiers and comprehensions walk their finite
domains, conjunction and disjunction short-circuit left to right (guards
rely on this to keep partial applications well defined), and integers are
bounded by the scope.  Evaluation never mutates the state.
"""

from __future__ import annotations

from typing import Mapping

from .exprs import (
    Add, Apply, BoolLit, Compr, Cross, Diff, Dom, DomSub, Eq, Exists, Expr,
    FalseP, Forall, Functional, Ge, Gt, Image, Implies, In, Inter, IntLit,
    Interval, Inverse, Le, Lt, Maplet, Neq, Not, NotIn, Or, Override,
    PFunSpace, Pred, Ran, Ref, RelSpace, SetEnum, Subset, TrueP, Union, And,
)
from .values import (
    EMPTY_SET, FALSE, TRUE, BoolV, IntV, PairV, SetV, State, Value, mkset,
    render_value,
)


class EvalError(Exception):
    """Evaluation failure (type misuse, partial application, bounds)."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class DefinitionError(EvalError):
    """Reference to a name that is bound nowhere."""


def _want_set(v: Value, what: str, node) -> SetV:
    if type(v) is not SetV:
        raise EvalError(f"{what} expects a set, got {render_value(v)}", node)
    return v


def _want_int(v: Value, what: str, node) -> int:
    if type(v) is not IntV:
        raise EvalError(f"{what} expects an integer, got {render_value(v)}", node)
    return v.value


def _pairs(v: SetV, what: str, node):
    for e in v.elems:
        if type(e) is not PairV:
            raise EvalError(
                f"{what} expects a relation, found element {render_value(e)}", node
            )
    return v.elems


def eval_expr(e: Expr, env: Mapping[str, Value], state: State) -> Value:
    t = type(e)

    if t is Ref:
        v = env.get(e.name)
        if v is not None:
            return v
        space = state.space
        i = space.index.get(e.name)
        if i is not None:
            return state.values[i]
        v = space.consts.get(e.name)
        if v is not None:
            return v
        if e.name in space.scope:
            return space.scope.carrier_set(e.name)
        raise DefinitionError(f"unbound name '{e.name}'", e)

    if t is IntLit:
        if not (0 <= e.value <= state.space.scope.max_int):
            raise EvalError(
                f"integer literal {e.value} outside 0..{state.space.scope.max_int}", e
            )
        return IntV(e.value)

    if t is BoolLit:
        return TRUE if e.value else FALSE

    if t is SetEnum:
        return mkset(eval_expr(item, env, state) for item in e.items)

    if t is Maplet:
        return PairV(eval_expr(e.left, env, state), eval_expr(e.right, env, state))

    if t is Interval:
        lo = _want_int(eval_expr(e.lo, env, state), "'..'", e)
        hi = _want_int(eval_expr(e.hi, env, state), "'..'", e)
        bound = state.space.scope.max_int
        if lo < 0 or hi > bound:
            raise EvalError(f"interval {lo}..{hi} exceeds integer bound 0..{bound}", e)
        return SetV(tuple(IntV(i) for i in range(lo, hi + 1)))

    if t is Union:
        a = _want_set(eval_expr(e.left, env, state), "'\\/'", e)
        b = _want_set(eval_expr(e.right, env, state), "'\\/'", e)
        return mkset(a.elems + b.elems)

    if t is Inter:
        a = _want_set(eval_expr(e.left, env, state), "'/\\'", e)
        b = _want_set(eval_expr(e.right, env, state), "'/\\'", e)
        keys = {x._key for x in b.elems}
        return SetV(tuple(x for x in a.elems if x._key in keys))

    if t is Diff:
        a = eval_expr(e.left, env, state)
        b = eval_expr(e.right, env, state)
        if type(a) is IntV and type(b) is IntV:
            r = a.value - b.value
            if r < 0:
                raise EvalError(f"integer underflow: {a.value} - {b.value}", e)
            return IntV(r)
        a = _want_set(a, "'-'", e)
        b = _want_set(b, "'-'", e)
        keys = {x._key for x in b.elems}
        return SetV(tuple(x for x in a.elems if x._key not in keys))

    if t is Cross:
        a = _want_set(eval_expr(e.left, env, state), "'*'", e)
        b = _want_set(eval_expr(e.right, env, state), "'*'", e)
        return mkset(PairV(x, y) for x in a.elems for y in b.elems)

    if t is Add:
        a = _want_int(eval_expr(e.left, env, state), "'+'", e)
        b = _want_int(eval_expr(e.right, env, state), "'+'", e)
        r = a + b
        bound = state.space.scope.max_int
        if r > bound:
            raise EvalError(f"integer overflow: {a} + {b} > {bound}", e)
        return IntV(r)

    if t is Override:
        a = _pairs(_want_set(eval_expr(e.left, env, state), "'<+'", e), "'<+'", e)
        b = _want_set(eval_expr(e.right, env, state), "'<+'", e)
        newdom = {p.left._key for p in _pairs(b, "'<+'", e)}
        return mkset(
            tuple(p for p in a if p.left._key not in newdom) + b.elems
        )

    if t is DomSub:
        keys = _want_set(eval_expr(e.keys, env, state), "'<<|'", e)
        rel = _want_set(eval_expr(e.rel, env, state), "'<<|'", e)
        drop = {x._key for x in keys.elems}
        return SetV(
            tuple(p for p in _pairs(rel, "'<<|'", e) if p.left._key not in drop)
        )

    if t is Image:
        rel = _want_set(eval_expr(e.rel, env, state), "image", e)
        arg = _want_set(eval_expr(e.arg, env, state), "image", e)
        keys = {x._key for x in arg.elems}
        return mkset(p.right for p in _pairs(rel, "image", e) if p.left._key in keys)

    if t is Inverse:
        rel = _want_set(eval_expr(e.rel, env, state), "'~'", e)
        return mkset(PairV(p.right, p.left) for p in _pairs(rel, "'~'", e))

    if t is Dom:
        rel = _want_set(eval_expr(e.arg, env, state), "dom", e)
        return mkset(p.left for p in _pairs(rel, "dom", e))

    if t is Ran:
        rel = _want_set(eval_expr(e.arg, env, state), "ran", e)
        return mkset(p.right for p in _pairs(rel, "ran", e))

    if t is Apply:
        rel = _want_set(eval_expr(e.fn, env, state), "application", e)
        x = eval_expr(e.arg, env, state)
        hits = [p.right for p in _pairs(rel, "application", e) if p.left == x]
        if not hits:
            raise EvalError(
                f"application outside domain: no pair for {render_value(x)}", e
            )
        first = hits[0]
        for h in hits[1:]:
            if h != first:
                raise EvalError(
                    f"application of non-functional relation at {render_value(x)}", e
                )
        return first

    if t is Compr:
        dom = _want_set(eval_expr(e.domain, env, state), "comprehension", e)
        child = dict(env)
        out = []
        for v in dom.elems:
            child[e.var] = v
            if eval_pred(e.pred, child, state):
                out.append(v)
        return SetV(tuple(out))  # domain already canonical

    if t is RelSpace or t is PFunSpace:
        raise EvalError(
            "relation space is not enumerable; use it as the target of ':'", e
        )

    raise EvalError(f"cannot evaluate {type(e).__name__}", e)


def _is_functional(pairs) -> bool:
    seen: dict = {}
    for p in pairs:
        k = p.left._key
        if k in seen:
            if seen[k] != p.right._key:
                return False
        else:
            seen[k] = p.right._key
    return True


def eval_pred(p: Pred, env: Mapping[str, Value], state: State) -> bool:
    t = type(p)

    if t is And:
        return eval_pred(p.left, env, state) and eval_pred(p.right, env, state)
    if t is Or:
        return eval_pred(p.left, env, state) or eval_pred(p.right, env, state)
    if t is Not:
        return not eval_pred(p.body, env, state)
    if t is Implies:
        return (not eval_pred(p.left, env, state)) or eval_pred(p.right, env, state)
    if t is TrueP:
        return True
    if t is FalseP:
        return False

    if t is In or t is NotIn:
        coll = p.coll
        tc = type(coll)
        if tc is RelSpace or tc is PFunSpace:
            item = eval_expr(p.item, env, state)
            item = _want_set(item, "relation-space membership", p)
            a = _want_set(eval_expr(coll.left, env, state), "'<->'", coll)
            b = _want_set(eval_expr(coll.right, env, state), "'<->'", coll)
            akeys = {x._key for x in a.elems}
            bkeys = {x._key for x in b.elems}
            pairs = _pairs(item, "relation-space membership", p)
            ok = all(q.left._key in akeys and q.right._key in bkeys for q in pairs)
            if ok and tc is PFunSpace:
                ok = _is_functional(pairs)
        else:
            item = eval_expr(p.item, env, state)
            ok = item in _want_set(eval_expr(coll, env, state), "':'", p)
        return ok if t is In else not ok

    if t is Subset:
        a = _want_set(eval_expr(p.left, env, state), "'<:'", p)
        b = _want_set(eval_expr(p.right, env, state), "'<:'", p)
        keys = {x._key for x in b.elems}
        return all(x._key in keys for x in a.elems)

    if t is Eq:
        return eval_expr(p.left, env, state) == eval_expr(p.right, env, state)
    if t is Neq:
        return eval_expr(p.left, env, state) != eval_expr(p.right, env, state)

    if t in (Lt, Le, Gt, Ge):
        a = _want_int(eval_expr(p.left, env, state), "comparison", p)
        b = _want_int(eval_expr(p.right, env, state), "comparison", p)
        if t is Lt:
            return a < b
        if t is Le:
            return a <= b
        if t is Gt:
            return a > b
        return a >= b

    if t is Exists or t is Forall:
        if p.domains is None:
            raise EvalError(
                "quantifier has unresolved domains; run domain resolution first", p
            )
        return _eval_quant(p, env, state, 0, dict(env))

    if t is Functional:
        rel = _want_set(eval_expr(p.rel, env, state), "FUNCTIONAL", p)
        return _is_functional(_pairs(rel, "FUNCTIONAL", p))

    raise EvalError(f"cannot evaluate predicate {type(p).__name__}", p)


def _eval_quant(p, env, state, i, child) -> bool:
    existential = type(p) is Exists
    if i == len(p.vars):
        return eval_pred(p.body, child, state)
    dom = eval_expr(p.domains[i], child, state)
    dom = _want_set(dom, "quantifier domain", p)
    for v in dom.elems:
        child[p.vars[i]] = v
        r = _eval_quant(p, env, state, i + 1, child)
        if r == existential:
            del child[p.vars[i]]
            return existential
    child.pop(p.vars[i], None)
    return not existential
