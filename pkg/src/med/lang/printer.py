"""Deterministic pretty-printer; output always reparses to an equal AST.

Parenthesisation is computed from the same precedence table the parser
uses, with parens kept on any operand that is not strictly tighter than
its context (associativity chains excepted), so mixing same-level
operators is always unambiguous on the page.
"""

from __future__ import annotations

from ..events import AbstractSystem, Action, Assign, LetIn
from ..exprs import (
    Add, And, Apply, BoolLit, Compr, Cross, Diff, Dom, DomSub, Eq, Exists,
    Expr, FalseP, Forall, Functional, Ge, Gt, Image, Implies, In, Inter,
    IntLit, Interval, Inverse, Le, Lt, Maplet, Neq, Not, NotIn, Or, Override,
    PFunSpace, Pred, Ran, Ref, RelSpace, SetEnum, Subset, TrueP, Union,
    and_spine,
)

_SPACE, _SETOP, _MAPLET, _INTERVAL, _ADD, _CROSS, _POSTFIX, _PRIMARY = range(1, 9)

_BINOPS = {
    RelSpace: ("<->", _SPACE, False),
    PFunSpace: ("+->", _SPACE, False),
    Union: ("\\/", _SETOP, True),
    Inter: ("/\\", _SETOP, True),
    Diff: ("-", _SETOP, True),
    Override: ("<+", _SETOP, True),
    DomSub: ("<<|", _SETOP, True),
    Maplet: ("|->", _MAPLET, True),
    Interval: ("..", _INTERVAL, False),
    Add: ("+", _ADD, True),
    Cross: ("*", _CROSS, True),
}

_CMP = {
    In: ":", NotIn: "/:", Subset: "<:", Eq: "=", Neq: "/=",
    Lt: "<", Le: "<=", Gt: ">", Ge: ">=",
}


def expr_text(e: Expr, ctx: int = 0) -> str:
    t = type(e)
    if t is Ref:
        return e.name
    if t is IntLit:
        return str(e.value)
    if t is BoolLit:
        return "TRUE" if e.value else "FALSE"
    if t is SetEnum:
        return "{" + ", ".join(expr_text(x) for x in e.items) + "}"
    if t is Compr:
        head = f"{e.var} : {expr_text(e.domain)}"
        if isinstance(e.pred, TrueP):
            return "{" + f"{e.var} | {head}" + "}"
        rest = " & ".join(pred_text(c, _PUNARY) for c in and_spine(e.pred))
        return "{" + f"{e.var} | {head} & {rest}" + "}"
    if t is Dom:
        return f"dom({expr_text(e.arg)})"
    if t is Ran:
        return f"ran({expr_text(e.arg)})"
    if t is Inverse:
        return f"{expr_text(e.rel, _POSTFIX)}~"
    if t is Image:
        return f"{expr_text(e.rel, _POSTFIX)}[{expr_text(e.arg)}]"
    if t is Apply:
        return f"{expr_text(e.fn, _POSTFIX)}({expr_text(e.arg)})"
    if t in _BINOPS:
        op, level, left_assoc = _BINOPS[t]
        if t is DomSub:
            lhs, rhs = e.keys, e.rel
        elif t is Interval:
            lhs, rhs = e.lo, e.hi
        else:
            lhs, rhs = e.left, e.right
        left = expr_text(lhs, level if left_assoc else level + 1)
        right = expr_text(rhs, level + 1)
        out = f"{left} {op} {right}"
        return f"({out})" if ctx > level else out
    raise TypeError(f"cannot print {t.__name__}")


_IMPL, _POR, _PAND, _PUNARY = range(1, 5)


def pred_text(p: Pred, ctx: int = 0) -> str:
    t = type(p)
    if t is TrueP:
        return "TRUE"
    if t is FalseP:
        return "FALSE"
    if t is Implies:
        out = f"{pred_text(p.left, _POR)} => {pred_text(p.right, _IMPL)}"
        return f"({out})" if ctx > _IMPL else out
    if t is Or:
        out = f"{pred_text(p.left, _POR)} or {pred_text(p.right, _PAND)}"
        return f"({out})" if ctx > _POR else out
    if t is And:
        out = f"{pred_text(p.left, _PAND)} & {pred_text(p.right, _PUNARY)}"
        return f"({out})" if ctx > _PAND else out
    if t is Not:
        return f"not {pred_text(p.body, _PUNARY)}"
    if t in (Exists, Forall):
        sym = "#" if t is Exists else "!"
        return f"{sym}{', '.join(p.vars)}.({pred_text(p.body)})"
    if t is Functional:
        return f"FUNCTIONAL({expr_text(p.rel)})"
    if t in _CMP:
        if t in (In, NotIn):
            lhs, rhs = p.item, p.coll
        else:
            lhs, rhs = p.left, p.right
        return f"{expr_text(lhs)} {_CMP[t]} {expr_text(rhs)}"
    raise TypeError(f"cannot print predicate {t.__name__}")


def _action_items_text(items, indent: str) -> str:
    lines = []
    for it in items:
        if isinstance(it, Assign):
            lines.append(
                f"{', '.join(it.targets)} := {', '.join(expr_text(e) for e in it.exprs)}"
            )
        else:
            body = _action_items_text(it.body, indent)
            lines.append(f"LET {it.name} BE {it.name} = {expr_text(it.expr)} IN {body} END")
    sep = f"\n{indent}|| "
    return sep.join(lines)


def _pred_block(p: Pred, indent: str) -> str:
    parts = and_spine(p)
    sep = f"\n{indent}& "
    return sep.join(pred_text(c, _PUNARY) for c in parts)


def pretty_print(model) -> str:
    """Render a parsed model (SourceSpec) or a bare AbstractSystem."""
    header = ""
    system = model
    if hasattr(model, "system"):
        header = model.header
        system = model.system
    assert isinstance(system, AbstractSystem)

    out = []
    if header:
        out.append(header)
    out.append(f"SYSTEM {system.name}")
    if system.carriers:
        out.append(f"SETS {', '.join(system.carriers)}")
    if system.consts:
        out.append(f"CONSTANTS {', '.join(name for name, _ in system.consts)}")
    if system.properties is not None:
        out.append("PROPERTIES")
        out.append(f"    {_pred_block(system.properties, '    ')}")
    out.append("VARIABLES")
    out.append(f"    {', '.join(system.var_names())}")
    out.append("INVARIANT")
    out.append(f"    {_pred_block(system.invariant, '    ')}")
    out.append("INITIALISATION")
    out.append(f"    {_action_items_text(system.init.items, '    ')}")
    out.append("EVENTS")
    pieces = []
    for ev in system.events:
        lines = [f"  {ev.name} ="]
        if ev.params:
            lines.append(f"    ANY {', '.join(ev.params)} WHERE")
        else:
            lines.append("    SELECT")
        lines.append(f"        {_pred_block(ev.guard, '        ')}")
        lines.append("    THEN")
        lines.append(f"        {_action_items_text(ev.action.items, '        ')}")
        lines.append("    END")
        pieces.append("\n".join(lines))
    out.append(" ;\n".join(pieces))
    out.append("END")
    return "\n".join(out) + "\n"
