"""Scope and type checking for parsed models.

Responsibilities beyond plain checking:

* constants get their defining expressions from PROPERTIES equations;
* each variable's type is read off its first typing conjunct in the
  invariant (``v <: S``, ``v : A <-> B``, ``v : A +-> B``, ``v : lo..hi``);
* bound-variable enumeration domains are resolved (``v : D`` conjuncts);
* every expression is assigned a set-theoretic type, and function
  application is only licensed where functionality is declared, either by
  a ``+->`` typing or a ``FUNCTIONAL(...)`` invariant annotation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace
from typing import Optional

from ..events import (
    AbstractSystem, Action, Assign, Event, LetIn, SystemError_, VarDecl,
    assigned_vars, resolve_domains, validate_system,
)
from ..exprs import (
    Add, And, Apply, BoolLit, Compr, Cross, Diff, Dom, DomSub, Eq, Exists,
    Expr, FalseP, Forall, Functional, Ge, Gt, Image, Implies, In, Inter,
    IntLit, Interval, Inverse, Le, Lt, Maplet, Neq, Not, NotIn, Or, Override,
    PFunSpace, Pred, Ran, Ref, RelSpace, SetEnum, Span, Subset, TrueP, Union,
    conjuncts, free_refs,
)
from .diagnostics import Diagnostic, SpecError
from .parser import SourceSpec


# ----------------------------------------------------------------- type terms

@dataclass(frozen=True)
class Type:
    def __str__(self):  # pragma: no cover - overridden
        return "?"


@dataclass(frozen=True)
class TAny(Type):
    def __str__(self):
        return "?"


@dataclass(frozen=True)
class TInt(Type):
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class TBool(Type):
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class TAtom(Type):
    carrier: str

    def __str__(self):
        return self.carrier


@dataclass(frozen=True)
class TPair(Type):
    left: Type
    right: Type

    def __str__(self):
        return f"pair({self.left}, {self.right})"


@dataclass(frozen=True)
class TSet(Type):
    elem: Type

    def __str__(self):
        return f"set({self.elem})"


ANY = TAny()
INT = TInt()
BOOL = TBool()


def unify(a: Type, b: Type) -> Optional[Type]:
    if isinstance(a, TAny):
        return b
    if isinstance(b, TAny):
        return a
    if type(a) is not type(b):
        return None
    if isinstance(a, TSet):
        e = unify(a.elem, b.elem)
        return TSet(e) if e is not None else None
    if isinstance(a, TPair):
        l = unify(a.left, b.left)
        r = unify(a.right, b.right)
        return TPair(l, r) if l is not None and r is not None else None
    return a if a == b else None


# ------------------------------------------------------------------- checker

@dataclass
class CheckedModel:
    system: AbstractSystem
    var_types: dict[str, Type]
    const_types: dict[str, Type]
    functional: set[tuple[str, bool]]  # (name, inverted)
    filename: str = "<input>"


class _Checker:
    def __init__(self, spec: SourceSpec):
        self.spec = spec
        self.diags: list[Diagnostic] = []
        self.carriers = set(spec.system.carriers)
        self.const_names = [name for name, _ in spec.system.consts]
        self.var_names = list(spec.system.var_names())
        self.var_types: dict[str, Type] = {}
        self.const_types: dict[str, Type] = {}
        self.const_exprs: dict[str, Expr] = {}
        self.functional: set[tuple[str, bool]] = set()

    # ------------------------------------------------------------- reporting

    def err(self, message: str, node=None, code: str = "E102"):
        span = getattr(node, "span", None) or Span(1, 1)
        self.diags.append(Diagnostic("error", message, span.line, span.col, code))

    def done(self):
        if self.diags:
            raise SpecError(self.diags, self.spec.filename)

    # ----------------------------------------------------------------- names

    def check_names(self):
        seen: set[str] = set()
        for group, names in (
            ("carrier set", self.spec.system.carriers),
            ("constant", self.const_names),
            ("variable", self.var_names),
        ):
            for n in names:
                if n in seen:
                    self.err(f"duplicate declaration of {group} '{n}'", code="E110")
                seen.add(n)

    # ------------------------------------------------------------- constants

    def check_constants(self):
        props = self.spec.system.properties
        equations: dict[str, Expr] = {}
        if props is not None:
            for c in conjuncts(props):
                if (
                    isinstance(c, Eq)
                    and isinstance(c.left, Ref)
                    and c.left.name in self.const_names
                ):
                    if c.left.name in equations:
                        self.err(
                            f"constant '{c.left.name}' defined twice", c, "E104"
                        )
                    equations[c.left.name] = c.right
                else:
                    self.err(
                        "PROPERTIES must be a conjunction of constant equations "
                        "'c = <expression>'",
                        c,
                        "E104",
                    )
        env: dict[str, Type] = {c: TSet(TAtom(c)) for c in self.carriers}
        for name in self.const_names:
            ex = equations.get(name)
            if ex is None:
                self.err(f"constant '{name}' has no defining equation", code="E104")
                self.const_types[name] = ANY
                continue
            bad = free_refs(ex) - self.carriers - set(self.const_types)
            if bad:
                self.err(
                    f"constant '{name}' definition uses undefined names: "
                    f"{', '.join(sorted(bad))}",
                    ex,
                    "E101",
                )
                self.const_types[name] = ANY
                continue
            self.const_types[name] = self.infer(ex, env)
            self.const_exprs[name] = ex
            env[name] = self.const_types[name]

    # ------------------------------------------------------- variable typing

    def _space_member_type(self, t_expr: Expr, env) -> Type:
        if isinstance(t_expr, RelSpace) or isinstance(t_expr, PFunSpace):
            lt = self._elem_type(t_expr.left, env)
            rt = self._elem_type(t_expr.right, env)
            return TSet(TPair(lt, rt))
        return self._elem_type(t_expr, env)

    def _elem_type(self, set_expr: Expr, env) -> Type:
        t = self.infer(set_expr, env)
        if isinstance(t, TSet):
            return t.elem
        if isinstance(t, TAny):
            return ANY
        self.err(f"expected a set, got {t}", set_expr, "E103")
        return ANY

    def extract_var_types(self):
        env = self._base_env()
        for c in conjuncts(self.spec.system.invariant):
            target = None
            if isinstance(c, (In, Subset)):
                lhs = c.item if isinstance(c, In) else c.left
                rhs = c.coll if isinstance(c, In) else c.right
                if isinstance(lhs, Ref) and lhs.name in self.var_names:
                    target = lhs.name
            if target is None or target in self.var_types:
                continue
            if isinstance(c, In):
                ty = self._space_member_type(rhs, env)
                decl = (":", rhs)
            else:
                ty = TSet(self._elem_type(rhs, env))
                decl = ("<:", rhs)
            self.var_types[target] = ty
            self._decls[target] = decl
            env[target] = ty
        for v in self.var_names:
            if v not in self.var_types:
                self.err(
                    f"variable '{v}' has no typing conjunct in the invariant",
                    code="E107",
                )
                self.var_types[v] = ANY

    def collect_functional(self):
        for c in conjuncts(self.spec.system.invariant):
            if isinstance(c, Functional):
                if isinstance(c.rel, Ref):
                    self.functional.add((c.rel.name, False))
                elif isinstance(c.rel, Inverse) and isinstance(c.rel.rel, Ref):
                    self.functional.add((c.rel.rel.name, True))

    # --------------------------------------------------------------- typing

    def _base_env(self) -> dict[str, Type]:
        env: dict[str, Type] = {}
        for c in self.carriers:
            env[c] = TSet(TAtom(c))
        env.update(self.const_types)
        env.update(self.var_types)
        return env

    def _is_functional_expr(self, fn: Expr) -> bool:
        if isinstance(fn, Ref):
            if (fn.name, False) in self.functional:
                return True
            decl = self._decls.get(fn.name)
            return decl is not None and isinstance(decl[1], PFunSpace) and decl[0] == ":"
        if isinstance(fn, Inverse) and isinstance(fn.rel, Ref):
            return (fn.rel.name, True) in self.functional
        return False

    def infer(self, e: Expr, env: dict[str, Type]) -> Type:
        t = type(e)
        if t is Ref:
            ty = env.get(e.name)
            if ty is None:
                self.err(f"unknown identifier '{e.name}'", e, "E101")
                return ANY
            return ty
        if t is IntLit:
            return INT
        if t is BoolLit:
            return BOOL
        if t is SetEnum:
            elem: Type = ANY
            for item in e.items:
                it = self.infer(item, env)
                u = unify(elem, it)
                if u is None:
                    self.err(
                        f"set mixes element types {elem} and {it}", item, "E102"
                    )
                else:
                    elem = u
            return TSet(elem)
        if t is Maplet:
            return TPair(self.infer(e.left, env), self.infer(e.right, env))
        if t is Interval:
            for side in (e.lo, e.hi):
                if unify(self.infer(side, env), INT) is None:
                    self.err("interval bounds must be integers", side, "E102")
            return TSet(INT)
        if t in (Union, Inter, Diff):
            a = self.infer(e.left, env)
            b = self.infer(e.right, env)
            if t is Diff and unify(a, INT) is not None and unify(b, INT) is not None:
                return INT
            return self._set_join(a, b, e)
        if t is Add:
            for side in (e.left, e.right):
                if unify(self.infer(side, env), INT) is None:
                    self.err("'+' expects integers", side, "E102")
            return INT
        if t is Cross:
            a = self._elem_type(e.left, env)
            b = self._elem_type(e.right, env)
            return TSet(TPair(a, b))
        if t in (Override, DomSub):
            if t is Override:
                a = self.infer(e.left, env)
                b = self.infer(e.right, env)
                u = self._set_join(a, b, e)
                self._rel_elem(u, e)
                return u
            keys = self.infer(e.keys, env)
            rel = self.infer(e.rel, env)
            pair = self._rel_elem(rel, e)
            if isinstance(keys, TSet) and unify(keys.elem, pair.left) is None:
                self.err(
                    f"'<<|' key type {keys.elem} does not match domain {pair.left}",
                    e,
                    "E102",
                )
            return rel
        if t is Image:
            rel = self.infer(e.rel, env)
            pair = self._rel_elem(rel, e)
            arg = self.infer(e.arg, env)
            if isinstance(arg, TSet) and unify(arg.elem, pair.left) is None:
                self.err(
                    f"image argument has type {arg}, expected set({pair.left})",
                    e,
                    "E102",
                )
            return TSet(pair.right)
        if t is Inverse:
            pair = self._rel_elem(self.infer(e.rel, env), e)
            return TSet(TPair(pair.right, pair.left))
        if t is Dom:
            return TSet(self._rel_elem(self.infer(e.arg, env), e).left)
        if t is Ran:
            return TSet(self._rel_elem(self.infer(e.arg, env), e).right)
        if t is Apply:
            pair = self._rel_elem(self.infer(e.fn, env), e)
            arg = self.infer(e.arg, env)
            if unify(arg, pair.left) is None:
                self.err(
                    f"application argument has type {arg}, expected {pair.left}",
                    e,
                    "E102",
                )
            if not self._is_functional_expr(e.fn):
                self.err(
                    "application requires a partial function ('+->' typing or "
                    "a FUNCTIONAL annotation)",
                    e,
                    "E105",
                )
            return pair.right
        if t is Compr:
            if e.var in env:
                self.err(f"comprehension variable '{e.var}' shadows a name", e, "E106")
            elem = self._elem_type(e.domain, env)
            child = dict(env)
            child[e.var] = elem
            self.check_pred(e.pred, child)
            return TSet(elem)
        if t in (RelSpace, PFunSpace):
            self.err(
                "relation space is only allowed as the target of ':'", e, "E103"
            )
            return TSet(TPair(self._elem_type(e.left, env), self._elem_type(e.right, env)))
        raise TypeError(f"no typing rule for {t.__name__}")

    def _set_join(self, a: Type, b: Type, node) -> Type:
        for x in (a, b):
            if not isinstance(x, (TSet, TAny)):
                self.err(f"expected a set, got {x}", node, "E103")
                return TSet(ANY)
        u = unify(a, b)
        if u is None:
            self.err(f"set operands disagree: {a} vs {b}", node, "E102")
            return TSet(ANY)
        return u if isinstance(u, TSet) else TSet(ANY)

    def _rel_elem(self, t: Type, node) -> TPair:
        if isinstance(t, TSet):
            if isinstance(t.elem, TPair):
                return t.elem
            if isinstance(t.elem, TAny):
                return TPair(ANY, ANY)
        if isinstance(t, TAny):
            return TPair(ANY, ANY)
        self.err(f"expected a relation, got {t}", node, "E103")
        return TPair(ANY, ANY)

    # ------------------------------------------------------------ predicates

    def check_pred(self, p: Pred, env: dict[str, Type]):
        t = type(p)
        if t in (TrueP, FalseP):
            return
        if t in (And, Or, Implies):
            self.check_pred(p.left, env)
            self.check_pred(p.right, env)
            return
        if t is Not:
            self.check_pred(p.body, env)
            return
        if t in (In, NotIn):
            if isinstance(p.coll, (RelSpace, PFunSpace)):
                want = TSet(
                    TPair(
                        self._elem_type(p.coll.left, env),
                        self._elem_type(p.coll.right, env),
                    )
                )
                got = self.infer(p.item, env)
                if unify(got, want) is None:
                    self.err(f"membership mismatch: {got} vs {want}", p, "E102")
                return
            elem = self._elem_type(p.coll, env)
            got = self.infer(p.item, env)
            if unify(got, elem) is None:
                self.err(
                    f"membership mismatch: element type {got}, set of {elem}",
                    p,
                    "E102",
                )
            return
        if t is Subset:
            a = self.infer(p.left, env)
            b = self.infer(p.right, env)
            self._set_join(a, b, p)
            return
        if t in (Eq, Neq):
            a = self.infer(p.left, env)
            b = self.infer(p.right, env)
            if unify(a, b) is None:
                self.err(f"comparison of incompatible types: {a} vs {b}", p, "E102")
            return
        if t in (Lt, Le, Gt, Ge):
            for side in (p.left, p.right):
                if unify(self.infer(side, env), INT) is None:
                    self.err("integer comparison expects integers", side, "E102")
            return
        if t in (Exists, Forall):
            child = dict(env)
            if p.domains is None:
                self.err("quantifier has unresolved domains", p, "E109")
                return
            for var, dom in zip(p.vars, p.domains):
                if var in env:
                    self.err(f"bound variable '{var}' shadows a name", p, "E106")
                child[var] = self._elem_type(dom, child)
            self.check_pred(p.body, child)
            return
        if t is Functional:
            self._rel_elem(self.infer(p.rel, env), p)
            return
        raise TypeError(f"no typing rule for predicate {t.__name__}")

    # --------------------------------------------------------------- actions

    def check_action(self, action: Action, env: dict[str, Type], where: str,
                     init: bool = False):
        def walk(items, env):
            for it in items:
                if isinstance(it, Assign):
                    for target, ex in zip(it.targets, it.exprs):
                        if target not in self.var_names:
                            self.err(
                                f"{where} assigns undeclared variable '{target}'",
                                ex,
                                "E101",
                            )
                            continue
                        if init:
                            reads = free_refs(ex) & set(self.var_names)
                            if reads:
                                self.err(
                                    "initialisation cannot read variables: "
                                    + ", ".join(sorted(reads)),
                                    ex,
                                    "E108",
                                )
                        got = self.infer(ex, env)
                        want = self.var_types[target]
                        if unify(got, want) is None:
                            self.err(
                                f"assignment to '{target}' has type {got}, "
                                f"declared {want}",
                                ex,
                                "E102",
                            )
                else:
                    child = dict(env)
                    if it.name in env:
                        self.err(f"LET '{it.name}' shadows a name", it.expr, "E106")
                    child[it.name] = self.infer(it.expr, env)
                    walk(it.body, child)

        walk(action.items, env)

    # ------------------------------------------------------------------ main

    def run(self) -> CheckedModel:
        self._decls: dict[str, tuple[str, Expr]] = {}
        self.check_names()
        self.check_constants()
        self.done()

        self.extract_var_types()
        self.collect_functional()
        self.done()

        system = dc_replace(
            self.spec.system,
            consts=tuple(
                (name, self.const_exprs.get(name)) for name in self.const_names
            ),
            variables=tuple(
                VarDecl(v, *(self._decls.get(v) or (None, None)))
                for v in self.var_names
            ),
        )
        try:
            system = resolve_domains(system)
            validate_system(system)
        except SystemError_ as e:
            self.err(str(e), code="E109")
            self.done()

        env = self._base_env()
        if system.properties is not None:
            pass  # equations were checked in check_constants
        self.check_pred(system.invariant, env)
        self.check_action(system.init, env, "initialisation", init=True)
        seen_events: set[str] = set()
        for ev in system.events:
            if ev.name in seen_events:
                self.err(f"duplicate event '{ev.name}'", code="E110")
            seen_events.add(ev.name)
            child = dict(env)
            for var, dom in zip(ev.params, ev.domains):
                if var in env:
                    self.err(
                        f"bound variable '{var}' of {ev.name} shadows a name",
                        dom,
                        "E106",
                    )
                child[var] = self._elem_type(dom, child)
            self.check_pred(ev.guard, child)
            self.check_action(ev.action, child, f"event {ev.name}")
        self.done()

        return CheckedModel(
            system=system,
            var_types=dict(self.var_types),
            const_types=dict(self.const_types),
            functional=set(self.functional),
            filename=self.spec.filename,
        )


def typecheck(spec: SourceSpec) -> CheckedModel:
    """Check a parsed model; raises SpecError with diagnostics on failure."""
    return _Checker(spec).run()
