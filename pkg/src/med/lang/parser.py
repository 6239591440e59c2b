"""Recursive-descent parser for the model language.

Produces an `AbstractSystem` whose constants and bound-variable domains are
still unresolved; `typecheck` finishes the job.  Grammar sketch::

    SYSTEM name
    SETS A, B                     (optional)
    CONSTANTS c1, c2              (optional)
    PROPERTIES c1 = e & c2 = e    (optional)
    VARIABLES v1, v2
    INVARIANT P
    INITIALISATION S
    EVENTS
      ev = ANY x, y WHERE P THEN S END ;
      ev = SELECT P THEN S END
    END

    S ::= item ('||' item)*
    item ::= v1, v2 := e1, e2 | LET x BE x = e IN S END

Operators, loosest to tightest: ``<-> +->``; ``\\/ /\\ - <+ <<|``;
``|->``; ``..``; ``+``; ``*``; postfix ``~  [S]  (x)``.  Predicates:
``=>``, ``or``, ``&``, ``not``, quantifiers ``#x.(P)`` / ``!x.(P)``,
comparisons ``: /: <: = /= < <= > >=`` and ``FUNCTIONAL(r)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..events import AbstractSystem, Action, Assign, Event, LetIn, VarDecl
from ..exprs import (
    Add, Apply, BoolLit, Compr, Cross, Diff, Dom, DomSub, Eq, Exists, Expr,
    FalseP, Forall, Functional, Ge, Gt, Image, Implies, In, Inter, IntLit,
    Interval, Inverse, Le, Lt, Maplet, Neq, Not, NotIn, Or, Override,
    PFunSpace, Pred, Ran, Ref, RelSpace, SetEnum, Span, Subset, TrueP, Union,
    And,
)
from .diagnostics import Diagnostic, SpecError
from .tokens import Token, tokenize


@dataclass
class SourceSpec:
    """A parsed model plus enough source context to reprint and diagnose."""

    filename: str
    text: str
    header: str  # leading comment block, kept verbatim by the printer
    system: AbstractSystem


class _Backtrack(Exception):
    pass


_REL_OPS = {":", "/:", "<:", "=", "/=", "<", "<=", ">", ">="}
# Tokens that, after a parenthesised group, show it was an expression.
_EXPR_CONTINUATIONS = _REL_OPS | {
    "|->", "+->", "<->", "<<|", "<+", "\\/", "/\\", "-", "..", "+", "*",
    "~", "[", "(",
}

_SECTION_KWS = (
    "SETS", "CONSTANTS", "PROPERTIES", "VARIABLES", "INVARIANT",
    "INITIALISATION", "EVENTS",
)


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.toks = tokens
        self.i = 0
        self.filename = filename

    # ------------------------------------------------------------- plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def at_op(self, *ops: str) -> bool:
        t = self.peek()
        return t.kind == "OP" and t.value in ops

    def at_kw(self, *kws: str) -> bool:
        t = self.peek()
        return t.kind == "KW" and t.value in kws

    def fail(self, message: str, tok: Token | None = None, code: str = "E011"):
        tok = tok or self.peek()
        raise SpecError(
            [Diagnostic("error", message, tok.line, tok.col, code)], self.filename
        )

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            self.fail(f"expected '{op}', found {self._show(self.peek())}")
        return self.next()

    def expect_kw(self, kw: str) -> Token:
        if not self.at_kw(kw):
            self.fail(f"expected {kw}, found {self._show(self.peek())}")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "IDENT":
            self.fail(f"expected {what}, found {self._show(t)}")
        return self.next()

    @staticmethod
    def _show(t: Token) -> str:
        return "end of input" if t.kind == "EOF" else repr(t.value)

    @staticmethod
    def _span(t: Token) -> Span:
        return Span(t.line, t.col)

    # -------------------------------------------------------------- sections

    def parse_system(self) -> AbstractSystem:
        self.expect_kw("SYSTEM")
        name = self.expect_ident("system name").value

        seen: set[str] = set()
        sets: tuple[str, ...] = ()
        const_names: tuple[str, ...] = ()
        properties: Pred | None = None
        variables: tuple[str, ...] = ()
        invariant: Pred | None = None
        init: Action | None = None
        events: tuple[Event, ...] = ()

        while self.at_kw(*_SECTION_KWS):
            tok = self.next()
            if tok.value in seen:
                self.fail(f"duplicate section {tok.value}", tok, "E010")
            seen.add(tok.value)
            if tok.value == "SETS":
                sets = self.ident_list("carrier-set name")
            elif tok.value == "CONSTANTS":
                const_names = self.ident_list("constant name")
            elif tok.value == "PROPERTIES":
                properties = self.parse_pred()
            elif tok.value == "VARIABLES":
                variables = self.ident_list("variable name")
            elif tok.value == "INVARIANT":
                invariant = self.parse_pred()
            elif tok.value == "INITIALISATION":
                init = self.parse_subst()
            elif tok.value == "EVENTS":
                events = self.parse_events()

        self.expect_kw("END")
        if self.peek().kind != "EOF":
            self.fail(f"unexpected input after END: {self._show(self.peek())}")

        for required, value in (
            ("VARIABLES", variables),
            ("INVARIANT", invariant),
            ("INITIALISATION", init),
        ):
            if required not in seen:
                self.fail(f"missing {required} section", self.peek(), "E012")

        return AbstractSystem(
            name=name,
            carriers=sets,
            consts=tuple((c, None) for c in const_names),
            variables=tuple(VarDecl(v) for v in variables),
            invariant=invariant,
            init=init,
            events=events,
            properties=properties,
        )

    def ident_list(self, what: str) -> tuple[str, ...]:
        names = [self.expect_ident(what).value]
        while self.at_op(","):
            self.next()
            names.append(self.expect_ident(what).value)
        return tuple(names)

    def parse_events(self) -> tuple[Event, ...]:
        events = []
        while self.peek().kind == "IDENT":
            events.append(self.parse_event())
            if self.at_op(";"):
                self.next()
        return tuple(events)

    def parse_event(self) -> Event:
        name = self.expect_ident("event name").value
        self.expect_op("=")
        if self.at_kw("ANY"):
            self.next()
            params = self.ident_list("bound-variable name")
            self.expect_kw("WHERE")
            guard = self.parse_pred()
        elif self.at_kw("SELECT"):
            self.next()
            params = ()
            guard = self.parse_pred()
        else:
            self.fail(f"expected ANY or SELECT, found {self._show(self.peek())}")
        self.expect_kw("THEN")
        action = self.parse_subst()
        self.expect_kw("END")
        return Event(name=name, params=params, guard=guard, action=action)

    # --------------------------------------------------------- substitutions

    def parse_subst(self) -> Action:
        items = [self.parse_subst_item()]
        while self.at_op("||"):
            self.next()
            items.append(self.parse_subst_item())
        return Action(tuple(items))

    def parse_subst_item(self):
        if self.at_kw("LET"):
            self.next()
            name = self.expect_ident("LET name").value
            self.expect_kw("BE")
            again = self.expect_ident("LET name")
            if again.value != name:
                self.fail(f"LET defines '{name}' but binds '{again.value}'", again)
            self.expect_op("=")
            expr = self.parse_expr()
            self.expect_kw("IN")
            body = self.parse_subst()
            self.expect_kw("END")
            return LetIn(name, expr, body.items)
        targets = self.ident_list("assignment target")
        self.expect_op(":=")
        exprs = [self.parse_expr()]
        while self.at_op(","):
            self.next()
            exprs.append(self.parse_expr())
        if len(exprs) != len(targets):
            self.fail(
                f"assignment has {len(targets)} targets but {len(exprs)} expressions"
            )
        return Assign(tuple(targets), tuple(exprs))

    # ------------------------------------------------------------ predicates

    def parse_pred(self) -> Pred:
        left = self.parse_por()
        if self.at_op("=>"):
            tok = self.next()
            right = self.parse_pred()  # right-associative
            return Implies(left, right, span=self._span(tok))
        return left

    def parse_por(self) -> Pred:
        left = self.parse_pand()
        while self.at_kw("OR"):
            tok = self.next()
            left = Or(left, self.parse_pand(), span=self._span(tok))
        return left

    def parse_pand(self) -> Pred:
        left = self.parse_punary()
        while self.at_op("&"):
            tok = self.next()
            left = And(left, self.parse_punary(), span=self._span(tok))
        return left

    def parse_punary(self) -> Pred:
        tok = self.peek()
        if self.at_kw("NOT"):
            self.next()
            return Not(self.parse_punary(), span=self._span(tok))
        if self.at_op("#") or self.at_op("!"):
            self.next()
            vars_ = self.ident_list("bound-variable name")
            self.expect_op(".")
            self.expect_op("(")
            body = self.parse_pred()
            self.expect_op(")")
            cls = Exists if tok.value == "#" else Forall
            return cls(vars_, body, span=self._span(tok))
        if self.at_kw("FUNCTIONAL"):
            self.next()
            self.expect_op("(")
            rel = self.parse_expr()
            self.expect_op(")")
            return Functional(rel, span=self._span(tok))
        if self.at_kw("TRUE", "FALSE") and not self._looks_like_expr_after(1):
            self.next()
            return (
                TrueP(span=self._span(tok))
                if tok.value == "TRUE"
                else FalseP(span=self._span(tok))
            )
        if self.at_op("("):
            state = self.i
            try:
                self.next()
                inner = self.parse_pred()
                self.expect_op(")")
                nxt = self.peek()
                if nxt.kind == "OP" and nxt.value in _EXPR_CONTINUATIONS:
                    raise _Backtrack()
                return inner
            except (_Backtrack, SpecError):
                self.i = state
        return self.parse_comparison()

    def _looks_like_expr_after(self, ahead: int) -> bool:
        t = self.peek(ahead)
        return t.kind == "OP" and t.value in _EXPR_CONTINUATIONS

    def parse_comparison(self) -> Pred:
        left = self.parse_expr()
        tok = self.peek()
        if tok.kind == "OP" and tok.value in _REL_OPS:
            self.next()
            right = self.parse_expr()
            span = self._span(tok)
            return {
                ":": In,
                "/:": NotIn,
                "<:": Subset,
                "=": Eq,
                "/=": Neq,
                "<": Lt,
                "<=": Le,
                ">": Gt,
                ">=": Ge,
            }[tok.value](left, right, span=span)
        if isinstance(left, BoolLit):
            return TrueP(span=left.span) if left.value else FalseP(span=left.span)
        self.fail(
            f"expected a comparison (: /: <: = /= < <= > >=), found {self._show(tok)}"
        )

    # ----------------------------------------------------------- expressions

    def parse_expr(self) -> Expr:
        return self.parse_space()

    def parse_space(self) -> Expr:
        left = self.parse_setop()
        if self.at_op("<->", "+->"):
            tok = self.next()
            right = self.parse_setop()
            cls = RelSpace if tok.value == "<->" else PFunSpace
            return cls(left, right, span=self._span(tok))
        return left

    def parse_setop(self) -> Expr:
        left = self.parse_maplet()
        while self.at_op("\\/", "/\\", "-", "<+", "<<|"):
            tok = self.next()
            right = self.parse_maplet()
            span = self._span(tok)
            if tok.value == "\\/":
                left = Union(left, right, span=span)
            elif tok.value == "/\\":
                left = Inter(left, right, span=span)
            elif tok.value == "-":
                left = Diff(left, right, span=span)
            elif tok.value == "<+":
                left = Override(left, right, span=span)
            else:
                left = DomSub(left, right, span=span)
        return left

    def parse_maplet(self) -> Expr:
        left = self.parse_interval()
        while self.at_op("|->"):
            tok = self.next()
            left = Maplet(left, self.parse_interval(), span=self._span(tok))
        return left

    def parse_interval(self) -> Expr:
        left = self.parse_add()
        if self.at_op(".."):
            tok = self.next()
            return Interval(left, self.parse_add(), span=self._span(tok))
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.at_op("+"):
            tok = self.next()
            left = Add(left, self.parse_mul(), span=self._span(tok))
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_postfix()
        while self.at_op("*"):
            tok = self.next()
            left = Cross(left, self.parse_postfix(), span=self._span(tok))
        return left

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            if self.at_op("~"):
                tok = self.next()
                e = Inverse(e, span=self._span(tok))
            elif self.at_op("["):
                tok = self.next()
                arg = self.parse_expr()
                self.expect_op("]")
                e = Image(e, arg, span=self._span(tok))
            elif self.at_op("("):
                tok = self.next()
                arg = self.parse_expr()
                self.expect_op(")")
                e = Apply(e, arg, span=self._span(tok))
            else:
                return e

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return IntLit(int(tok.value), span=self._span(tok))
        if tok.kind == "IDENT":
            self.next()
            return Ref(tok.value, span=self._span(tok))
        if self.at_kw("TRUE", "FALSE"):
            self.next()
            return BoolLit(tok.value == "TRUE", span=self._span(tok))
        if self.at_kw("DOM", "RAN"):
            self.next()
            self.expect_op("(")
            arg = self.parse_expr()
            self.expect_op(")")
            cls = Dom if tok.value == "DOM" else Ran
            return cls(arg, span=self._span(tok))
        if self.at_op("("):
            self.next()
            e = self.parse_expr()
            self.expect_op(")")
            return e
        if self.at_op("{"):
            return self.parse_braces()
        self.fail(f"expected an expression, found {self._show(tok)}")

    def parse_braces(self) -> Expr:
        open_tok = self.expect_op("{")
        span = self._span(open_tok)
        if self.at_op("}"):
            self.next()
            return SetEnum((), span=span)
        # Comprehension: { v | v : D & P }
        if (
            self.peek().kind == "IDENT"
            and self.peek(1).kind == "OP"
            and self.peek(1).value == "|"
        ):
            var = self.next().value
            self.next()  # '|'
            body = self.parse_pred()
            self.expect_op("}")
            return self._comprehension(var, body, span)
        items = [self.parse_expr()]
        while self.at_op(","):
            self.next()
            items.append(self.parse_expr())
        self.expect_op("}")
        return SetEnum(tuple(items), span=span)

    def _comprehension(self, var: str, body: Pred, span: Span) -> Compr:
        # The first conjunct must type the bound variable: v : D.
        from ..exprs import and_spine, conjoin

        parts = and_spine(body)
        first = parts[0]
        if not (
            isinstance(first, In)
            and isinstance(first.item, Ref)
            and first.item.name == var
        ):
            raise SpecError(
                [
                    Diagnostic(
                        "error",
                        f"comprehension must start with '{var} : <domain>'",
                        span.line,
                        span.col,
                        "E013",
                    )
                ],
                self.filename,
            )
        rest = conjoin(parts[1:]) if len(parts) > 1 else TrueP()
        return Compr(var, first.coll, rest, span=span)


def parse(text: str, filename: str = "<input>") -> SourceSpec:
    """Parse a model; raises SpecError with diagnostics on failure."""
    try:
        tokens, comments = tokenize(text)
    except SpecError as e:
        raise SpecError(e.diagnostics, filename) from None
    parser = _Parser(tokens, filename)
    system = parser.parse_system()
    first_line = tokens[0].line if tokens and tokens[0].kind != "EOF" else 1
    header = "\n".join(c.text for c in comments if c.line < first_line)
    return SourceSpec(filename=filename, text=text, header=header, system=system)
