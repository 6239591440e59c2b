"""Finite set-theoretic values and canonical state representation.

State variables hold a `Value`: an atom drawn from a scoped carrier set, a
boolean, a bounded integer, an ordered pair, or a finite set of values.
Relations and functions are just sets of pairs.

Sets are deduplicated and stored in a fixed total order, so structural
equality, hashing, rendering and the byte encoding used for state digests
all agree.  The order ranks values by kind (bool < int < atom < pair <
set), then structurally: atoms by (carrier, index), pairs and sets
lexicographically.  See docs/encoding.md for the byte encoding behind
`canonical_digest`.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Iterator, Mapping

_RANK_BOOL = 0
_RANK_INT = 1
_RANK_ATOM = 2
_RANK_PAIR = 3
_RANK_SET = 4


class Value:
    """Immutable, hashable, totally ordered value."""

    __slots__ = ("_key", "_hash")

    def sort_key(self):
        return self._key

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "Value"):
        return self._key < other._key

    def __le__(self, other: "Value"):
        return self._key <= other._key

    def __repr__(self):
        return render_value(self)


class Atom(Value):
    """Element of a carrier set, named ``<carrier><index>`` (e.g. NODE0)."""

    __slots__ = ("carrier", "index")

    def __init__(self, carrier: str, index: int):
        self.carrier = carrier
        self.index = index
        self._key = (_RANK_ATOM, carrier, index)
        self._hash = hash(self._key)

    def __eq__(self, other):
        return (
            type(other) is Atom
            and self.index == other.index
            and self.carrier == other.carrier
        )

    __hash__ = Value.__hash__


class BoolV(Value):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = bool(value)
        self._key = (_RANK_BOOL, self.value)
        self._hash = hash(self._key)

    def __eq__(self, other):
        return type(other) is BoolV and self.value == other.value

    __hash__ = Value.__hash__


class IntV(Value):
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value
        self._key = (_RANK_INT, value)
        self._hash = hash(self._key)

    def __eq__(self, other):
        return type(other) is IntV and self.value == other.value

    __hash__ = Value.__hash__


class PairV(Value):
    """Ordered pair; ``a |-> b`` in the surface syntax."""

    __slots__ = ("left", "right")

    def __init__(self, left: Value, right: Value):
        self.left = left
        self.right = right
        self._key = (_RANK_PAIR, left._key, right._key)
        self._hash = hash(self._key)

    def __eq__(self, other):
        return (
            type(other) is PairV
            and self.left == other.left
            and self.right == other.right
        )

    __hash__ = Value.__hash__


class SetV(Value):
    """Finite set; elements are deduplicated and sorted canonically."""

    __slots__ = ("elems",)

    def __init__(self, elems: tuple):
        # Caller guarantees canonical order; use mkset() otherwise.
        self.elems = elems
        self._key = (_RANK_SET, tuple(e._key for e in elems))
        self._hash = hash(self._key)

    def __eq__(self, other):
        return type(other) is SetV and self.elems == other.elems

    __hash__ = Value.__hash__

    def __contains__(self, v: Value):
        return any(v == e for e in self.elems)

    def __iter__(self) -> Iterator[Value]:
        return iter(self.elems)

    def __len__(self):
        return len(self.elems)


def mkset(items: Iterable[Value]) -> SetV:
    """Build a canonical SetV from arbitrary (possibly duplicated) items."""
    seen = {}
    for v in items:
        seen[v._key] = v
    return SetV(tuple(seen[k] for k in sorted(seen)))


EMPTY_SET = SetV(())
TRUE = BoolV(True)
FALSE = BoolV(False)


def render_value(v: Value) -> str:
    """Canonical textual literal of a value (used in reports and traces)."""
    if type(v) is Atom:
        return f"{v.carrier}{v.index}"
    if type(v) is IntV:
        return str(v.value)
    if type(v) is BoolV:
        return "TRUE" if v.value else "FALSE"
    if type(v) is PairV:
        return f"({render_value(v.left)}|->{render_value(v.right)})"
    if type(v) is SetV:
        return "{" + ", ".join(render_value(e) for e in v.elems) + "}"
    raise TypeError(f"not a Value: {v!r}")


def encode_value(v: Value) -> bytes:
    """Injective byte encoding; two values are equal iff encodings match."""
    if type(v) is Atom:
        name = v.carrier.encode()
        return b"a" + len(name).to_bytes(2, "big") + name + v.index.to_bytes(4, "big")
    if type(v) is BoolV:
        return b"1" if v.value else b"0"
    if type(v) is IntV:
        return b"i" + v.value.to_bytes(8, "big", signed=True)
    if type(v) is PairV:
        return b"p" + encode_value(v.left) + encode_value(v.right)
    if type(v) is SetV:
        parts = b"".join(encode_value(e) for e in v.elems)
        return b"s" + len(v.elems).to_bytes(4, "big") + parts
    raise TypeError(f"not a Value: {v!r}")


def atoms_of(v: Value, out: set | None = None) -> set:
    """All atoms occurring anywhere inside a value."""
    if out is None:
        out = set()
    if type(v) is Atom:
        out.add(v)
    elif type(v) is PairV:
        atoms_of(v.left, out)
        atoms_of(v.right, out)
    elif type(v) is SetV:
        for e in v.elems:
            atoms_of(e, out)
    return out


class Scope:
    """Finite cardinality per carrier set plus the integer bound.

    Atoms of carrier C at cardinality k are C0 .. C(k-1).  Integers are
    restricted to 0..max_int so state universes stay finite.
    """

    __slots__ = ("sizes", "max_int", "_atom_sets", "_hash")

    def __init__(self, sizes: Mapping[str, int] | Iterable[tuple[str, int]] = (),
                 max_int: int = 7):
        items = sizes.items() if isinstance(sizes, Mapping) else sizes
        self.sizes = dict(items)
        for name, k in self.sizes.items():
            if k < 0:
                raise ValueError(f"carrier {name} has negative cardinality {k}")
        if max_int < 0:
            raise ValueError("max_int must be >= 0")
        self.max_int = max_int
        self._atom_sets: dict[str, SetV] = {}
        self._hash = hash((tuple(sorted(self.sizes.items())), max_int))

    def card(self, carrier: str) -> int:
        return self.sizes[carrier]

    def atoms(self, carrier: str) -> tuple[Atom, ...]:
        return self.carrier_set(carrier).elems

    def carrier_set(self, carrier: str) -> SetV:
        cached = self._atom_sets.get(carrier)
        if cached is None:
            k = self.sizes[carrier]
            cached = SetV(tuple(Atom(carrier, i) for i in range(k)))
            self._atom_sets[carrier] = cached
        return cached

    def __contains__(self, carrier: str) -> bool:
        return carrier in self.sizes

    def __eq__(self, other):
        return (
            isinstance(other, Scope)
            and self.sizes == other.sizes
            and self.max_int == other.max_int
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{n}={k}" for n, k in sorted(self.sizes.items()))
        return f"Scope({inner}, max_int={self.max_int})"


class StateSpace:
    """Shared template for the states of one system at one scope.

    Holds what is constant across states (variable-name order, constant
    bindings, the scope) so individual State objects stay small.
    """

    __slots__ = ("scope", "names", "index", "consts")

    def __init__(self, scope: Scope, names: Iterable[str],
                 consts: Mapping[str, Value] | None = None):
        self.scope = scope
        self.names = tuple(sorted(names))
        self.index = {n: i for i, n in enumerate(self.names)}
        self.consts = dict(consts or {})

    def make(self, values: tuple) -> "State":
        return State(self, values)

    def from_mapping(self, bindings: Mapping[str, Value]) -> "State":
        missing = [n for n in self.names if n not in bindings]
        if missing:
            raise KeyError(f"unbound variables: {', '.join(missing)}")
        return State(self, tuple(bindings[n] for n in self.names))


class State:
    """Immutable binding of every declared variable to a canonical value."""

    __slots__ = ("space", "values", "_hash", "_atoms")

    def __init__(self, space: StateSpace, values: tuple):
        self.space = space
        self.values = values
        self._hash = hash(values)
        self._atoms = None

    def get(self, name: str) -> Value:
        i = self.space.index.get(name)
        if i is None:
            raise KeyError(name)
        return self.values[i]

    def items(self):
        return zip(self.space.names, self.values)

    def replace(self, updates: Mapping[str, Value]) -> "State":
        idx = self.space.index
        vals = list(self.values)
        for name, v in updates.items():
            vals[idx[name]] = v
        return State(self.space, tuple(vals))

    def atom_set(self) -> frozenset:
        """Atoms occurring in any variable value (memoized)."""
        if self._atoms is None:
            acc: set = set()
            for v in self.values:
                atoms_of(v, acc)
            self._atoms = frozenset(acc)
        return self._atoms

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, State)
            and self._hash == other._hash
            and self.values == other.values
            and (self.space is other.space or self.space.names == other.space.names)
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{n}={render_value(v)}" for n, v in self.items())
        return f"State({inner})"


def encode_state(s: State) -> bytes:
    parts = [b"S", len(s.values).to_bytes(4, "big")]
    for name, v in s.items():
        nb = name.encode()
        parts.append(len(nb).to_bytes(2, "big"))
        parts.append(nb)
        parts.append(encode_value(v))
    return b"".join(parts)


def canonical_digest(s: State) -> str:
    """Hex digest of the injective state encoding.

    Equal states always produce equal digests; the encoding is injective,
    so distinct states produce distinct encodings (hash collisions are
    resolved by full comparison wherever states are deduplicated).
    """
    return hashlib.sha256(encode_state(s)).hexdigest()
