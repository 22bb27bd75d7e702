"""Add/remove changes on powerset Boolean algebras.

A :class:`BooleanDelta` is a disjoint pair ``(adds, removes)``.  Applying it
to a relation ``a`` gives ``(a | adds) - removes``; composing two of them
keeps the later change's verdict on every tuple it touches.
"""
from __future__ import annotations

import enum
import itertools
from typing import Iterable

from .errors import DeltaError, SchemaError
from .relations import Relation, Schema


class Ordering(enum.Enum):
    LESS = "<="
    GREATER = ">="
    EQUAL = "="
    INCOMPARABLE = "incomparable"


class BooleanDelta:
    __slots__ = ("adds", "removes")

    def __init__(self, adds: Relation, removes: Relation):
        if adds.schema != removes.schema:
            raise SchemaError(
                f"delta halves disagree on schema: {adds.schema} vs {removes.schema}"
            )
        overlap = adds.rows & removes.rows
        if overlap:
            raise DeltaError(f"adds and removes overlap on {sorted(overlap, key=str)[:5]}")
        self.adds = adds
        self.removes = removes

    @classmethod
    def zero(cls, schema) -> "BooleanDelta":
        return cls(Relation.empty(schema), Relation.empty(schema))

    @classmethod
    def of(cls, schema, adds: Iterable[tuple] = (), removes: Iterable[tuple] = ()):
        return cls(Relation(schema, adds), Relation(schema, removes))

    @property
    def schema(self) -> Schema:
        return self.adds.schema

    def is_zero(self) -> bool:
        return not self.adds and not self.removes

    def __eq__(self, other):
        if not isinstance(other, BooleanDelta):
            return NotImplemented
        return self.adds == other.adds and self.removes == other.removes

    def __hash__(self):
        return hash((self.adds, self.removes))

    def __repr__(self):
        return (
            f"BooleanDelta(+{self.adds.sorted_rows()}, -{self.removes.sorted_rows()})"
        )


def _check(d1: BooleanDelta, d2: BooleanDelta):
    if d1.schema != d2.schema:
        raise SchemaError(f"schema mismatch: {d1.schema} vs {d2.schema}")


def apply_delta(base: Relation, d: BooleanDelta) -> Relation:
    if base.schema != d.schema:
        raise SchemaError(f"cannot apply a delta over {d.schema} to a relation over {base.schema}")
    return Relation(base.schema, (base.rows | d.adds.rows) - d.removes.rows)


def compose_delta(d1: BooleanDelta, d2: BooleanDelta) -> BooleanDelta:
    """``d1`` followed by ``d2``."""
    _check(d1, d2)
    p, q = d1.adds.rows, d1.removes.rows
    r, s = d2.adds.rows, d2.removes.rows
    adds = (p - s) | r
    removes = (q - r) | s
    assert not adds & removes
    return BooleanDelta(Relation(d1.schema, adds), Relation(d1.schema, removes))


def minus_bot(a: Relation, b: Relation, universe: Relation) -> BooleanDelta:
    """Least delta sending ``b`` to ``a``: ``(a - b, universe - a)``."""
    if not (a.schema == b.schema == universe.schema):
        raise SchemaError(f"schema mismatch among {a.schema}, {b.schema}, {universe.schema}")
    if not a.rows <= universe.rows or not b.rows <= universe.rows:
        raise DeltaError("minus_bot arguments must lie inside the universe")
    return BooleanDelta(
        Relation(a.schema, a.rows - b.rows), Relation(a.schema, universe.rows - a.rows)
    )


def minus_top(a: Relation, b: Relation) -> BooleanDelta:
    """Greatest delta sending ``b`` to ``a``: ``(a, b - a)``."""
    if a.schema != b.schema:
        raise SchemaError(f"schema mismatch: {a.schema} vs {b.schema}")
    return BooleanDelta(a, Relation(a.schema, b.rows - a.rows))


def delta_leq(d1: BooleanDelta, d2: BooleanDelta) -> Ordering:
    """Compare under: fewer adds and more removes is smaller."""
    _check(d1, d2)
    le = d1.adds.rows <= d2.adds.rows and d1.removes.rows >= d2.removes.rows
    ge = d2.adds.rows <= d1.adds.rows and d2.removes.rows >= d1.removes.rows
    if le and ge:
        return Ordering.EQUAL
    if le:
        return Ordering.LESS
    if ge:
        return Ordering.GREATER
    return Ordering.INCOMPARABLE


def is_leq(d1: BooleanDelta, d2: BooleanDelta) -> bool:
    return delta_leq(d1, d2) in (Ordering.LESS, Ordering.EQUAL)


def delta_sup(ds: Iterable[BooleanDelta]) -> BooleanDelta:
    """Least upper bound of a directed family: union of adds, meet of removes."""
    ds = list(ds)
    if not ds:
        raise DeltaError("delta_sup needs a nonempty collection")
    for d in ds[1:]:
        _check(ds[0], d)
    # pairwise directedness: every pair needs an upper bound inside the family
    for x, y in itertools.combinations(ds, 2):
        if not any(is_leq(x, z) and is_leq(y, z) for z in ds):
            raise DeltaError(f"collection is not directed: {x} and {y} have no upper bound in it")
    adds = frozenset().union(*(d.adds.rows for d in ds))
    removes = frozenset.intersection(*(d.removes.rows for d in ds))
    schema = ds[0].schema
    return BooleanDelta(Relation(schema, adds), Relation(schema, removes))


def relation_action(schema, dom):
    """The add/remove change action on all relations over ``schema`` and ``dom``.

    Enumerates ``2 ** n`` relations and ``3 ** n`` deltas for ``n`` universe
    tuples, so it is meant for law checking on tiny universes.
    """
    from .changes import ChangeActionSpec
    from .relations import universe

    rows = universe(schema, dom).sorted_rows()
    rels = [
        Relation(schema, c) for n in range(len(rows) + 1) for c in itertools.combinations(rows, n)
    ]
    deltas = []
    for signs in itertools.product((0, 1, -1), repeat=len(rows)):
        adds = [r for r, s in zip(rows, signs) if s == 1]
        removes = [r for r, s in zip(rows, signs) if s == -1]
        deltas.append(BooleanDelta.of(schema, adds, removes))
    return ChangeActionSpec(
        rels, deltas, apply_delta, compose_delta, BooleanDelta.zero(schema), "relations"
    )
