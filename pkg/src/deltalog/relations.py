"""Finite relations over named schemata.

A relation is a frozenset of value tuples whose positions follow the
canonical (naturally sorted) attribute order of its schema.  Named-tuple
views are available through :meth:`Relation.bindings` for callers that want
``{attribute: constant}`` maps.
"""
from __future__ import annotations

import itertools
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import DomainError, RelationSizeError, SchemaError

DEFAULT_MAX_RELATION_SIZE = 10**6

_DIGITS = re.compile(r"(\d+)")


def max_relation_size() -> int:
    raw = os.environ.get("DELTALOG_MAX_RELATION_SIZE")
    return int(raw) if raw else DEFAULT_MAX_RELATION_SIZE


def _natural_key(name: str):
    # "p$2" sorts before "p$10"
    return tuple(int(tok) if tok.isdigit() else tok for tok in _DIGITS.split(name))


def constant_key(c):
    """Total order on constants: integers first, then symbols."""
    return (0, c, "") if isinstance(c, int) else (1, 0, c)


def row_key(row):
    return tuple(constant_key(c) for c in row)


@dataclass(frozen=True)
class Schema:
    names: tuple
    order: tuple = field(default=(), compare=False, hash=False, repr=False)

    def __post_init__(self):
        names = tuple(self.names)
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute names in {names}")
        object.__setattr__(self, "order", tuple(self.order) or names)
        object.__setattr__(self, "names", tuple(sorted(names, key=_natural_key)))

    @classmethod
    def of(cls, names: Iterable[str]) -> "Schema":
        names = tuple(names)
        return cls(names, names)

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.names

    def issubset(self, other: "Schema") -> bool:
        return set(self.names) <= set(other.names)

    def union(self, other: Iterable[str]) -> "Schema":
        extra = [n for n in other if n not in self.names]
        return Schema.of(self.order + tuple(extra))

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __str__(self):
        return "{" + ", ".join(self.order) + "}"


@dataclass(frozen=True)
class ActiveDomain:
    constants: frozenset

    def __post_init__(self):
        object.__setattr__(self, "constants", frozenset(self.constants))

    @classmethod
    def of(cls, *groups: Iterable) -> "ActiveDomain":
        return cls(frozenset(itertools.chain.from_iterable(groups)))

    def sorted(self) -> list:
        return sorted(self.constants, key=constant_key)

    def extended(self, constants: Iterable) -> "ActiveDomain":
        return ActiveDomain(self.constants | frozenset(constants))

    def __len__(self):
        return len(self.constants)

    def __contains__(self, c):
        return c in self.constants


def _check_size(n: int, what: str):
    cap = max_relation_size()
    if n > cap:
        raise RelationSizeError(
            f"{what} would hold {n} tuples, above the cap of {cap}; "
            "use a smaller domain or raise DELTALOG_MAX_RELATION_SIZE"
        )


class Relation:
    """Immutable set of tuples over a :class:`Schema`."""

    __slots__ = ("schema", "rows", "_hash")

    def __init__(self, schema, rows: Iterable[tuple] = ()):
        if not isinstance(schema, Schema):
            schema = Schema.of(schema)
        self.schema = schema
        self.rows = frozenset(rows)
        self._hash = None
        width = len(schema)
        for row in self.rows:
            if len(row) != width:
                raise SchemaError(f"tuple {row} does not match schema {schema}")

    @classmethod
    def from_bindings(cls, schema, bindings: Iterable[Mapping]) -> "Relation":
        if not isinstance(schema, Schema):
            schema = Schema.of(schema)
        rows = []
        for b in bindings:
            if set(b) != set(schema.names):
                raise SchemaError(f"bindings {dict(b)} do not cover exactly {schema}")
            rows.append(tuple(b[n] for n in schema.names))
        return cls(schema, rows)

    @classmethod
    def empty(cls, schema) -> "Relation":
        return cls(schema, ())

    def bindings(self) -> list:
        return [dict(zip(self.schema.names, row)) for row in self.sorted_rows()]

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=row_key)

    def constants(self) -> set:
        return {c for row in self.rows for c in row}

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __contains__(self, row):
        return row in self.rows

    def __bool__(self):
        return bool(self.rows)

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        return self.schema == other.schema and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.schema, self.rows))
        return self._hash

    def __le__(self, other: "Relation") -> bool:
        _same_schema(self, other)
        return self.rows <= other.rows

    def __repr__(self):
        body = ", ".join(map(str, self.sorted_rows()))
        return f"Relation({list(self.schema.names)}, {{{body}}})"

    def __or__(self, other):
        return union(self, other)

    def __and__(self, other):
        return intersect(self, other)

    def __sub__(self, other):
        return difference(self, other)


def _same_schema(r1: Relation, r2: Relation):
    if r1.schema != r2.schema:
        raise SchemaError(f"schema mismatch: {r1.schema} vs {r2.schema}")


def union(r1: Relation, r2: Relation) -> Relation:
    _same_schema(r1, r2)
    return Relation(r1.schema, r1.rows | r2.rows)


def intersect(r1: Relation, r2: Relation) -> Relation:
    _same_schema(r1, r2)
    return Relation(r1.schema, r1.rows & r2.rows)


def difference(r1: Relation, r2: Relation) -> Relation:
    _same_schema(r1, r2)
    return Relation(r1.schema, r1.rows - r2.rows)


def universe(schema, dom: ActiveDomain) -> Relation:
    """All ``|dom| ** |schema|`` tuples; the nullary universe is ``{()}``."""
    if not isinstance(schema, Schema):
        schema = Schema.of(schema)
    _check_size(len(dom) ** len(schema), f"universe over {schema}")
    values = dom.sorted()
    return Relation(schema, itertools.product(values, repeat=len(schema)))


def select_to(r: Relation, target) -> Relation:
    """Restrict every tuple to the attributes of ``target``."""
    if not isinstance(target, Schema):
        target = Schema.of(target)
    missing = [n for n in target if n not in r.schema]
    if missing:
        raise SchemaError(f"cannot select {target} from {r.schema}: missing {missing}")
    idx = [r.schema.index(n) for n in target.names]
    return Relation(target, (tuple(row[i] for i in idx) for row in r.rows))


def rename(r: Relation, mapping: Mapping[str, str]) -> Relation:
    if set(mapping) != set(r.schema.names):
        raise SchemaError(
            f"renaming domain {sorted(mapping)} differs from schema {r.schema}"
        )
    if len(set(mapping.values())) != len(mapping):
        raise SchemaError(f"renaming {dict(mapping)} is not injective")
    target = Schema.of(mapping[n] for n in r.schema.order)
    back = {new: old for old, new in mapping.items()}
    idx = [r.schema.index(back[n]) for n in target.names]
    return Relation(target, (tuple(row[i] for i in idx) for row in r.rows))


def extend_to(r: Relation, target, dom: ActiveDomain) -> Relation:
    """Cylindrify ``r`` to ``target``: extra attributes range over ``dom``."""
    if not isinstance(target, Schema):
        target = Schema.of(target)
    if not r.schema.issubset(target):
        extra = [n for n in r.schema if n not in target]
        raise SchemaError(f"cannot extend {r.schema} to {target}: {extra} not in target")
    if target == r.schema:
        return r
    new = [n for n in target.names if n not in r.schema]
    _check_size(len(r) * len(dom) ** len(new), f"extension to {target}")
    plan = [
        (True, r.schema.index(n)) if n in r.schema else (False, new.index(n))
        for n in target.names
    ]
    values = dom.sorted()
    rows = []
    for fill in itertools.product(values, repeat=len(new)):
        for row in r.rows:
            rows.append(tuple(row[i] if old else fill[i] for old, i in plan))
    return Relation(target, rows)


def complement(r: Relation, dom: ActiveDomain) -> Relation:
    stray = r.constants() - dom.constants
    if stray:
        raise DomainError(
            f"constants {sorted(stray, key=constant_key)} are outside the active domain"
        )
    return difference(universe(r.schema, dom), r)
