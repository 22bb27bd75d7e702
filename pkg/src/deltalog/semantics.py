"""Denotations of formulas as relations over a schema.

:func:`evaluate` is the engine's evaluator.  Intermediate results are kept
as *constraints* on a subset of the schema's attributes, possibly
complemented, and are only cylindrified to the full schema (and
complemented against the universal relation) at the very end.  The value it
returns is identical to the literal set-theoretic definition, which
:func:`evaluate_reference` implements directly (it materializes every
subformula over the whole schema and exists for cross-checking).
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

from .boolean_delta import BooleanDelta, apply_delta
from .errors import DomainError, EvaluationError, SchemaError
from .formula import (
    And,
    Atom,
    Bottom,
    Exists,
    Formula,
    Kind,
    Not,
    Or,
    Top,
    free_vars,
    is_var,
    rename_free,
)
from .relations import (
    ActiveDomain,
    Relation,
    Schema,
    _check_size,
    complement,
    constant_key,
    extend_to,
    select_to,
)
from .relations import universe as _universe


@dataclass
class Interpretation:
    base: dict
    deltas: dict = field(default_factory=dict)

    def updated(self) -> "Interpretation":
        """Base relations with their deltas applied; no deltas."""
        base = dict(self.base)
        for p, d in self.deltas.items():
            base[p] = apply_delta(base[p], d)
        return Interpretation(base)

    def with_deltas(self, deltas: dict) -> "Interpretation":
        return Interpretation(self.base, deltas)

    def constants(self) -> set:
        out = set()
        for r in self.base.values():
            out |= r.constants()
        for d in self.deltas.values():
            out |= d.adds.constants() | d.removes.constants()
        return out


def universe(schema, dom: ActiveDomain) -> Relation:
    return _universe(schema, dom)


def _relation_for(atom: Atom, env: Interpretation) -> Relation:
    if atom.kind is Kind.BASE:
        if atom.pred not in env.base:
            raise EvaluationError(f"predicate {atom.pred} is unbound in the interpretation")
        return env.base[atom.pred]
    if atom.pred not in env.deltas:
        raise EvaluationError(f"no delta bound for predicate {atom.pred}")
    d = env.deltas[atom.pred]
    return d.adds if atom.kind is Kind.DELTA_ADD else d.removes


def _check_schema(f: Formula, schema: Schema):
    extra = free_vars(f) - set(schema.names)
    if extra:
        raise SchemaError(f"free variables {sorted(extra)} are not in schema {schema}")


def _check_constants(f: Formula, dom: ActiveDomain):
    from .formula import constants

    stray = constants(f) - dom.constants
    if stray:
        raise DomainError(
            f"constants {sorted(stray, key=constant_key)} are outside the active domain"
        )


def _check_env(env: Interpretation, dom: ActiveDomain):
    stray = env.constants() - dom.constants
    if stray:
        raise DomainError(
            f"constants {sorted(stray, key=constant_key)} in the interpretation are "
            "outside the active domain"
        )


def _atom_rows(atom: Atom, rel: Relation):
    """Rows of ``rel`` matching ``atom``'s constants/repeats, keyed by its distinct variables."""
    names = atom.variables()
    if len(atom.args) != len(rel.schema):
        raise EvaluationError(
            f"atom {atom!r} has arity {len(atom.args)} but {atom.pred} has arity {len(rel.schema)}"
        )
    pos_of = {}
    checks = []
    for i, t in enumerate(atom.args):
        if is_var(t):
            if t.name in pos_of:
                checks.append((i, pos_of[t.name], True))
            else:
                pos_of[t.name] = i
        else:
            checks.append((i, t, False))
    out = set()
    for row in rel.rows:
        ok = True
        for i, ref, same in checks:
            if row[i] != (row[ref] if same else ref):
                ok = False
                break
        if ok:
            out.add(tuple(row[pos_of[n]] for n in names))
    return names, out


# Efficient evaluator ------------------------------------------------------


class _Den:
    """``{u | (u restricted to attrs) in rows} xor neg``."""

    __slots__ = ("attrs", "rows", "neg")

    def __init__(self, attrs: tuple, rows, neg: bool = False):
        self.attrs = attrs
        self.rows = rows
        self.neg = neg


class _Evaluator:
    def __init__(self, env: Interpretation, dom: ActiveDomain):
        self.env = env
        self.dom = dom
        self.values = dom.sorted()
        self.memo = {}

    def cylinder(self, d: _Den, attrs: tuple) -> set:
        if d.attrs == attrs:
            return d.rows
        extra = [a for a in attrs if a not in d.attrs]
        _check_size(len(d.rows) * len(self.values) ** len(extra), f"cylinder over {attrs}")
        plan = [
            (False, d.attrs.index(a)) if a in d.attrs else (True, extra.index(a))
            for a in attrs
        ]
        out = set()
        for fill in itertools.product(self.values, repeat=len(extra)):
            for row in d.rows:
                out.add(tuple(fill[i] if new else row[i] for new, i in plan))
        return out

    @staticmethod
    def merged(a: tuple, b: tuple) -> tuple:
        return a + tuple(x for x in b if x not in a)

    def join(self, x: _Den, y: _Den) -> _Den:
        if len(x.rows) > len(y.rows):
            x, y = y, x
        attrs = self.merged(x.attrs, y.attrs)
        common = [a for a in x.attrs if a in y.attrs]
        xi = [x.attrs.index(a) for a in common]
        yi = [y.attrs.index(a) for a in common]
        rest = [y.attrs.index(a) for a in attrs[len(x.attrs):]]
        index = {}
        for row in x.rows:
            index.setdefault(tuple(row[i] for i in xi), []).append(row)
        out = set()
        for row in y.rows:
            matches = index.get(tuple(row[i] for i in yi))
            if matches:
                tail = tuple(row[i] for i in rest)
                for m in matches:
                    out.add(m + tail)
        _check_size(len(out), f"join over {attrs}")
        return _Den(attrs, out)

    def conj(self, x: _Den, y: _Den) -> _Den:
        if not x.neg and not y.neg:
            return self.join(x, y)
        if x.neg and not y.neg:
            x, y = y, x
        if not x.neg:
            # x positive, y complemented: keep x rows whose y-part is not excluded
            if not set(y.attrs) <= set(x.attrs):
                attrs = self.merged(x.attrs, y.attrs)
                x = _Den(attrs, self.cylinder(x, attrs))
            idx = [x.attrs.index(a) for a in y.attrs]
            return _Den(x.attrs, {r for r in x.rows if tuple(r[i] for i in idx) not in y.rows})
        attrs = self.merged(x.attrs, y.attrs)
        return _Den(attrs, self.cylinder(x, attrs) | self.cylinder(y, attrs), True)

    def disj(self, x: _Den, y: _Den) -> _Den:
        return self.negate(self.conj(self.negate(x), self.negate(y)))

    @staticmethod
    def negate(x: _Den) -> _Den:
        return _Den(x.attrs, x.rows, not x.neg)

    def exists(self, var: str, x: _Den) -> _Den:
        if not self.values:
            return _Den((), set())
        if var not in x.attrs:
            return x
        keep = [i for i, a in enumerate(x.attrs) if a != var]
        attrs = tuple(x.attrs[i] for i in keep)
        if not x.neg:
            return _Den(attrs, {tuple(r[i] for i in keep) for r in x.rows})
        counts = Counter(tuple(r[i] for i in keep) for r in x.rows)
        full = len(self.values)
        return _Den(attrs, {k for k, n in counts.items() if n == full}, True)

    def atom(self, a: Atom) -> _Den:
        names, rows = _atom_rows(a, _relation_for(a, self.env))
        return _Den(tuple(names), rows)

    def run(self, f: Formula) -> _Den:
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            out = self.atom(f)
        elif isinstance(f, Top):
            out = _Den((), set(), True)
        elif isinstance(f, Bottom):
            out = _Den((), set())
        elif isinstance(f, And):
            out = self.conj(self.run(f.left), self.run(f.right))
        elif isinstance(f, Or):
            out = self.disj(self.run(f.left), self.run(f.right))
        elif isinstance(f, Not):
            out = self.negate(self.run(f.body))
        elif isinstance(f, Exists):
            out = self.exists(f.var, self.run(f.body))
        else:
            raise TypeError(f"unknown formula node {f!r}")
        self.memo[f] = out
        return out

    def materialize(self, d: _Den, schema: Schema) -> Relation:
        attrs = schema.names
        if d.neg:
            _check_size(len(self.values) ** len(attrs), f"universe over {schema}")
        rows = self.cylinder(d, attrs)
        if d.neg:
            rows = set(itertools.product(self.values, repeat=len(attrs))) - rows
        return Relation(schema, rows)


def evaluate(
    f: Formula, schema, env: Interpretation, dom: ActiveDomain, check_env: bool = True
) -> Relation:
    """The relation over ``schema`` denoted by ``f`` under ``env``."""
    if not isinstance(schema, Schema):
        schema = Schema.of(schema)
    _check_schema(f, schema)
    _check_constants(f, dom)
    if check_env:
        _check_env(env, dom)
    ev = _Evaluator(env, dom)
    return ev.materialize(ev.run(f), schema)


# Reference evaluator ------------------------------------------------------


def evaluate_reference(f: Formula, schema, env: Interpretation, dom: ActiveDomain) -> Relation:
    """Literal structural recursion, materializing every subformula over ``schema``."""
    if not isinstance(schema, Schema):
        schema = Schema.of(schema)
    _check_schema(f, schema)
    _check_constants(f, dom)
    _check_env(env, dom)
    return _ref(f, schema, env, dom)


def _ref(f: Formula, schema: Schema, env: Interpretation, dom: ActiveDomain) -> Relation:
    if isinstance(f, Top):
        return universe(schema, dom)
    if isinstance(f, Bottom):
        return Relation.empty(schema)
    if isinstance(f, And):
        return _ref(f.left, schema, env, dom) & _ref(f.right, schema, env, dom)
    if isinstance(f, Or):
        return _ref(f.left, schema, env, dom) | _ref(f.right, schema, env, dom)
    if isinstance(f, Not):
        return complement(_ref(f.body, schema, env, dom), dom)
    if isinstance(f, Exists):
        var, body = f.var, f.body
        if var in schema:
            # keep the quantifier binding: rename it apart from the schema
            fresh = var
            while fresh in schema:
                fresh += "'"
            body = rename_free(body, {var: fresh})
            var = fresh
        return select_to(_ref(body, schema.union([var]), env, dom), schema)
    if isinstance(f, Atom):
        rel = _relation_for(f, env)
        if len(f.args) != len(rel.schema):
            raise EvaluationError(f"atom {f!r} has the wrong arity")
        # u is kept iff the atom's argument tuple, read off u, lies in rel
        full = universe(schema, dom)
        rows = []
        for row in full.rows:
            u = dict(zip(schema.names, row))
            args = tuple(u[t.name] if is_var(t) else t for t in f.args)
            if args in rel.rows:
                rows.append(row)
        return Relation(schema, rows)
    raise TypeError(f"unknown formula node {f!r}")


__all__ = [
    "BooleanDelta",
    "Interpretation",
    "evaluate",
    "evaluate_reference",
    "extend_to",
    "universe",
]
