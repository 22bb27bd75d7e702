"""Formula AST.

Nodes are immutable and hash-consed by structure (hashes are cached, so
large derivative formulas stay cheap to use as dictionary keys).
"""
from __future__ import annotations

import enum
from typing import Iterable

from .relations import constant_key


class Kind(enum.Enum):
    BASE = "base"
    DELTA_ADD = "delta"
    DELTA_REMOVE = "nabla"


class Var:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return hash(("Var", self.name))

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name


def is_var(term) -> bool:
    return isinstance(term, Var)


def render_term(term) -> str:
    return str(term) if isinstance(term, (Var, int)) else term


class Formula:
    __slots__ = ("_key", "_hash")

    def _init(self, *key):
        self._key = (type(self).__name__,) + key
        self._hash = hash(self._key)

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Formula) and self._hash == other._hash and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return render(self)

    def children(self) -> tuple:
        return ()

    # operator sugar for building formulas in tests
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


class Top(Formula):
    __slots__ = ()

    def __init__(self):
        self._init()


class Bottom(Formula):
    __slots__ = ()

    def __init__(self):
        self._init()


class Atom(Formula):
    __slots__ = ("pred", "kind", "args")

    def __init__(self, pred: str, args: Iterable, kind: Kind = Kind.BASE):
        self.pred = pred
        self.kind = kind
        self.args = tuple(args)
        self._init(pred, kind, self.args)

    def with_kind(self, kind: Kind) -> "Atom":
        return Atom(self.pred, self.args, kind)

    def variables(self) -> list:
        seen = []
        for a in self.args:
            if is_var(a) and a.name not in seen:
                seen.append(a.name)
        return seen


class And(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left, self.right = left, right
        self._init(left, right)

    def children(self):
        return (self.left, self.right)


class Or(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left, self.right = left, right
        self._init(left, right)

    def children(self):
        return (self.left, self.right)


class Not(Formula):
    __slots__ = ("body",)

    def __init__(self, body: Formula):
        self.body = body
        self._init(body)

    def children(self):
        return (self.body,)


class Exists(Formula):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body: Formula):
        self.var = var
        self.body = body
        self._init(var, body)

    def children(self):
        return (self.body,)


TOP = Top()
BOTTOM = Bottom()


def conj(*fs: Formula) -> Formula:
    if not fs:
        return TOP
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        return BOTTOM
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def exists(names: Iterable[str], body: Formula) -> Formula:
    """Nest quantifiers so that the first name is outermost."""
    for name in reversed(list(names)):
        body = Exists(name, body)
    return body


def free_vars(f: Formula) -> frozenset:
    memo = {}

    def go(g):
        if id(g) in memo:
            return memo[id(g)]
        if isinstance(g, Atom):
            out = frozenset(a.name for a in g.args if is_var(a))
        elif isinstance(g, Exists):
            out = go(g.body) - {g.var}
        else:
            out = frozenset().union(*(go(c) for c in g.children()))
        memo[id(g)] = out
        return out

    return go(f)


def atoms(f: Formula) -> list:
    out, stack, seen = [], [f], set()
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        if isinstance(g, Atom):
            out.append(g)
        stack.extend(g.children())
    return out


def constants(f: Formula) -> set:
    return {a for atom in atoms(f) for a in atom.args if not is_var(a)}


def predicates(f: Formula, kind: Kind | None = None) -> set:
    return {a.pred for a in atoms(f) if kind is None or a.kind == kind}


def depth(f: Formula) -> int:
    kids = f.children()
    return 1 + max((depth(c) for c in kids), default=0)


def rename_free(f: Formula, mapping: dict) -> Formula:
    """Rename free variables; bound variables that would capture are refreshed."""
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(
            f.pred,
            [Var(mapping.get(a.name, a.name)) if is_var(a) else a for a in f.args],
            f.kind,
        )
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(rename_free(f.body, mapping))
    if isinstance(f, And):
        return And(rename_free(f.left, mapping), rename_free(f.right, mapping))
    if isinstance(f, Or):
        return Or(rename_free(f.left, mapping), rename_free(f.right, mapping))
    if isinstance(f, Exists):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        var, body = f.var, f.body
        if var in inner.values():
            fresh = _fresh(var, set(inner.values()) | free_vars(body))
            body = rename_free(body, {var: fresh})
            var = fresh
        return Exists(var, rename_free(body, inner))
    raise TypeError(f"unknown formula node {f!r}")


def rename_apart(f: Formula, taken: Iterable[str] = ()) -> Formula:
    """Give every quantifier a distinct variable not in ``taken`` or free in ``f``."""
    used = set(taken) | set(free_vars(f))

    def go(g):
        if isinstance(g, Exists):
            var = g.var if g.var not in used else _fresh(g.var, used)
            used.add(var)
            body = rename_free(g.body, {g.var: var}) if var != g.var else g.body
            return Exists(var, go(body))
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, (And, Or)):
            return type(g)(go(g.left), go(g.right))
        return g

    return go(f)


def _fresh(base: str, taken: set) -> str:
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


# Rendering ----------------------------------------------------------------

_PREFIX = {Kind.BASE: "", Kind.DELTA_ADD: "delta_", Kind.DELTA_REMOVE: "nabla_"}

_PREC = {Or: 1, And: 2}


def render_atom(a: Atom) -> str:
    args = ",".join(render_term(t) for t in a.args)
    return f"{_PREFIX[a.kind]}{a.pred}({args})"


def render(f: Formula, explicit_exists: bool = True) -> str:
    """Surface syntax for ``f``.

    With ``explicit_exists`` quantifiers print as ``exists X. (...)``; without
    it they are dropped, which re-parses to the same tree only for formulas
    whose quantifiers sit where the parser would put them (rule bodies).
    """

    def go(g, ctx):
        if isinstance(g, Top):
            return "true"
        if isinstance(g, Bottom):
            return "false"
        if isinstance(g, Atom):
            return render_atom(g)
        if isinstance(g, Not):
            return "!" + go(g.body, 3)
        if isinstance(g, Exists):
            if not explicit_exists:
                return go(g.body, ctx)
            names = [g.var]
            body = g.body
            while isinstance(body, Exists):
                names.append(body.var)
                body = body.body
            text = f"exists {','.join(names)}. ({go(body, 0)})"
            return f"({text})" if ctx > 0 else text
        prec = _PREC[type(g)]
        sep = ", " if isinstance(g, And) else " ; "
        # left-nested chains print flat; right operands of equal precedence
        # keep their parentheses so the tree shape survives a round trip
        text = go(g.left, prec) + sep + go(g.right, prec + 0.5)
        return f"({text})" if ctx > prec else text

    return go(f, 0)


def sort_constants(cs: Iterable) -> list:
    return sorted(cs, key=constant_key)
