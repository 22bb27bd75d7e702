"""Generic change actions over finite, enumerable domains.

This module is both part of the engine (composition of differential maps)
and a law-checking harness: every check enumerates the relevant tuples
exhaustively when there are at most ``cap`` of them and otherwise draws a
deterministic seeded sample.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, NamedTuple, Sequence

from .errors import LawCheckError

DEFAULT_CAP = 10**5


class Table:
    """Extensional function: a lookup table behaving like a callable."""

    def __init__(self, mapping: dict):
        self.mapping = dict(mapping)

    @classmethod
    def tabulate(cls, fn: Callable, *domains: Iterable) -> "Table":
        if len(domains) == 1:
            return cls({x: fn(x) for x in domains[0]})
        return cls({args: fn(*args) for args in itertools.product(*domains)})

    def __call__(self, *args):
        key = args[0] if len(args) == 1 else args
        return self.mapping[key]


@dataclass(frozen=True)
class ChangeActionSpec:
    base_domain: Sequence[Hashable]
    change_domain: Sequence[Hashable]
    apply: Callable[[Any, Any], Any]
    combine: Callable[[Any, Any], Any]
    zero: Any
    name: str = "change action"


@dataclass(frozen=True)
class DifferentialMap:
    underlying: Callable[[Any], Any]
    derivative: Callable[[Any, Any], Any]

    def __call__(self, a):
        return self.underlying(a)


class Violation(NamedTuple):
    law: str
    witness: dict

    def __str__(self):
        args = ", ".join(f"{k}={_show(v)}" for k, v in self.witness.items())
        return f"{self.law} fails at {args}"


def _show(v):
    if isinstance(v, frozenset):
        return "{" + ", ".join(map(repr, sorted(v, key=repr))) + "}"
    if isinstance(v, tuple):
        return "(" + ", ".join(_show(x) for x in v) + ")"
    return repr(v)


def _tuples(domains: Sequence[Sequence], cap: int, seed):
    total = 1
    for d in domains:
        total *= len(d)
    if total <= cap:
        yield from itertools.product(*domains)
        return
    if seed is None:
        raise LawCheckError(
            f"{total} tuples exceed the exhaustive cap of {cap}; pass a sampling seed"
        )
    rng = random.Random(seed)
    for _ in range(cap):
        yield tuple(rng.choice(d) for d in domains)


def verify_change_action(spec: ChangeActionSpec, cap: int = DEFAULT_CAP, seed=None) -> list:
    """Check the monoid and action laws; returns the list of violations."""
    A, D = list(spec.base_domain), list(spec.change_domain)
    plus, act, zero = spec.combine, spec.apply, spec.zero
    report = []
    for (d,) in _tuples([D], cap, seed):
        if plus(d, zero) != d:
            report.append(Violation("right identity", {"d": d}))
        if plus(zero, d) != d:
            report.append(Violation("left identity", {"d": d}))
    for d1, d2, d3 in _tuples([D, D, D], cap, seed):
        if plus(plus(d1, d2), d3) != plus(d1, plus(d2, d3)):
            report.append(Violation("associativity", {"d1": d1, "d2": d2, "d3": d3}))
    for (a,) in _tuples([A], cap, seed):
        if act(a, zero) != a:
            report.append(Violation("action identity", {"a": a}))
    for a, d1, d2 in _tuples([A, D, D], cap, seed):
        if act(a, plus(d1, d2)) != act(act(a, d1), d2):
            report.append(Violation("action compatibility", {"a": a, "d1": d1, "d2": d2}))
    return report


def verify_differential(
    f: DifferentialMap,
    src: ChangeActionSpec,
    dst: ChangeActionSpec,
    cap: int = DEFAULT_CAP,
    seed=None,
    regular: bool = True,
) -> list:
    """Check the derivative condition and, unless disabled, regularity."""
    A, D = list(src.base_domain), list(src.change_domain)
    report = []
    for a, d in _tuples([A, D], cap, seed):
        if f.underlying(src.apply(a, d)) != dst.apply(f.underlying(a), f.derivative(a, d)):
            report.append(Violation("derivative condition", {"a": a, "d": d}))
    if not regular:
        return report
    for (a,) in _tuples([A], cap, seed):
        if f.derivative(a, src.zero) != dst.zero:
            report.append(Violation("regularity (zero)", {"a": a}))
    for a, d1, d2 in _tuples([A, D, D], cap, seed):
        lhs = f.derivative(a, src.combine(d1, d2))
        rhs = dst.combine(f.derivative(a, d1), f.derivative(src.apply(a, d1), d2))
        if lhs != rhs:
            report.append(Violation("regularity (sum)", {"a": a, "d1": d1, "d2": d2}))
    return report


def identity_map() -> DifferentialMap:
    return DifferentialMap(lambda a: a, lambda a, d: d)


def chain(f: DifferentialMap, g: DifferentialMap) -> DifferentialMap:
    """``g`` after ``f``, differentiated by the chain rule."""
    fu, fd, gu, gd = f.underlying, f.derivative, g.underlying, g.derivative
    return DifferentialMap(lambda a: gu(fu(a)), lambda a, d: gd(fu(a), fd(a, d)))


def product(a: ChangeActionSpec, b: ChangeActionSpec) -> ChangeActionSpec:
    return ChangeActionSpec(
        base_domain=list(itertools.product(a.base_domain, b.base_domain)),
        change_domain=list(itertools.product(a.change_domain, b.change_domain)),
        apply=lambda x, d: (a.apply(x[0], d[0]), b.apply(x[1], d[1])),
        combine=lambda d, e: (a.combine(d[0], e[0]), b.combine(d[1], e[1])),
        zero=(a.zero, b.zero),
        name=f"{a.name} x {b.name}",
    )


def fst() -> DifferentialMap:
    return DifferentialMap(lambda x: x[0], lambda x, d: d[0])


def snd() -> DifferentialMap:
    return DifferentialMap(lambda x: x[1], lambda x, d: d[1])


def pair(f: DifferentialMap, g: DifferentialMap) -> DifferentialMap:
    return DifferentialMap(
        lambda x: (f.underlying(x), g.underlying(x)),
        lambda x, d: (f.derivative(x, d), g.derivative(x, d)),
    )


def derivative_from_minus(
    minus: Callable[[Any, Any], Any],
    f: Callable[[Any], Any],
    src: ChangeActionSpec,
    dst: ChangeActionSpec | None = None,
) -> DifferentialMap:
    """``df(a, d) = f(a + d) minus f(a)``.

    The derivative condition holds whenever ``minus`` is a valid minus
    operator on the target; regularity does not follow in general and is
    left to the caller.
    """

    def derivative(a, d):
        new, old = f(src.apply(a, d)), f(a)
        change = minus(new, old)
        if dst is not None:
            assert dst.apply(old, change) == new, "minus operator violates its law"
        return change

    return DifferentialMap(f, derivative)


def combine_partials(d1: Callable, d2: Callable, left: ChangeActionSpec, target: ChangeActionSpec):
    """Rebuild a full derivative of ``f(a, b)`` from its two partials."""

    def derivative(x, d):
        (a, b), (da, db) = x, d
        return target.combine(d1((a, b), da), d2((left.apply(a, da), b), db))

    return derivative


# Shipped change actions ---------------------------------------------------


def powerset(atoms: Iterable) -> list:
    atoms = list(atoms)
    return [
        frozenset(c)
        for r in range(len(atoms) + 1)
        for c in itertools.combinations(atoms, r)
    ]


def discrete(domain: Iterable) -> ChangeActionSpec:
    """Only the trivial change exists; every function is differentiable."""
    return ChangeActionSpec(
        base_domain=list(domain),
        change_domain=[()],
        apply=lambda a, d: a,
        combine=lambda d, e: (),
        zero=(),
        name="discrete",
    )


def powerset_union(atoms: Iterable) -> ChangeActionSpec:
    sets = powerset(atoms)
    return ChangeActionSpec(sets, sets, frozenset.union, frozenset.union, frozenset(), "union")


def bowtie_apply(a: frozenset, d: tuple) -> frozenset:
    p, q = d
    return (a | p) - q


def bowtie_combine(d1: tuple, d2: tuple) -> tuple:
    (p, q), (r, s) = d1, d2
    return ((p - s) | r, (q - r) | s)


def bowtie_changes(atoms: Iterable) -> list:
    """All disjoint (adds, removes) pairs over ``atoms``: 3 ** n of them."""
    atoms = list(atoms)
    out = []
    for signs in itertools.product((0, 1, -1), repeat=len(atoms)):
        adds = frozenset(x for x, s in zip(atoms, signs) if s == 1)
        removes = frozenset(x for x, s in zip(atoms, signs) if s == -1)
        out.append((adds, removes))
    return out


def bowtie(atoms: Iterable) -> ChangeActionSpec:
    """The add/remove change action on the powerset of ``atoms``."""
    atoms = list(atoms)
    return ChangeActionSpec(
        base_domain=powerset(atoms),
        change_domain=bowtie_changes(atoms),
        apply=bowtie_apply,
        combine=bowtie_combine,
        zero=(frozenset(), frozenset()),
        name="bowtie",
    )


def bowtie_minus_bot(universe: Iterable):
    universe = frozenset(universe)

    def minus(a, b):
        return (a - b, universe - a)

    return minus


def bowtie_minus_top(a, b):
    return (a, b - a)


def bowtie_leq(d1: tuple, d2: tuple) -> bool:
    return d1[0] <= d2[0] and d1[1] >= d2[1]
