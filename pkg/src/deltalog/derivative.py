"""Upward (``delta``) and downward (``nabla``) formula derivatives.

For a formula ``T`` over base predicates, ``delta(T)`` and ``nabla(T)`` are
formulas over base predicates and their change atoms (``delta_p`` for added
tuples, ``nabla_p`` for removed ones).  Evaluated together they give an
(adds, removes) change of ``T``'s denotation.  ``next_value(T)`` is
``(T ; delta(T)), !nabla(T)``, the value of ``T`` after the change.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DeltalogError
from .formula import (
    BOTTOM,
    TOP,
    And,
    Atom,
    Bottom,
    Exists,
    Formula,
    Kind,
    Not,
    Or,
    Top,
    atoms,
)


class DerivativeError(DeltalogError):
    pass


@dataclass(frozen=True)
class FormulaDerivative:
    up: Formula
    down: Formula


class Deriver:
    """Memoizing transformer; ``symmetric_or`` selects the precise disjunction rule."""

    def __init__(self, symmetric_or: bool = False):
        self.symmetric_or = symmetric_or
        self._up = {}
        self._down = {}
        self._next = {}

    def delta(self, t: Formula) -> Formula:
        hit = self._up.get(t)
        if hit is not None:
            return hit
        if isinstance(t, (Top, Bottom)):
            out = BOTTOM
        elif isinstance(t, Atom):
            out = t.with_kind(Kind.DELTA_ADD)
        elif isinstance(t, Or):
            if self.symmetric_or:
                out = Or(
                    And(self.delta(t.left), Not(t.right)),
                    And(self.delta(t.right), Not(t.left)),
                )
            else:
                out = Or(self.delta(t.left), self.delta(t.right))
        elif isinstance(t, And):
            out = Or(
                And(self.delta(t.left), self.next(t.right)),
                And(self.delta(t.right), self.next(t.left)),
            )
        elif isinstance(t, Not):
            out = self.nabla(t.body)
        elif isinstance(t, Exists):
            out = Exists(t.var, self.delta(t.body))
        else:
            raise TypeError(f"unknown formula node {t!r}")
        self._up[t] = out
        return out

    def nabla(self, t: Formula) -> Formula:
        hit = self._down.get(t)
        if hit is not None:
            return hit
        if isinstance(t, (Top, Bottom)):
            out = BOTTOM
        elif isinstance(t, Atom):
            out = t.with_kind(Kind.DELTA_REMOVE)
        elif isinstance(t, Or):
            out = Or(
                And(self.nabla(t.left), Not(self.next(t.right))),
                And(self.nabla(t.right), Not(self.next(t.left))),
            )
        elif isinstance(t, And):
            out = Or(And(self.nabla(t.left), t.right), And(t.left, self.nabla(t.right)))
        elif isinstance(t, Not):
            out = self.delta(t.body)
        elif isinstance(t, Exists):
            out = And(
                Exists(t.var, self.nabla(t.body)),
                Not(Exists(t.var, self.next(t.body))),
            )
        else:
            raise TypeError(f"unknown formula node {t!r}")
        self._down[t] = out
        return out

    def next(self, t: Formula) -> Formula:
        hit = self._next.get(t)
        if hit is None:
            hit = And(Or(t, self.delta(t)), Not(self.nabla(t)))
            self._next[t] = hit
        return hit


def _base_only(t: Formula):
    for a in atoms(t):
        if a.kind is not Kind.BASE:
            raise DerivativeError(
                f"formula already contains change atom {a!r}; second derivatives are not supported"
            )


def delta(t: Formula, symmetric_or: bool = False) -> Formula:
    _base_only(t)
    return Deriver(symmetric_or).delta(t)


def nabla(t: Formula, symmetric_or: bool = False) -> Formula:
    _base_only(t)
    return Deriver(symmetric_or).nabla(t)


def next_value(t: Formula, symmetric_or: bool = False) -> Formula:
    _base_only(t)
    return Deriver(symmetric_or).next(t)


def derive(t: Formula, symmetric_or: bool = False, deriver: Deriver | None = None) -> FormulaDerivative:
    _base_only(t)
    d = deriver or Deriver(symmetric_or)
    return FormulaDerivative(d.delta(t), d.nabla(t))


def derive_program(program, symmetric_or: bool = False) -> dict:
    """``{idb_pred: FormulaDerivative}`` for every rule-defined predicate."""
    d = Deriver(symmetric_or)
    return {p: derive(f, deriver=d) for p, f in program.definitions.items()}


def simplify(f: Formula, zero_preds=frozenset()) -> Formula:
    """Constant-fold, treating change atoms of ``zero_preds`` as empty.

    Only used for display; the engine always evaluates unsimplified formulas.
    """
    memo = {}

    def go(g):
        if g in memo:
            return memo[g]
        if isinstance(g, Atom):
            out = BOTTOM if g.kind is not Kind.BASE and g.pred in zero_preds else g
        elif isinstance(g, (Top, Bottom)):
            out = g
        elif isinstance(g, Not):
            b = go(g.body)
            out = BOTTOM if b == TOP else TOP if b == BOTTOM else b.body if isinstance(b, Not) else Not(b)
        elif isinstance(g, Exists):
            b = go(g.body)
            out = b if isinstance(b, (Top, Bottom)) else Exists(g.var, b)
        elif isinstance(g, And):
            l, r = go(g.left), go(g.right)
            if l == BOTTOM or r == BOTTOM:
                out = BOTTOM
            elif l == TOP:
                out = r
            elif r == TOP or l == r:
                out = l
            else:
                out = And(l, r)
        elif isinstance(g, Or):
            l, r = go(g.left), go(g.right)
            if l == TOP or r == TOP:
                out = TOP
            elif l == BOTTOM:
                out = r
            elif r == BOTTOM or l == r:
                out = l
            else:
                out = Or(l, r)
        else:
            raise TypeError(f"unknown formula node {g!r}")
        memo[g] = out
        return out

    return go(f)
