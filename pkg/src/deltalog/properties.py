"""Randomized checks of the formula derivative against brute-force oracles.

For a formula ``T`` and a random interpretation ``R`` with random predicate
changes ``d1``, ``d2`` the checker compares:

* ``correctness``: ``[T](R + d1) == [T](R) + ([delta T], [nabla T])``
* ``disjointness``: ``[delta T]`` and ``[nabla T]`` share no tuple
* ``sandwich``: ``minus_bot <= derivative <= minus_top`` at ``(R, d1)``
* ``regularity-zero``: the derivative at the zero change is zero
* ``regularity-sum``: the derivative at ``d1 ; d2`` equals the derivative at
  ``d1`` composed with the derivative at ``(R + d1, d2)``

Failing samples are shrunk greedily before being reported.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .boolean_delta import BooleanDelta, compose_delta, is_leq, minus_bot, minus_top
from .derivative import Deriver
from .formula import (
    BOTTOM,
    TOP,
    And,
    Atom,
    Bottom,
    Exists,
    Formula,
    Not,
    Or,
    Top,
    Var,
    free_vars,
    render,
    render_atom,
)
from .relations import ActiveDomain, Relation, Schema, row_key
from .semantics import Interpretation, evaluate, universe

PROPERTIES = ("correctness", "disjointness", "sandwich", "regularity-zero", "regularity-sum")


@dataclass(frozen=True)
class Case:
    formula: Formula
    schema: Schema
    base: dict  # pred -> Relation
    d1: dict  # pred -> BooleanDelta
    d2: dict
    dom: ActiveDomain


@dataclass
class Failure:
    prop: str
    case: Case
    detail: str

    def render(self) -> str:
        c = self.case
        lines = [f"property {self.prop} failed: {self.detail}"]
        lines.append(f"  formula over ({', '.join(c.schema.names)}): {render(c.formula)}")
        lines.append(f"  domain: {', '.join(map(str, c.dom.sorted()))}")
        facts = [render_fact(p, r) for p in sorted(c.base) for r in c.base[p].sorted_rows()]
        lines.append("  facts: " + (" ".join(facts) or "(none)"))
        lines.append("  d1: " + (" ".join(render_delta_lines(c.d1)) or "(zero)"))
        if self.prop == "regularity-sum":
            lines.append("  d2: " + (" ".join(render_delta_lines(c.d2)) or "(zero)"))
        return "\n".join(lines)


@dataclass
class Report:
    samples: int
    failures: dict  # prop -> first (shrunk) Failure
    counts: dict  # prop -> number of failing samples

    @property
    def ok(self) -> bool:
        return not self.failures


def render_fact(pred: str, row: tuple, sign: str = "") -> str:
    return sign + render_atom(Atom(pred, row)) + "."


def render_delta_lines(deltas: dict) -> list:
    out = []
    for p in sorted(deltas):
        out += [render_fact(p, r, "+") for r in deltas[p].adds.sorted_rows()]
        out += [render_fact(p, r, "-") for r in deltas[p].removes.sorted_rows()]
    return out


# Evaluation ---------------------------------------------------------------


class _Checker:
    def __init__(self, deriver: Deriver):
        self.deriver = deriver
        self.memo = {}

    def derivative(self, t: Formula):
        hit = self.memo.get(t)
        if hit is None:
            hit = (self.deriver.delta(t), self.deriver.nabla(t))
            self.memo[t] = hit
        return hit

    def value(self, c: Case, base: dict) -> Relation:
        return evaluate(c.formula, c.schema, Interpretation(base), c.dom, check_env=False)

    def change(self, c: Case, base: dict, deltas: dict):
        """Evaluated ``(delta T, nabla T)``; a plain tuple, since it may overlap."""
        up, down = self.derivative(c.formula)
        env = Interpretation(base, deltas)
        return (
            evaluate(up, c.schema, env, c.dom, check_env=False),
            evaluate(down, c.schema, env, c.dom, check_env=False),
        )

    def failures(self, c: Case, props) -> list:
        out = []
        before = self.value(c, c.base)
        moved = _apply_all(c.base, c.d1)
        after = self.value(c, moved)
        up, down = self.change(c, c.base, c.d1)
        if "disjointness" in props and up.rows & down.rows:
            row = sorted(up.rows & down.rows, key=row_key)[0]
            out.append(Failure("disjointness", c, f"tuple {row} is both added and removed"))
        if up.rows & down.rows:
            # nothing else is meaningful without a well-formed change
            return out
        d = BooleanDelta(up, down)
        got = (before | up) - down
        if "correctness" in props and got != after:
            out.append(Failure("correctness", c, _diff("updated value", after, got)))
        if "sandwich" in props:
            lo = minus_bot(after, before, universe(c.schema, c.dom))
            hi = minus_top(after, before)
            if not (is_leq(lo, d) and is_leq(d, hi)):
                out.append(Failure("sandwich", c, f"{_show(d)} is not between {_show(lo)} and {_show(hi)}"))
        if "regularity-zero" in props:
            zero = {p: BooleanDelta.zero(r.schema) for p, r in c.base.items()}
            zu, zd = self.change(c, c.base, zero)
            if zu or zd:
                out.append(Failure("regularity-zero", c, f"zero change maps to {_show((zu, zd))}"))
        if "regularity-sum" in props:
            both = {p: compose_delta(c.d1[p], c.d2[p]) for p in c.d1}
            lu, ld = self.change(c, c.base, both)
            su, sd = self.change(c, moved, c.d2)
            if su.rows & sd.rows or lu.rows & ld.rows:
                out.append(Failure("regularity-sum", c, "a derivative overlaps"))
            else:
                lhs = BooleanDelta(lu, ld)
                rhs = compose_delta(d, BooleanDelta(su, sd))
                if lhs != rhs:
                    out.append(
                        Failure(
                            "regularity-sum",
                            c,
                            f"derivative at d1;d2 is {_show(lhs)} but the two steps compose to {_show(rhs)}",
                        )
                    )
        return out


def _show(d) -> str:
    adds, removes = (d.adds, d.removes) if isinstance(d, BooleanDelta) else d
    rows = lambda r: ", ".join("(" + ",".join(map(str, t)) + ")" for t in r.sorted_rows())  # noqa: E731
    return f"+{{{rows(adds)}}} -{{{rows(removes)}}}"


def _apply_all(base: dict, deltas: dict) -> dict:
    return {p: (r | deltas[p].adds) - deltas[p].removes if p in deltas else r for p, r in base.items()}


def _diff(what: str, want: Relation, got: Relation) -> str:
    missing = sorted(want.rows - got.rows, key=row_key)
    extra = sorted(got.rows - want.rows, key=row_key)
    return f"{what}: missing {missing}, unexpected {extra}"


# Random generation --------------------------------------------------------


def random_relation(rng: random.Random, schema: Schema, dom: ActiveDomain, p: float = 0.3):
    rows = itertools.product(dom.sorted(), repeat=len(schema))
    return Relation(schema, [r for r in rows if rng.random() < p])


def random_delta(rng: random.Random, schema: Schema, dom: ActiveDomain, p: float = 0.15):
    adds, removes = [], []
    for r in itertools.product(dom.sorted(), repeat=len(schema)):
        x = rng.random()
        if x < p:
            adds.append(r)
        elif x < 2 * p:
            removes.append(r)
    return BooleanDelta.of(schema, adds, removes)


def random_interpretation(rng, schemas: dict, dom):
    base = {p: random_relation(rng, s, dom) for p, s in schemas.items()}
    d1 = {p: random_delta(rng, s, dom) for p, s in schemas.items()}
    d2 = {p: random_delta(rng, s, dom) for p, s in schemas.items()}
    return base, d1, d2


DEFAULT_PREDS = {"p": 1, "q": 1, "r": 2, "s": 2}


def random_formula(
    rng: random.Random,
    depth: int,
    preds: dict = DEFAULT_PREDS,
    names=("X", "Y", "Z"),
    consts=(),
) -> Formula:
    """A formula of depth at most ``depth`` (atoms have depth 1)."""
    if depth <= 1 or rng.random() < 0.2:
        roll = rng.random()
        if roll < 0.05:
            return TOP
        if roll < 0.1:
            return BOTTOM
        pred = rng.choice(sorted(preds))
        args = [
            rng.choice(consts) if consts and rng.random() < 0.15 else Var(rng.choice(names))
            for _ in range(preds[pred])
        ]
        return Atom(pred, args)
    kind = rng.choice(("and", "or", "not", "exists"))
    sub = lambda: random_formula(rng, depth - 1, preds, names, consts)  # noqa: E731
    if kind == "and":
        return And(sub(), sub())
    if kind == "or":
        return Or(sub(), sub())
    if kind == "not":
        return Not(sub())
    return Exists(rng.choice(names), sub())


def random_case(rng, depth=5, universe_size=4, schema_names=("X", "Y")) -> Case:
    dom = ActiveDomain(frozenset(range(1, universe_size + 1)))
    consts = tuple(dom.sorted())
    f = random_formula(rng, depth, consts=consts)
    # close over variables outside the evaluation schema
    schema = Schema.of(sorted(free_vars(f) & set(schema_names)))
    for v in sorted(free_vars(f) - set(schema_names)):
        f = Exists(v, f)
    schemas = {p: Schema.of(f"{p}${i}" for i in range(1, n + 1)) for p, n in DEFAULT_PREDS.items()}
    base, d1, d2 = random_interpretation(rng, schemas, dom)
    return Case(f, schema, base, d1, d2, dom)


# Shrinking ----------------------------------------------------------------


def _smaller_formulas(f: Formula):
    yield BOTTOM
    yield TOP
    if isinstance(f, (And, Or)):
        yield f.left
        yield f.right
        for l in _smaller_formulas(f.left):
            yield type(f)(l, f.right)
        for r in _smaller_formulas(f.right):
            yield type(f)(f.left, r)
    elif isinstance(f, Not):
        yield f.body
        for b in _smaller_formulas(f.body):
            yield Not(b)
    elif isinstance(f, Exists):
        yield f.body  # kept only if the variable was not free in it
        for b in _smaller_formulas(f.body):
            yield Exists(f.var, b)


def _size(f: Formula) -> int:
    if isinstance(f, (Top, Bottom, Atom)):
        return 1
    return 1 + sum(_size(c) for c in f.children())


def _smaller_data(c: Case):
    for field_name in ("base", "d1", "d2"):
        data = getattr(c, field_name)
        for p in sorted(data):
            val = data[p]
            if isinstance(val, Relation):
                for row in val.sorted_rows():
                    yield field_name, p, Relation(val.schema, val.rows - {row})
            else:
                for row in val.adds.sorted_rows():
                    yield field_name, p, BooleanDelta(
                        Relation(val.schema, val.adds.rows - {row}), val.removes
                    )
                for row in val.removes.sorted_rows():
                    yield field_name, p, BooleanDelta(
                        val.adds, Relation(val.schema, val.removes.rows - {row})
                    )


def shrink(checker: _Checker, failure: Failure, shrink_formula: bool = True, budget: int = 4000):
    """Greedy one-step shrinking that keeps the same property failing."""
    case = failure.case
    prop = failure.prop

    def still(c):
        for f in checker.failures(c, (prop,)):
            if f.prop == prop:
                return f
        return None

    best = failure
    improved = True
    while improved and budget > 0:
        improved = False
        if shrink_formula:
            for g in _smaller_formulas(case.formula):
                budget -= 1
                if _size(g) >= _size(case.formula) or not free_vars(g) <= set(case.schema.names):
                    continue
                cand = Case(g, case.schema, case.base, case.d1, case.d2, case.dom)
                hit = still(cand)
                if hit:
                    case, best, improved = cand, hit, True
                    break
            if improved:
                continue
        for field_name, p, val in _smaller_data(case):
            budget -= 1
            data = dict(getattr(case, field_name))
            data[p] = val
            cand = Case(**{**case.__dict__, field_name: data})
            hit = still(cand)
            if hit:
                case, best, improved = cand, hit, True
                break
    return best


# Drivers ------------------------------------------------------------------


def check_cases(cases, props=PROPERTIES, deriver: Deriver | None = None, shrink_formula=True):
    checker = _Checker(deriver or Deriver())
    failures, counts, n = {}, {p: 0 for p in props}, 0
    for c in cases:
        n += 1
        for f in checker.failures(c, props):
            counts[f.prop] += 1
            if f.prop not in failures:
                failures[f.prop] = shrink(checker, f, shrink_formula)
    return Report(n, failures, {p: k for p, k in counts.items() if k})


def check_random_formulas(
    samples=1000, seed=0, depth=5, universe_size=4, props=PROPERTIES, deriver=None
) -> Report:
    rng = random.Random(seed)
    cases = (random_case(rng, depth, universe_size) for _ in range(samples))
    return check_cases(cases, props, deriver)


def program_cases(program, samples, seed=0, universe_size=4):
    """Random cases for every rule-defined predicate's defining formula."""
    rng = random.Random(seed)
    dom = ActiveDomain.of(range(1, universe_size + 1), program.constants())
    preds = sorted(set(program.edb_preds) | set(program.idb_preds))
    schemas = {p: program.schema(p) for p in preds}
    for _ in range(samples):
        base, d1, d2 = random_interpretation(rng, schemas, dom)
        for q in sorted(program.definitions):
            yield Case(program.definitions[q], program.schema(q), base, d1, d2, dom)


def check_program(program, samples=500, seed=0, universe_size=4, props=PROPERTIES, deriver=None):
    cases = program_cases(program, samples, seed, universe_size)
    return check_cases(cases, props, deriver, shrink_formula=False)
