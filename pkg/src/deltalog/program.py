"""Programs: rules, predicate declarations and per-predicate defining formulas."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import ProgramError
from .formula import (
    And,
    Atom,
    Formula,
    Not,
    Or,
    Var,
    atoms,
    disj,
    exists,
    is_var,
    render,
    render_atom,
    rename_free,
)
from .parser import SurfaceRule, parse_rules
from .relations import Schema


def param(pred: str, i: int) -> str:
    """Canonical attribute name of the ``i``-th (1-based) parameter of ``pred``."""
    return f"{pred}${i}"


def canonical_schema(pred: str, arity: int) -> Schema:
    return Schema.of(param(pred, i) for i in range(1, arity + 1))


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Formula
    line: int = 0

    def render(self) -> str:
        return f"{render_atom(self.head)} :- {render(self.body, explicit_exists=False)}."


@dataclass
class Program:
    edb_preds: dict
    idb_preds: dict
    rules: list
    definitions: dict
    facts: dict = field(default_factory=dict)
    strata: list | None = None  # SCCs in dependency order, set by the parity check
    parity_ok: bool = False
    safe: bool = False

    def arity(self, pred: str) -> int:
        if pred in self.idb_preds:
            return self.idb_preds[pred]
        return self.edb_preds[pred]

    def schema(self, pred: str) -> Schema:
        return canonical_schema(pred, self.arity(pred))

    def rules_for(self, pred: str) -> list:
        return [r for r in self.rules if r.head.pred == pred]

    def constants(self) -> set:
        out = set()
        for r in self.rules:
            out |= {a for atom in atoms(r.body) for a in atom.args if not is_var(a)}
        for rows in self.facts.values():
            out |= {c for row in rows for c in row}
        return out

    def render(self) -> str:
        lines = []
        for pred in sorted(self.facts):
            for row in sorted(self.facts[pred], key=str):
                lines.append(render_atom(Atom(pred, row)) + ".")
        lines.extend(r.render() for r in self.rules)
        return "\n".join(lines) + ("\n" if lines else "")


def _occurrences(f: Formula, counts: Counter):
    for a in atoms_in_order(f):
        for t in a.args:
            if is_var(t):
                counts[t.name] += 1


def atoms_in_order(f: Formula) -> list:
    """Atoms in textual (left-to-right) order, with repetitions."""
    out = []

    def go(g):
        if isinstance(g, Atom):
            out.append(g)
        for c in g.children():
            go(c)

    go(f)
    return out


def quantify(body: Formula, head_vars: set) -> Formula:
    """Insert existential quantifiers for body-only variables.

    Each variable is bound at the lowest negation (or at the rule body) whose
    scope contains every occurrence of it; quantifiers sharing a scope nest
    in order of first textual occurrence, the first one outermost.
    """
    total = Counter()
    _occurrences(body, total)
    first = {}
    for a in atoms_in_order(body):
        for t in a.args:
            if is_var(t):
                first.setdefault(t.name, len(first))
    claimed = set(head_vars)

    def bind_here(g: Formula) -> Formula:
        local = Counter()
        _occurrences(g, local)
        names = [v for v in local if v not in claimed and local[v] == total[v]]
        claimed.update(names)
        return exists(sorted(names, key=first.get), g)

    def go(g: Formula) -> Formula:
        if isinstance(g, Not):
            inner = go(g.body)
            return Not(bind_here(inner))
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        return g

    return bind_here(go(body))


def build_program(surface: list) -> Program:
    """Lower parsed rules: declare predicates, quantify bodies, merge rules per head."""
    arities: dict = {}
    where: dict = {}

    def note(atom: Atom, sr: SurfaceRule):
        n = len(atom.args)
        if atom.pred in arities and arities[atom.pred] != n:
            raise ProgramError(
                f"line {sr.line}: predicate {atom.pred} used with arity {n}, "
                f"but arity {arities[atom.pred]} at line {where[atom.pred]}"
            )
        arities.setdefault(atom.pred, n)
        where.setdefault(atom.pred, sr.line)

    rules, facts, heads = [], {}, set()
    for sr in surface:
        note(sr.head, sr)
        if sr.body is None:
            if any(is_var(t) for t in sr.head.args):
                raise ProgramError(
                    f"line {sr.line}: fact {render_atom(sr.head)} has variables; "
                    "head variables must occur in a body"
                )
            facts.setdefault(sr.head.pred, set()).add(sr.head.args)
            continue
        for a in atoms_in_order(sr.body):
            note(a, sr)
        head_vars = []
        for t in sr.head.args:
            if not is_var(t):
                raise ProgramError(
                    f"line {sr.line}: rule head {render_atom(sr.head)} may only contain variables"
                )
            if t.name in head_vars:
                raise ProgramError(
                    f"line {sr.line}: rule head {render_atom(sr.head)} repeats variable {t.name}"
                )
            head_vars.append(t.name)
        body_vars = {t.name for a in atoms_in_order(sr.body) for t in a.args if is_var(t)}
        missing = [v for v in head_vars if v not in body_vars]
        if missing:
            raise ProgramError(
                f"line {sr.line}: head variable(s) {', '.join(missing)} of "
                f"{render_atom(sr.head)} do not occur in the body"
            )
        heads.add(sr.head.pred)
        rules.append(Rule(sr.head, quantify(sr.body, set(head_vars)), sr.line))

    mixed = heads & set(facts)
    if mixed:
        raise ProgramError(
            f"predicate(s) {', '.join(sorted(mixed))} have both facts and rules"
        )
    idb = {p: arities[p] for p in arities if p in heads}
    edb = {p: arities[p] for p in arities if p not in heads}
    definitions = {}
    for pred in idb:
        bodies = []
        for r in rules:
            if r.head.pred != pred:
                continue
            mapping = {t.name: param(pred, i) for i, t in enumerate(r.head.args, 1)}
            bodies.append(rename_free(r.body, mapping))
        definitions[pred] = disj(*bodies)
    return Program(edb, idb, rules, definitions, facts)


def parse_program(text: str, check: bool = True) -> Program:
    """Parse program text; with ``check`` also run the safety and parity checks."""
    program = build_program(parse_rules(text))
    if check:
        from .analysis import check_parity_stratification, check_safety

        check_safety(program)
        check_parity_stratification(program)
    return program


def head_params(pred: str, arity: int) -> Atom:
    return Atom(pred, [Var(param(pred, i)) for i in range(1, arity + 1)])


__all__ = [
    "Program",
    "Rule",
    "build_program",
    "canonical_schema",
    "head_params",
    "param",
    "parse_program",
    "quantify",
]
