"""Static checks: variable safety and parity stratification."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import networkx as nx

from .errors import SafetyError, StratificationError
from .formula import And, Atom, Exists, Formula, Not, Or, is_var, render_atom
from .program import Program


def _bound_vars(f: Formula, where: str) -> set:
    """Range-restricted variables of ``f``; raises on an unbound quantifier."""
    if isinstance(f, Atom):
        return {t.name for t in f.args if is_var(t)}
    if isinstance(f, Not):
        _bound_vars(f.body, where)
        return set()
    if isinstance(f, And):
        return _bound_vars(f.left, where) | _bound_vars(f.right, where)
    if isinstance(f, Or):
        return _bound_vars(f.left, where) & _bound_vars(f.right, where)
    if isinstance(f, Exists):
        inner = _bound_vars(f.body, where)
        if f.var not in inner:
            raise SafetyError(
                f"{where}: variable {f.var} has no positive occurrence in its scope"
            )
        return inner - {f.var}
    return set()


def check_safety(program: Program) -> bool:
    """Every variable needs a positive, un-negated occurrence within its scope.

    A disjunction only binds the variables bound by both of its branches.
    """
    for rule in program.rules:
        where = f"rule at line {rule.line} ({render_atom(rule.head)})"
        bound = _bound_vars(rule.body, where)
        for t in rule.head.args:
            if t.name not in bound:
                raise SafetyError(
                    f"{where}: head variable {t.name} has no positive occurrence in the body"
                )
    program.safe = True
    return True


@dataclass(frozen=True)
class Certificate:
    strata: tuple  # tuples of IDB predicates, dependencies first
    recursive: frozenset  # predicates that sit on a dependency cycle


def dependency_edges(program: Program) -> list:
    """``(head, body_pred, parity)`` for every body atom occurrence."""
    edges = []
    for head, body in program.definitions.items():
        def go(g, neg):
            if isinstance(g, Atom):
                edges.append((head, g.pred, neg % 2))
            elif isinstance(g, Not):
                go(g.body, neg + 1)
            else:
                for c in g.children():
                    go(c, neg)

        go(body, 0)
    return edges


def _odd_cycle(scc: set, edges: list):
    """Closed walk with odd negation parity inside ``scc``, or None."""
    succ = {}
    for h, b, par in edges:
        if h in scc and b in scc:
            succ.setdefault(h, set()).add((b, par))
    for start in sorted(scc):
        prev = {(start, 0): None}
        queue = deque([(start, 0)])
        while queue:
            node, par = queue.popleft()
            for nxt, p in sorted(succ.get(node, ())):
                state = (nxt, par ^ p)
                if state in prev:
                    continue
                prev[state] = (node, par)
                if state == (start, 1):
                    walk = [start]
                    cur = prev[state]
                    while cur is not None:
                        walk.append(cur[0])
                        cur = prev[cur]
                    # walk runs from body predicate back to head; print head first
                    return list(reversed(walk))
                queue.append(state)
    return None


def check_parity_stratification(program: Program) -> Certificate:
    """Accept iff every dependency cycle passes through an even number of negations."""
    edges = dependency_edges(program)
    g = nx.DiGraph()
    g.add_nodes_from(program.idb_preds)
    for h, b, _ in edges:
        if b in program.idb_preds:
            g.add_edge(b, h)  # b must be computed before h
    for scc in nx.strongly_connected_components(g):
        cycle = _odd_cycle(scc, edges)
        if cycle:
            shown = " -> ".join(cycle)
            raise StratificationError(
                f"recursion through an odd number of negations: {shown}", cycle
            )
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    groups = {}
    for pred, c in members.items():
        groups.setdefault(c, []).append(pred)
    order = nx.lexicographical_topological_sort(cond, key=lambda c: min(groups[c]))
    strata = tuple(tuple(sorted(groups[c])) for c in order)
    recursive = frozenset(
        p for p in program.idb_preds if len(groups[members[p]]) > 1 or g.has_edge(p, p)
    )
    program.strata = list(strata)
    program.parity_ok = True
    return Certificate(strata, recursive)
