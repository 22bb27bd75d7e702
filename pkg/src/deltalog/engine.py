"""Fixpoint evaluation and incremental maintenance.

Predicates are solved one strongly connected component at a time, in
dependency order; lower components are frozen inputs to higher ones.  Within
a component:

* ``naive`` iterates the immediate consequence operator from the empty
  interpretation until nothing changes;
* ``seminaive`` seeds a change with the first iterate and then advances by
  evaluating the program's derivative formulas on the previous change only;
* ``maintain`` updates a solved component after an input change by iterating
  the derivative of the evaluation map from the zero change, optionally
  validating against recomputation and falling back to it.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .analysis import check_parity_stratification
from .boolean_delta import BooleanDelta, apply_delta, compose_delta, minus_top
from .derivative import derive_program
from .errors import DivergenceError, EvaluationError, NonConvergenceError, SoundnessError
from .program import Program
from .relations import ActiveDomain, Relation, constant_key
from .semantics import Interpretation, _check_env, evaluate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 10_000
    engine: str = "seminaive"  # naive | seminaive
    maintenance: str = "derivative"  # derivative | trivial
    ev_derivative: str = "dEv1"  # dEv1 | dEv2
    validate: bool = False
    fallback: bool = True
    symmetric_or: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.engine not in ("naive", "seminaive"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.maintenance not in ("derivative", "trivial"):
            raise ValueError(f"unknown maintenance strategy {self.maintenance!r}")
        if self.ev_derivative not in ("dEv1", "dEv2"):
            raise ValueError(f"unknown evaluation-map derivative {self.ev_derivative!r}")


@dataclass
class TraceStep:
    stratum: tuple
    iteration: int
    values: dict  # predicate -> Relation after this step
    deltas: dict  # predicate -> BooleanDelta produced by this step
    derived: int  # tuples produced by the rule evaluations of this step
    seconds: float


@dataclass
class Solution:
    idb: dict
    iterations: int
    dom: ActiveDomain
    trace: list = field(default_factory=list)


@dataclass
class MaintenanceResult:
    deltas: dict
    strategy: str
    iterations: int = 0
    fallback: tuple = ()  # strata that were recomputed instead
    mismatched: tuple = ()  # strata whose derivative result failed validation
    validated: bool = False

    @property
    def fell_back(self) -> bool:
        return bool(self.fallback)


# Inputs -------------------------------------------------------------------


def edb_relations(program: Program, facts: dict | None = None) -> dict:
    """Canonical relations for every EDB predicate: program facts plus ``facts``."""
    facts = facts or {}
    out = {}
    for pred in program.edb_preds:
        rows = set(program.facts.get(pred, ())) | set(facts.get(pred, ()))
        out[pred] = Relation(program.schema(pred), rows)
    unknown = set(facts) - set(program.edb_preds)
    if unknown:
        idb = unknown & set(program.idb_preds)
        if idb:
            raise EvaluationError(f"facts given for rule-defined predicate(s) {sorted(idb)}")
        raise EvaluationError(f"facts given for undeclared predicate(s) {sorted(unknown)}")
    return out


def active_domain(program: Program, edb: dict, *deltas: dict) -> ActiveDomain:
    consts = set(program.constants())
    for r in edb.values():
        consts |= r.constants()
    for ds in deltas:
        for d in ds.values():
            consts |= d.adds.constants() | d.removes.constants()
    return ActiveDomain(frozenset(consts))


def _edb_map(edb) -> dict:
    return dict(edb.base) if isinstance(edb, Interpretation) else dict(edb)


def _strata(program: Program) -> list:
    if program.strata is None:
        check_parity_stratification(program)
    return program.strata


def _empty(program: Program, preds) -> dict:
    return {q: Relation.empty(program.schema(q)) for q in preds}


def _zero(program: Program, preds) -> dict:
    return {q: BooleanDelta.zero(program.schema(q)) for q in preds}


def _all_preds(program: Program) -> list:
    return list(program.edb_preds) + list(program.idb_preds)


# Operators ----------------------------------------------------------------


def immediate_consequence(
    program: Program, env: Interpretation, dom: ActiveDomain, preds=None, check_env: bool = True
) -> dict:
    """Evaluate each IDB predicate's defining formula at ``env``."""
    preds = program.idb_preds if preds is None else preds
    if check_env:
        _check_env(env, dom)
    return {
        q: evaluate(program.definitions[q], program.schema(q), env, dom, check_env=False)
        for q in preds
    }


def _derivative_step(program, derivs, preds, base, deltas, dom) -> dict:
    env = Interpretation(base, deltas)
    out = {}
    for q in preds:
        schema = program.schema(q)
        up = evaluate(derivs[q].up, schema, env, dom, check_env=False)
        down = evaluate(derivs[q].down, schema, env, dom, check_env=False)
        out[q] = BooleanDelta(up, down)
    return out


def _apply(values: dict, deltas: dict) -> dict:
    return {q: apply_delta(values[q], deltas[q]) for q in values}


def _size(deltas: dict) -> int:
    return sum(len(d.adds) + len(d.removes) for d in deltas.values())


# Least fixed points -------------------------------------------------------


def _cycle_error(kind, stratum, first, i, last):
    return DivergenceError(
        f"{kind} iteration of {', '.join(stratum)} revisits iterate {first} at iteration {i}; "
        "the stratum's operator is not monotone on this input",
        last,
    )


def _naive_stratum(program, stratum, fixed, dom, cfg, trace):
    a = _empty(program, stratum)
    seen = {_freeze(a): 0}
    i = 0
    while True:
        if i >= cfg.max_iters:
            raise DivergenceError(
                f"naive iteration of {', '.join(stratum)} did not converge in {cfg.max_iters} steps",
                a,
            )
        t0 = time.perf_counter()
        new = immediate_consequence(program, Interpretation({**fixed, **a}), dom, stratum, False)
        i += 1
        if trace is not None:
            trace.append(
                TraceStep(
                    tuple(stratum),
                    i,
                    new,
                    {q: minus_top(new[q], a[q]) for q in stratum},
                    sum(len(r) for r in new.values()),
                    time.perf_counter() - t0,
                )
            )
        if new == a:
            return a, i
        key = _freeze(new)
        if key in seen:
            raise _cycle_error("naive", stratum, seen[key], i, new)
        seen[key] = i
        a = new


def _seminaive_stratum(program, derivs, stratum, fixed, dom, cfg, trace):
    zero_rest = _zero(program, [q for q in _all_preds(program) if q not in stratum])
    a = _empty(program, stratum)
    chain = a
    t0 = time.perf_counter()
    first = immediate_consequence(program, Interpretation({**fixed, **a}), dom, stratum, False)
    delta = {q: minus_top(first[q], a[q]) for q in stratum}
    seen = {_freeze(a): 0}
    i = 0
    while True:
        if cfg.validate:
            for q in stratum:
                if a[q] != chain[q]:
                    raise SoundnessError(
                        f"semi-naive iterate {i} of {q} differs from the naive iterate"
                    )
        if trace is not None:
            trace.append(
                TraceStep(tuple(stratum), i, a, delta, _size(delta), time.perf_counter() - t0)
            )
        nxt = _apply(a, delta)
        if nxt == a:
            return a, i + 1
        key = _freeze(nxt)
        if key in seen:
            raise _cycle_error("semi-naive", stratum, seen[key], i + 1, delta)
        seen[key] = i + 1
        if i + 1 >= cfg.max_iters:
            raise DivergenceError(
                f"semi-naive iteration of {', '.join(stratum)} did not converge in "
                f"{cfg.max_iters} steps",
                delta,
            )
        t0 = time.perf_counter()
        delta = _derivative_step(
            program, derivs, stratum, {**fixed, **a}, {**zero_rest, **delta}, dom
        )
        if cfg.validate:
            chain = immediate_consequence(
                program, Interpretation({**fixed, **chain}), dom, stratum, False
            )
        a = nxt
        i += 1


def _solve(program, edb, cfg, dom, engine, trace):
    edb = _edb_map(edb)
    for pred in program.edb_preds:
        edb.setdefault(pred, Relation.empty(program.schema(pred)))
    if dom is None:
        dom = active_domain(program, edb)
    _check_env(Interpretation(edb), dom)
    derivs = derive_program(program, cfg.symmetric_or) if engine == "seminaive" else None
    values = dict(edb)
    iterations = 0
    for stratum in _strata(program):
        if engine == "naive":
            a, n = _naive_stratum(program, stratum, values, dom, cfg, trace)
        else:
            a, n = _seminaive_stratum(program, derivs, stratum, values, dom, cfg, trace)
        values.update(a)
        iterations += n
    idb = {q: values[q] for q in program.idb_preds}
    if cfg.validate:
        env = Interpretation(values)
        again = immediate_consequence(program, env, dom, check_env=False)
        for q in program.idb_preds:
            if again[q] != idb[q]:
                raise SoundnessError(f"solution for {q} is not a fixed point")
    return Solution(idb, iterations, dom, trace if trace is not None else [])


def naive_lfp(program, edb, cfg: SolverConfig = SolverConfig(), dom=None, trace=False) -> Solution:
    return _solve(program, edb, cfg, dom, "naive", [] if trace else None)


def seminaive_lfp(program, edb, cfg: SolverConfig = SolverConfig(), dom=None, trace=False) -> Solution:
    return _solve(program, edb, cfg, dom, "seminaive", [] if trace else None)


def solve(program, edb, cfg: SolverConfig = SolverConfig(), dom=None, trace=False) -> Solution:
    return _solve(program, edb, cfg, dom, cfg.engine, [] if trace else None)


# Maintenance --------------------------------------------------------------


def _check_edb_delta(program, edb_delta):
    for pred, d in edb_delta.items():
        if pred not in program.edb_preds:
            raise EvaluationError(f"delta given for non-EDB predicate {pred}")
        if d.schema != program.schema(pred):
            raise EvaluationError(f"delta for {pred} has schema {d.schema}")


def _adjust(program, derivs, stratum, old, new_inputs, changes, dom, cfg):
    """Iterate the evaluation-map derivative from the zero change.

    Returns ``(delta, iterations)``, or ``(None, iterations)`` when the
    applied values cycle or the iteration cap is hit.
    """
    others = [q for q in _all_preds(program) if q not in stratum]
    zero_s = _zero(program, stratum)
    zero_o = {q: BooleanDelta.zero(program.schema(q)) for q in others}
    # higher strata are not referenced here; they keep their old value
    input_change = {q: changes.get(q, zero_o[q]) for q in others}
    a_star = {q: old[q] for q in stratum}
    fixed_old = {q: old[q] for q in others}
    fixed_new = {q: new_inputs.get(q, old[q]) for q in others}

    def input_derivative(base_s):
        # change of the operator itself at the point base_s
        return _derivative_step(
            program, derivs, stratum, {**fixed_old, **base_s}, {**input_change, **zero_s}, dom
        )

    delta = zero_s
    applied = a_star
    seen = {_freeze(applied)}
    precomputed = input_derivative(a_star) if cfg.ev_derivative == "dEv2" else None
    for k in range(1, cfg.max_iters + 1):
        if cfg.ev_derivative == "dEv1":
            df = _derivative_step(
                program, derivs, stratum, {**fixed_old, **a_star}, {**zero_o, **delta}, dom
            )
            dfun = input_derivative(applied)
            nxt = {q: compose_delta(df[q], dfun[q]) for q in stratum}
        else:
            dshift = _derivative_step(
                program, derivs, stratum, {**fixed_new, **a_star}, {**zero_o, **delta}, dom
            )
            nxt = {q: compose_delta(precomputed[q], dshift[q]) for q in stratum}
        nxt_applied = _apply(a_star, nxt)
        if nxt == delta or nxt_applied == applied:
            return nxt, k
        key = _freeze(nxt_applied)
        if key in seen:
            log.debug("adjust iteration for %s cycles after %d steps", stratum, k)
            return None, k
        seen.add(key)
        delta, applied = nxt, nxt_applied
    return None, cfg.max_iters


def _freeze(values: dict):
    return tuple(sorted((q, r.rows) for q, r in values.items()))


def maintain(
    program: Program,
    sol: Solution,
    edb,
    edb_delta: dict,
    cfg: SolverConfig = SolverConfig(),
) -> MaintenanceResult:
    """Per-IDB-predicate changes that take ``sol`` to the solution at ``edb + edb_delta``."""
    edb = _edb_map(edb)
    for pred in program.edb_preds:
        edb.setdefault(pred, Relation.empty(program.schema(pred)))
    _check_edb_delta(program, edb_delta)
    dom = sol.dom.extended(
        c for d in edb_delta.values() for c in d.adds.constants() | d.removes.constants()
    )
    changes = {**_zero(program, program.edb_preds), **edb_delta}
    new_edb = _apply(edb, changes)

    if cfg.maintenance == "trivial":
        fresh = _solve(program, new_edb, cfg, dom, cfg.engine, None)
        deltas = {q: minus_top(fresh.idb[q], sol.idb[q]) for q in program.idb_preds}
        return MaintenanceResult(deltas, "trivial", fresh.iterations)

    derivs = derive_program(program, cfg.symmetric_or)
    old = {**edb, **sol.idb}
    new = dict(new_edb)
    fallback, mismatched, total = [], [], 0
    for stratum in _strata(program):
        delta, n = _adjust(program, derivs, stratum, old, new, changes, dom, cfg)
        total += n
        recomputed = None
        if delta is None:
            if not cfg.fallback:
                raise NonConvergenceError(
                    f"maintenance of {', '.join(stratum)} did not converge", None
                )
            fallback.append(tuple(stratum))
        elif cfg.validate:
            recomputed, _ = _naive_stratum(program, stratum, new, dom, cfg, None)
            got = _apply({q: old[q] for q in stratum}, delta)
            if got != recomputed:
                mismatched.append(tuple(stratum))
                if cfg.fallback:
                    fallback.append(tuple(stratum))
                    delta = None
        if delta is None:
            if recomputed is None:
                recomputed, _ = _naive_stratum(program, stratum, new, dom, cfg, None)
            delta = {q: minus_top(recomputed[q], old[q]) for q in stratum}
        changes.update(delta)
        new.update(_apply({q: old[q] for q in stratum}, delta))
    deltas = {q: changes[q] for q in program.idb_preds}
    return MaintenanceResult(
        deltas, "derivative", total, tuple(fallback), tuple(mismatched), cfg.validate
    )


def apply_changes(idb: dict, deltas: dict) -> dict:
    return {q: apply_delta(r, deltas[q]) if q in deltas else r for q, r in idb.items()}


def solution_equal(s1, s2):
    """``(equal, report)``; the report names the first differing predicate and a witness."""
    a = s1.idb if isinstance(s1, Solution) else s1
    b = s2.idb if isinstance(s2, Solution) else s2
    for q in sorted(set(a) | set(b)):
        if q not in a or q not in b:
            return False, f"predicate {q} is missing from one solution"
        if a[q] != b[q]:
            only_a = sorted(a[q].rows - b[q].rows, key=lambda r: [constant_key(c) for c in r])
            only_b = sorted(b[q].rows - a[q].rows, key=lambda r: [constant_key(c) for c in r])
            if only_a:
                return False, f"{q}: {only_a[0]} only in the first solution"
            return False, f"{q}: {only_b[0]} only in the second solution"
    return True, None
