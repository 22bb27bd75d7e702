import random

import pytest
from conftest import CORPUS, corpus_text

from deltalog import parse_program
from deltalog.boolean_delta import BooleanDelta
from deltalog.engine import (
    SolverConfig,
    apply_changes,
    edb_relations,
    immediate_consequence,
    maintain,
    naive_lfp,
    seminaive_lfp,
    solution_equal,
    solve,
)
from deltalog.errors import DivergenceError, EvaluationError, NonConvergenceError
from deltalog.relations import Relation
from deltalog.semantics import Interpretation

PATH3 = {"e": {(1, 2), (2, 3), (3, 4)}}
TC_ALL = {(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)}

LEFT_TC = "t(X,Y) :- e(X,Y).\nt(X,Y) :- t(X,Z), e(Z,Y).\n"


def rows(sol, pred):
    return set(sol.idb[pred].rows)


def delta_of(program, pred, adds=(), removes=()):
    return BooleanDelta.of(program.schema(pred), adds, removes)


def test_immediate_consequence_first_step(tc):
    edb = edb_relations(tc, PATH3)
    env = Interpretation({**edb, "tc": Relation(tc.schema("tc"), [])})
    out = immediate_consequence(tc, env, tc_dom(tc, edb))
    assert set(out["tc"].rows) == PATH3["e"]


def tc_dom(program, edb):
    from deltalog.engine import active_domain

    return active_domain(program, edb)


def test_naive_tc_trace(tc):
    sol = naive_lfp(tc, edb_relations(tc, PATH3), trace=True)
    assert rows(sol, "tc") == TC_ALL
    assert sol.iterations == 4
    seen = [set(step.values["tc"].rows) for step in sol.trace]
    assert seen[0] == PATH3["e"]
    assert seen[1] == PATH3["e"] | {(1, 3), (2, 4)}
    assert seen[2] == seen[3] == TC_ALL
    assert [step.iteration for step in sol.trace] == [1, 2, 3, 4]


def test_seminaive_tc_deltas(tc):
    sol = seminaive_lfp(tc, edb_relations(tc, PATH3), trace=True)
    adds = [set(step.deltas["tc"].adds.rows) for step in sol.trace]
    assert adds == [PATH3["e"], {(1, 3), (2, 4)}, {(1, 4)}, set()]
    assert all(not step.deltas["tc"].removes for step in sol.trace)
    assert rows(sol, "tc") == TC_ALL and sol.iterations == 4


@pytest.mark.parametrize("n", [1, 5, 12])
def test_path_iteration_counts(tc, n):
    edb = edb_relations(tc, {"e": {(i, i + 1) for i in range(n)}})
    sol = seminaive_lfp(tc, edb, trace=True)
    assert sol.iterations == n + 1
    sizes = [len(step.deltas["tc"].adds) for step in sol.trace]
    assert sizes == [n - i for i in range(n + 1)]


def test_empty_edb(tc):
    for engine in (naive_lfp, seminaive_lfp):
        sol = engine(tc, edb_relations(tc))
        assert sol.idb["tc"] == Relation(tc.schema("tc"), [])
        assert sol.iterations == 1


def test_treep_chain(treep):
    edb = edb_relations(treep, {"p": {(1,), (2,), (3,)}, "child": {(1, 2), (2, 3)}})
    for engine in (naive_lfp, seminaive_lfp):
        assert rows(engine(treep, edb), "treeP") == {(1,), (2,), (3,)}
    edb = edb_relations(treep, {"p": {(1,), (2,)}, "child": {(1, 2), (2, 3)}})
    assert rows(solve(treep, edb), "treeP") == set()


def test_strata_feed_higher_predicates():
    p = parse_program(corpus_text("nontc.dl"))
    edb = edb_relations(p, {"e": {(1, 2)}, "node": {(1,), (2,)}})
    sol = solve(p, edb)
    assert rows(sol, "nontc") == {(1, 1), (2, 1), (2, 2)}


def test_validate_mode_runs_clean(tc, treep):
    cfg = SolverConfig(validate=True)
    seminaive_lfp(tc, edb_relations(tc, PATH3), cfg)
    seminaive_lfp(treep, edb_relations(treep, {"p": {(1,)}, "child": {(1, 1)}}), cfg)


def test_engines_agree_on_corpus():
    rng = random.Random(3)
    for path in sorted(CORPUS.glob("*.dl")):
        program = parse_program(path.read_text())
        for _ in range(10):
            facts = {
                q: {tuple(rng.randint(1, 4) for _ in range(n)) for _ in range(rng.randint(0, 5))}
                for q, n in program.edb_preds.items()
            }
            edb = edb_relations(program, facts)
            out = []
            for engine in (naive_lfp, seminaive_lfp):
                try:
                    out.append(engine(program, edb).idb)
                except DivergenceError as err:
                    out.append(str(err).split(" iteration ", 1)[1])
            assert out[0] == out[1], path.name


def test_mutual_recursion_through_negation_can_cycle():
    p = parse_program(corpus_text("safe.dl"))
    # safe(1) <- !bad(1) <- !safe(1): the joint operator flips every step
    edb = edb_relations(p, {"node": {(1,)}, "e": {(1, 1)}})
    messages = []
    for engine in (naive_lfp, seminaive_lfp):
        with pytest.raises(DivergenceError, match="revisits iterate") as info:
            engine(p, edb)
        messages.append(str(info.value).split(" iteration ", 1)[1])
    assert messages[0] == messages[1]


def test_safe_converges_on_acyclic_input():
    p = parse_program(corpus_text("safe.dl"))
    edb = edb_relations(p, {"node": {(1,), (2,), (3,)}, "e": {(1, 2)}})
    sol = solve(p, edb)
    assert sol.idb == naive_lfp(p, edb).idb


def test_edb_relations_errors(tc):
    with pytest.raises(EvaluationError, match="rule-defined"):
        edb_relations(tc, {"tc": {(1, 2)}})
    with pytest.raises(EvaluationError, match="undeclared"):
        edb_relations(tc, {"f": {(1,)}})


# Maintenance --------------------------------------------------------------


def recompute(program, edb, delta):
    facts = {q: set(r.rows) for q, r in edb.items()}
    for q, d in delta.items():
        facts[q] = (facts[q] | set(d.adds.rows)) - set(d.removes.rows)
    return solve(program, edb_relations(program, facts))


def test_maintain_insert(tc):
    edb = edb_relations(tc, PATH3)
    sol = solve(tc, edb)
    d = {"e": delta_of(tc, "e", [(4, 5)])}
    res = maintain(tc, sol, edb, d, SolverConfig(validate=True))
    assert set(res.deltas["tc"].adds.rows) == {(4, 5), (3, 5), (2, 5), (1, 5)}
    assert not res.deltas["tc"].removes and not res.fell_back
    assert apply_changes(sol.idb, res.deltas) == recompute(tc, edb, d).idb


def test_maintain_zero_change(tc, treep):
    for program, facts in ((tc, PATH3), (treep, {"p": {(1,)}, "child": {(1, 2)}})):
        edb = edb_relations(program, facts)
        sol = solve(program, edb)
        res = maintain(program, sol, edb, {})
        for q, d in res.deltas.items():
            assert d == BooleanDelta.zero(program.schema(q))


def test_maintain_delete(tc):
    edb = edb_relations(tc, PATH3)
    sol = solve(tc, edb)
    d = {"e": delta_of(tc, "e", removes=[(2, 3)])}
    trivial = maintain(tc, sol, edb, d, SolverConfig(maintenance="trivial"))
    gone = set(sol.idb["tc"].rows) - set(apply_changes(sol.idb, trivial.deltas)["tc"].rows)
    assert gone == {(2, 3), (1, 3), (2, 4), (1, 4)}
    assert trivial.strategy == "trivial"
    res = maintain(tc, sol, edb, d, SolverConfig(validate=True))
    assert apply_changes(sol.idb, res.deltas) == recompute(tc, edb, d).idb
    assert res.validated and (res.fell_back or not res.mismatched)


def test_maintain_multiple_strata():
    p = parse_program(corpus_text("nontc.dl"))
    edb = edb_relations(p, {"e": {(1, 2)}, "node": {(1,), (2,), (3,)}})
    sol = solve(p, edb)
    d = {"e": delta_of(p, "e", [(2, 3)])}
    res = maintain(p, sol, edb, d, SolverConfig(validate=True))
    assert apply_changes(sol.idb, res.deltas) == recompute(p, edb, d).idb
    assert not res.mismatched


def test_non_convergence_without_fallback():
    p = parse_program(LEFT_TC)
    edb = edb_relations(p, {"e": {(3, 1)}})
    sol = solve(p, edb)
    d = {"e": delta_of(p, "e", [(1, 2), (2, 1)], [(3, 1)])}
    with pytest.raises(NonConvergenceError, match="did not converge"):
        maintain(p, sol, edb, d, SolverConfig(fallback=False))
    res = maintain(p, sol, edb, d, SolverConfig(validate=True))
    assert res.fallback == (("t",),)
    assert apply_changes(sol.idb, res.deltas) == recompute(p, edb, d).idb


def test_maintain_rejects_idb_delta(tc):
    edb = edb_relations(tc, PATH3)
    sol = solve(tc, edb)
    with pytest.raises(EvaluationError, match="non-EDB"):
        maintain(tc, sol, edb, {"tc": delta_of(tc, "tc", [(9, 9)])})


@pytest.mark.parametrize("name", ["tc.dl", "treeP.dl", "hop.dl", "reach.dl"])
def test_dev1_and_dev2_agree_with_recomputation(name):
    program = parse_program(corpus_text(name))
    rng = random.Random(name)
    for _ in range(15):
        facts = {}
        for q, n in program.edb_preds.items():
            rs = {tuple(rng.randint(1, 4) for _ in range(n)) for _ in range(rng.randint(0, 5))}
            if q == "child":
                rs = {r for r in rs if r[0] < r[1]}
            facts[q] = rs
        edb = edb_relations(program, facts)
        sol = solve(program, edb)
        d = {}
        for q, n in program.edb_preds.items():
            adds = {tuple(rng.randint(1, 4) for _ in range(n)) for _ in range(2)} - set(edb[q].rows)
            if q == "child":
                adds = {r for r in adds if r[0] < r[1]}
            removes = set(rng.sample(sorted(edb[q].rows), min(1, len(edb[q]))))
            d[q] = delta_of(program, q, adds, removes)
        want = recompute(program, edb, d).idb
        for ev in ("dEv1", "dEv2"):
            res = maintain(program, sol, edb, d, SolverConfig(ev_derivative=ev, validate=True))
            assert apply_changes(sol.idb, res.deltas) == want


def test_solution_equal(tc):
    edb = edb_relations(tc, PATH3)
    a, b = naive_lfp(tc, edb), seminaive_lfp(tc, edb)
    assert solution_equal(a, b) == (True, None)
    smaller = {"tc": Relation(tc.schema("tc"), PATH3["e"])}
    ok, report = solution_equal(a, smaller)
    assert not ok and report == "tc: (1, 3) only in the first solution"
    ok, report = solution_equal(smaller, a)
    assert report == "tc: (1, 3) only in the second solution"
    assert not solution_equal(a, {})[0]
