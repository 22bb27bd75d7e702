import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltalog.boolean_delta import BooleanDelta
from deltalog.errors import DomainError, EvaluationError, SchemaError
from deltalog.formula import BOTTOM, TOP, And, Atom, Exists, Kind, Not, Or, Var, rename_free
from deltalog.properties import random_case
from deltalog.relations import ActiveDomain, Relation, Schema, universe
from deltalog.semantics import Interpretation, evaluate, evaluate_reference

X, Y, Z = Var("X"), Var("Y"), Var("Z")
E = Schema.of(["e$1", "e$2"])
TC = Schema.of(["tc$1", "tc$2"])
DOM = ActiveDomain.of([1, 2, 3])
XY = Schema.of("XY")


def env(edges, closure=()):
    return Interpretation({"e": Relation(E, edges), "tc": Relation(TC, closure)})


def both(f, schema, i, dom=DOM):
    got = evaluate(f, schema, i, dom)
    assert got == evaluate_reference(f, schema, i, dom)
    return got


def test_tc_body_first_step():
    body = Or(Atom("e", [X, Y]), Exists("Z", And(Atom("e", [X, Z]), Atom("tc", [Z, Y]))))
    i = env([(1, 2), (2, 3)])
    assert both(body, XY, i) == Relation(XY, [(1, 2), (2, 3)])
    i = env([(1, 2), (2, 3)], [(1, 2), (2, 3)])
    assert both(body, XY, i) == Relation(XY, [(1, 2), (2, 3), (1, 3)])


def test_boolean_sanity():
    i = env([(1, 2)])
    assert both(TOP, XY, i) == universe(XY, DOM)
    assert both(BOTTOM, XY, i) == Relation(XY, [])
    assert len(both(Not(Atom("e", [X, Y])), XY, i)) == 8
    assert both(TOP, Schema.of([]), i) == Relation(Schema.of([]), [()])
    assert both(Exists("X", Atom("e", [X, X])), Schema.of([]), i) == Relation(Schema.of([]), [])


def test_constants_and_repeated_variables():
    i = env([(1, 1), (1, 2), (2, 2), (3, 1)])
    assert both(Atom("e", [X, X]), Schema.of("X"), i) == Relation(Schema.of("X"), [(1,), (2,)])
    assert both(Atom("e", [X, 1]), Schema.of("X"), i) == Relation(Schema.of("X"), [(1,), (3,)])


def test_delta_atoms_read_the_delta():
    i = env([(1, 2)]).with_deltas(
        {"e": BooleanDelta.of(E, [(2, 3)], [(1, 2)]), "tc": BooleanDelta.zero(TC)}
    )
    add = Atom("e", [X, Y], Kind.DELTA_ADD)
    rem = Atom("e", [X, Y], Kind.DELTA_REMOVE)
    assert both(add, XY, i) == Relation(XY, [(2, 3)])
    assert both(rem, XY, i) == Relation(XY, [(1, 2)])
    with pytest.raises(EvaluationError, match="no delta"):
        evaluate(add, XY, env([(1, 2)]), DOM)


def test_errors():
    i = env([(1, 2)])
    with pytest.raises(SchemaError):
        evaluate(Atom("e", [X, Z]), XY, i, DOM)
    with pytest.raises(DomainError):
        evaluate(Atom("e", [X, 9]), Schema.of("X"), i, DOM)
    with pytest.raises(DomainError):
        evaluate(TOP, XY, env([(1, 9)]), DOM)
    with pytest.raises(EvaluationError, match="arity"):
        evaluate(Atom("e", [X]), Schema.of("X"), i, DOM)
    with pytest.raises(EvaluationError, match="unbound"):
        evaluate(Atom("f", [X]), Schema.of("X"), i, DOM)


def test_shadowed_quantifier():
    # exists X inside a formula over X: the inner X is a different variable
    f = And(Atom("e", [X, Y]), Exists("X", Atom("e", [Y, X])))
    i = env([(1, 2), (2, 3)])
    assert both(f, XY, i) == Relation(XY, [(1, 2)])


def test_alpha_renaming_preserves_denotation():
    f = Exists("Z", And(Atom("e", [X, Z]), Atom("e", [Z, Y])))
    g = Exists("W", And(Atom("e", [X, Var("W")]), Atom("e", [Var("W"), Y])))
    i = env([(1, 2), (2, 3), (3, 1)])
    assert both(f, XY, i) == both(g, XY, i)
    h = rename_free(f, {"X": "A", "Y": "B"})
    assert evaluate(h, Schema.of("AB"), i, DOM).rows == both(f, XY, i).rows


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_efficient_matches_reference(seed, depth):
    case = random_case(random.Random(seed), depth=depth, universe_size=3)
    i = Interpretation(case.base, case.d1)
    assert evaluate(case.formula, case.schema, i, case.dom) == evaluate_reference(
        case.formula, case.schema, i, case.dom
    )


def _positive(f):
    if isinstance(f, Not):
        return False
    return all(_positive(c) for c in f.children())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_positive_formulas_are_monotone(seed):
    rng = random.Random(seed)
    case = random_case(rng, depth=4, universe_size=3)
    if not _positive(case.formula):
        return
    small = Interpretation(case.base)
    big = Interpretation(
        {p: r | Relation(r.schema, d.adds.rows) for p, (r, d) in
         ((p, (case.base[p], case.d1[p])) for p in case.base)}
    )
    assert evaluate(case.formula, case.schema, small, case.dom) <= evaluate(
        case.formula, case.schema, big, case.dom
    )


def _idb_env(program, rng, dom):
    base = {}
    for q in list(program.edb_preds) + list(program.idb_preds):
        s = program.schema(q)
        rows = {r for r in universe(s, dom).rows if rng.random() < 0.3}
        base[q] = Relation(s, rows)
    return base


@pytest.mark.parametrize("name", ["tc.dl", "treeP.dl", "sg.dl", "oddeven.dl", "reach.dl", "nontc.dl"])
def test_defining_formulas_monotone_in_idb(name):
    from conftest import corpus_text

    from deltalog import parse_program

    program = parse_program(corpus_text(name))
    dom = ActiveDomain.of([1, 2, 3])
    rng = random.Random(name)
    # only the predicate's own stratum grows; lower strata may sit under negation
    for stratum in program.strata:
        for _ in range(30):
            small = _idb_env(program, rng, dom)
            big = dict(small)
            for q in stratum:
                extra = {r for r in universe(program.schema(q), dom).rows if rng.random() < 0.3}
                big[q] = small[q] | Relation(program.schema(q), extra)
            for q in stratum:
                f, s = program.definitions[q], program.schema(q)
                assert evaluate(f, s, Interpretation(small), dom) <= evaluate(
                    f, s, Interpretation(big), dom
                )


def test_mutual_negation_is_not_monotone():
    from conftest import corpus_text

    from deltalog import parse_program

    program = parse_program(corpus_text("safe.dl"))
    dom = ActiveDomain.of([1])
    s = program.schema("safe")
    node = Relation(program.schema("node"), [(1,)])
    e = Relation(program.schema("e"), [])
    low = {"node": node, "e": e, "safe": Relation(s, []), "bad": Relation(program.schema("bad"), [])}
    high = dict(low, bad=Relation(program.schema("bad"), [(1,)]))
    f = program.definitions["safe"]
    assert evaluate(f, s, Interpretation(low), dom) == Relation(s, [(1,)])
    assert evaluate(f, s, Interpretation(high), dom) == Relation(s, [])
