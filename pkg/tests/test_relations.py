import itertools

import pytest
from hypothesis import given, strategies as st

from deltalog.errors import DomainError, RelationSizeError, SchemaError
from deltalog.relations import (
    ActiveDomain,
    Relation,
    Schema,
    complement,
    constant_key,
    difference,
    extend_to,
    intersect,
    rename,
    select_to,
    union,
    universe,
)

DOM = ActiveDomain.of([1, 2, 3])


def rel(names, rows):
    return Relation(Schema.of(names), rows)


def test_schema_sorted_but_keeps_source_order():
    s = Schema.of(["y", "x"])
    assert s.names == ("x", "y")
    assert s.order == ("y", "x")
    assert Schema.of(["p$10", "p$2"]).names == ("p$2", "p$10")


def test_schema_rejects_duplicates():
    with pytest.raises(SchemaError):
        Schema.of(["x", "x"])


def test_select_to_examples():
    r = rel("xy", [(1, 2)])
    assert select_to(r, ["x"]) == rel("x", [(1,)])
    assert select_to(r, r.schema) == r
    collapsed = select_to(rel("xy", [(1, 2), (1, 3)]), ["x"])
    assert collapsed == rel("x", [(1,)]) and len(collapsed) == 1


def test_select_to_missing_attribute():
    with pytest.raises(SchemaError, match="z"):
        select_to(rel("x", [(1,)]), ["z"])


def test_rename_examples():
    r = rel("a", [(1,)])
    assert rename(r, {"a": "x"}) == rel("x", [(1,)])
    assert rename(r, {"a": "a"}) == r
    r2 = rel("ab", [(1, 2), (3, 4)])
    there = rename(r2, {"a": "y", "b": "x"})
    assert there.bindings()[0] in ({"y": 1, "x": 2}, {"y": 3, "x": 4})
    assert rename(there, {"y": "a", "x": "b"}) == r2


def test_rename_must_be_bijective():
    with pytest.raises(SchemaError):
        rename(rel("ab", []), {"a": "x", "b": "x"})
    with pytest.raises(SchemaError):
        rename(rel("ab", []), {"a": "x"})


def test_extend_to_examples():
    d = ActiveDomain.of([1, 2])
    got = extend_to(rel("x", [(1,)]), ["x", "y"], d)
    assert got == rel("xy", [(1, 1), (1, 2)])
    assert extend_to(rel("x", [(1,)]), ["x"], d) == rel("x", [(1,)])
    assert extend_to(rel("x", []), ["x", "y", "z"], d) == rel("xyz", [])


def test_extend_to_requires_subset():
    with pytest.raises(SchemaError):
        extend_to(rel("xy", []), ["x"], DOM)


def test_complement_examples():
    d = ActiveDomain.of([1, 2])
    assert complement(rel("x", []), d) == rel("x", [(1,), (2,)])
    r = rel("xy", [(1, 1)])
    assert complement(r, d) == rel("xy", [(1, 2), (2, 1), (2, 2)])
    assert complement(complement(r, d), d) == r


def test_complement_outside_domain():
    with pytest.raises(DomainError):
        complement(rel("x", [(9,)]), DOM)


def test_set_operations():
    a, b = rel("x", [(1,), (2,)]), rel("x", [(2,), (3,)])
    assert intersect(a, b) == rel("x", [(2,)])
    assert union(a, rel("x", [])) == a
    assert intersect(a, universe(a.schema, DOM)) == a
    assert difference(a, b) == rel("x", [(1,)])
    with pytest.raises(SchemaError):
        union(a, rel("y", []))


def test_universe_sizes():
    assert len(universe(Schema.of(["x"]), ActiveDomain.of([1, 2]))) == 2
    assert universe(Schema.of([]), DOM).rows == {()}
    assert len(universe(Schema.of("xy"), DOM)) == 9


def test_universe_cap(monkeypatch):
    monkeypatch.setenv("DELTALOG_MAX_RELATION_SIZE", "8")
    with pytest.raises(RelationSizeError, match="DELTALOG_MAX_RELATION_SIZE"):
        universe(Schema.of("xy"), DOM)


def test_constants_order_ints_before_symbols():
    assert sorted(["b", 3, "a", 1], key=constant_key) == [1, 3, "a", "b"]


def subsets(schema, dom):
    rows = list(itertools.product(dom.sorted(), repeat=len(schema)))
    return st.sets(st.sampled_from(rows)).map(lambda s: Relation(schema, s))


SCH = Schema.of("xy")
D2 = ActiveDomain.of([1, 2])


@given(subsets(SCH, D2), subsets(SCH, D2), subsets(SCH, D2))
def test_boolean_algebra_axioms(a, b, c):
    top, bot = universe(SCH, D2), Relation.empty(SCH)
    neg = lambda r: complement(r, D2)  # noqa: E731
    assert union(a, intersect(b, c)) == intersect(union(a, b), union(a, c))
    assert intersect(a, union(b, c)) == union(intersect(a, b), intersect(a, c))
    assert union(a, neg(a)) == top and intersect(a, neg(a)) == bot
    assert neg(union(a, b)) == intersect(neg(a), neg(b))
    assert union(a, bot) == a and intersect(a, top) == a


@given(subsets(SCH, DOM), subsets(SCH, DOM))
def test_select_distributes_over_union(a, b):
    assert select_to(union(a, b), ["x"]) == union(select_to(a, ["x"]), select_to(b, ["x"]))


@given(subsets(Schema.of("x"), DOM))
def test_extend_then_select_is_identity(r):
    assert select_to(extend_to(r, ["x", "y", "z"], DOM), ["x"]) == r


@pytest.mark.parametrize("names,consts", [("x", [1, 2, 3]), ("xy", [1, 2])])
def test_boolean_algebra_exhaustive(names, consts):
    s, d = Schema.of(names), ActiveDomain.of(consts)
    rows = list(itertools.product(consts, repeat=len(names)))
    rels = [Relation(s, c) for n in range(len(rows) + 1) for c in itertools.combinations(rows, n)]
    top, bot = universe(s, d), Relation.empty(s)
    neg = lambda r: complement(r, d)  # noqa: E731
    for a, b, c in itertools.product(rels, repeat=3):
        assert union(a, intersect(b, c)) == intersect(union(a, b), union(a, c))
        assert intersect(a, union(b, c)) == union(intersect(a, b), intersect(a, c))
    for a, b in itertools.product(rels, repeat=2):
        assert union(a, b) == union(b, a) and intersect(a, b) == intersect(b, a)
        assert union(a, intersect(a, b)) == a and intersect(a, union(a, b)) == a
        assert neg(union(a, b)) == intersect(neg(a), neg(b))
    for a in rels:
        assert union(a, neg(a)) == top and intersect(a, neg(a)) == bot
        assert union(a, bot) == a and intersect(a, top) == a
