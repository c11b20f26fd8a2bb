import pytest
from hypothesis import given, settings, strategies as st

from memlattice.relation import Relation
from memlattice.trace import OperationPattern, load
from memlattice.verdict import Status
from memlattice.views import (
    PARTIAL,
    OracleRangeError,
    ViewQuery,
    brute_force_oracle,
    exists_serial_view,
    is_serial,
    iter_serial_views,
    validate_witness,
)

from conftest import random_query

seeds = st.integers(0, 10**7)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_search_agrees_with_brute_force(seed):
    ex, q = random_query(seed)
    assert exists_serial_view(ex, q).status == brute_force_oracle(ex, q).status


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_partial_mode_agrees_with_its_oracle(seed):
    ex, q = random_query(seed, mode=PARTIAL)
    assert exists_serial_view(ex, q).status == brute_force_oracle(ex, q).status


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_witness_is_a_serial_extension(seed):
    ex, q = random_query(seed)
    v = exists_serial_view(ex, q)
    if v.satisfied:
        assert validate_witness(ex, v.witness["view"], q.resolve(ex), q.relation)


@settings(max_examples=200, deadline=None)
@given(seeds, st.tuples(st.integers(0, 8), st.integers(0, 8)))
def test_more_edges_never_help(seed, extra):
    ex, q = random_query(seed)
    bigger = ViewQuery(q.subset, q.relation.union(Relation({extra}, "extra")), q.mode)
    if exists_serial_view(ex, bigger).satisfied:
        assert exists_serial_view(ex, q).satisfied


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_total_view_implies_partial_view(seed):
    ex, q = random_query(seed)
    if exists_serial_view(ex, q).satisfied:
        assert exists_serial_view(ex, ViewQuery(q.subset, q.relation, PARTIAL)).satisfied


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_enumeration_matches_permutation_count(seed):
    import itertools

    ex, q = random_query(seed, max_ops=6)
    ids = q.resolve(ex)
    rel = q.relation.restrict(ids)
    expect = {p for p in itertools.permutations(sorted(ids)) if rel.respected_by(p) and is_serial(ex, p)}
    got = list(iter_serial_views(ex, ids, rel))
    assert len(got) == len(set(got)) and set(got) == expect


def test_first_witness_is_deterministic():
    ex = load("p1 w x 1\np2 w x 2\np3 r x 2\n")
    q = ViewQuery(frozenset(ex.ids), Relation())
    views = {exists_serial_view(ex, q).witness["view"] for _ in range(3)}
    assert views == {(0, 1, 2, 3)}


def test_pattern_subsets():
    ex = load("p1 w x 1\np2 r x 1\np2 r x _\n")
    q = ViewQuery(frozenset({OperationPattern.parse("(r,p2,*,*)"), OperationPattern.parse("(w,*,*,*)")}), Relation())
    v = exists_serial_view(ex, q)
    assert v.satisfied and v.witness["view"] == (0, 3, 1, 2)


def test_budget_exhaustion_is_unknown():
    lines = [f"p{i} w x {i}" for i in range(1, 9)] + [f"q{i} r x {i}" for i in range(8, 0, -1)] + ["z r y 9", "z w y 9"]
    ex = load("\n".join(lines) + "\n")
    # z reads y=9 before writing it, so the search must exhaust the space
    q = ViewQuery(frozenset(ex.ids), Relation({(18, 19)}, "PO"), budget=50)
    v = exists_serial_view(ex, q)
    assert v.status is Status.UNKNOWN
    assert v.budget_spent > 50


def test_missing_source_is_violated():
    ex = load("p1 w x 1\np2 r x 1\n")
    v = exists_serial_view(ex, ViewQuery(frozenset({2}), Relation()))
    assert v.violated and "outside the view" in v.counterexample.note


def test_cycle_reported_with_provenance():
    ex = load("p1 w x 1\np1 w x 2\n")
    v = exists_serial_view(ex, ViewQuery(frozenset(ex.ids), Relation({(1, 2), (2, 1)}, "PO")))
    assert v.violated
    assert [(s.src, s.dst, s.why) for s in v.counterexample.cycle] == [(1, 2, "PO"), (2, 1, "PO")]


def test_oracle_refuses_large_subsets():
    ex = load("".join(f"p{i} w x {i}\n" for i in range(1, 10)))
    with pytest.raises(OracleRangeError):
        brute_force_oracle(ex, ViewQuery(frozenset(ex.ids), Relation()))


def test_partial_view_allows_what_total_forbids():
    # p2 must see w1 before its own w2 and also read w1 after w2: a total
    # order cannot, a partial one leaves w1 and w2 unordered
    ex = load("p1 w x 1\np2 w x 2\np2 r x 1\n")
    q = ViewQuery(frozenset(ex.ids), Relation({(2, 3)}, "PO"))
    assert exists_serial_view(ex, q).satisfied
    q2 = ViewQuery(frozenset(ex.ids), Relation({(2, 3), (1, 2)}, "x"), PARTIAL)
    assert exists_serial_view(ex, q2).violated
