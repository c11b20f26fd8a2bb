import random

import pytest
from hypothesis import given, settings, strategies as st

from memlattice.lattice import LATTICE_NODES, SEQUENTIAL, check_classical, check_node, parse_model
from memlattice.relation import Relation
from memlattice.trace import load
from memlattice.transitions import (
    SYNC_KINDS,
    Labeling,
    LabelingError,
    build_D,
    check_generalized,
    check_synchronized,
    drf_check,
    transitive_order,
)
from memlattice.workload import random_trace

from conftest import corpus

seeds = st.integers(0, 10**7)


def sync_trace(seed, sync_prob=0.4):
    rng = random.Random(seed)
    return load(random_trace(seed, rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 2), sync_prob=sync_prob))


def named(ex, rel):
    return {(str(ex.ops[a]), str(ex.ops[b])) for a, b in rel.edges}


def test_litmus_not_weak():
    ex = corpus("not_weak")
    assert check_synchronized(ex, "weak", "revised").satisfied
    assert check_synchronized(ex, "weak", "original").violated
    assert drf_check(ex).status == "violation"


def test_litmus_drf():
    ex = corpus("drf")
    for variant in ("revised", "original"):
        assert check_synchronized(ex, "weak", variant).satisfied
    assert check_node(ex, SEQUENTIAL).satisfied
    assert drf_check(ex).status == "witnessed"


def test_litmus_location():
    ex = corpus("location")
    assert check_synchronized(ex, "location").satisfied
    assert check_synchronized(ex, "entry").violated


def test_empty_trace_is_witnessed():
    assert drf_check(load("")).status == "witnessed"


def test_drf_vacuous_when_not_weak():
    ex = load("p1 w y 5\np1 sw x 1\np2 sr x 1\np2 r y _\n")
    result = drf_check(ex)
    assert result.status == "vacuous" and result.sequential is None


def test_weak_rejects_acquire_release():
    with pytest.raises(LabelingError):
        build_D(load("p1 acq l _\n"), "weak")


def test_weak_D_orders_everything_around_sync_ops():
    ex = load("p1 w x 1\np1 sw s 1\np1 w y 1\n")
    assert named(ex, build_D(ex, "weak")) == {("(w,p1,x,1)", "(sw,p1,s,1)"), ("(sw,p1,s,1)", "(w,p1,y,1)")}


def test_release_D_is_one_sided():
    ex = load("p1 w x 1\np1 acq l _\np1 w y 1\np1 rel l 2\np1 w z 1\n")
    assert named(ex, build_D(ex, "release")) == {
        ("(acq,p1,l,⊥)", "(w,p1,y,1)"),
        ("(acq,p1,l,⊥)", "(w,p1,z,1)"),
        ("(w,p1,x,1)", "(rel,p1,l,2)"),
        ("(w,p1,y,1)", "(rel,p1,l,2)"),
    }


def test_entry_D_uses_tagged_association():
    ex = load("p1 acq l _\np1 w x 1 @l\np1 w y 1 @m\np1 rel l 2\n")
    assert named(ex, build_D(ex, "entry")) == {("(acq,p1,l,⊥)", "(w,p1,x,1)"), ("(w,p1,x,1)", "(rel,p1,l,2)")}


def test_conflicting_association_is_an_error():
    with pytest.raises(LabelingError):
        build_D(load("p1 w x 1 @l\np1 w x 2 @m\n"), "entry")


def test_scope_D_stops_at_the_next_same_key_sync_op():
    ex = load("p1 acq l _\np1 w x 1\np2 rel l 2\np1 acq l 2\np1 w y 1\n")
    d = named(ex, build_D(ex, "scope"))
    assert ("(acq,p1,l,⊥)", "(w,p1,x,1)") in d
    assert ("(acq,p1,l,⊥)", "(w,p1,y,1)") not in d
    assert ("(acq,p1,l,2)", "(w,p1,y,1)") in d


def test_lazy_release_orders_ops_before_a_release_ahead_of_the_acquire():
    ex = load("p1 w x 1\np1 rel l 1\np2 acq l 1\np2 r x 1\n")
    d = named(ex, build_D(ex, "lazy-release"))
    assert ("(w,p1,x,1)", "(acq,p2,l,1)") in d
    assert ("(acq,p2,l,1)", "(r,p2,x,1)") in d


def test_transitive_order_clause_3():
    ex = load("p1 w x 1\np1 sr s _\np1 w y 1\n")
    d = build_D(ex, "weak")
    t = transitive_order(ex, d, Relation())
    assert named(ex, t) == {("(w,p1,x,1)", "(w,p1,y,1)")}
    assert t.tag(3, 5) == "T clause 3"


def test_message_passing_through_a_chain_of_sync_ops():
    ok = "p1 w x 1\np1 sw s 1\np2 sr s 1\np2 sw t 1\np3 sr t 1\np3 r x 1\n"
    stale = ok.replace("p3 r x 1", "p3 r x _")
    assert check_synchronized(load(ok), "weak").satisfied
    assert check_synchronized(load(stale), "weak").violated


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_uniform_labels_match_lattice_nodes(seed):
    ex = sync_trace(seed, sync_prob=0.0)
    for node in LATTICE_NODES:
        got = check_generalized(ex, Labeling.uniform(ex, node.properties)).status
        assert got == check_node(ex, node).status, node


def test_uniform_labels_on_corpus_and_random_traces():
    from conftest import CORPUS

    traces = [load(p.read_text()) for p in sorted(CORPUS.glob("*.trace")) if p.stem != "adversarial"]
    traces += [sync_trace(seed, sync_prob=0.0) for seed in range(500)]
    for ex in traces:
        for node in LATTICE_NODES:
            got = check_generalized(ex, Labeling.uniform(ex, node.properties)).status
            assert got == check_node(ex, node).status, (ex.ops, node)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_uniform_gpdo_is_slow(seed):
    ex = sync_trace(seed, sync_prob=0.0)
    assert check_generalized(ex, Labeling.uniform(ex, parse_model("slow").properties)).status == check_classical(ex, "slow").status


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_weak_without_sync_ops_is_slow(seed):
    ex = sync_trace(seed, sync_prob=0.0)
    assert check_synchronized(ex, "weak").status == check_classical(ex, "slow").status


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from(SYNC_KINDS))
def test_original_implies_revised(seed, kind):
    ex = sync_trace(seed)
    if check_synchronized(ex, kind, "original").satisfied:
        assert check_synchronized(ex, kind, "revised").satisfied


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_entry_implies_location(seed):
    ex = sync_trace(seed)
    if check_synchronized(ex, "entry").satisfied:
        assert check_synchronized(ex, "location").satisfied


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_release_D_within_weak_D(seed):
    text = random_trace(seed, 2, 3, 2, sync_prob=0.5)
    recoded = text.replace(" sr ", " acq ").replace(" sw ", " rel ")
    assert build_D(load(recoded), "release").edges <= build_D(load(text), "weak").edges


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_default_labels_with_weak_D_are_the_weak_check(seed):
    ex = sync_trace(seed)
    direct = check_generalized(ex, Labeling.default(ex), build_D(ex, "weak"))
    assert direct.status == check_synchronized(ex, "weak").status
