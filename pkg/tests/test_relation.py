import itertools

from hypothesis import given, settings, strategies as st

from memlattice.relation import Relation

edges_st = st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=14)


def reachable(edges, a, b):
    """Plain DFS, independent of Relation.closure."""
    succ = {}
    for x, y in edges:
        succ.setdefault(x, set()).add(y)
    seen, stack = set(), [a]
    while stack:
        for y in succ.get(stack.pop(), ()):
            if y == b:
                return True
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


@settings(max_examples=200, deadline=None)
@given(edges_st)
def test_closure_matches_reachability(edges):
    closed = Relation(edges).closure().edges
    for a, b in itertools.product(range(7), repeat=2):
        assert ((a, b) in closed) == reachable(edges, a, b)


@settings(max_examples=200, deadline=None)
@given(edges_st)
def test_cycle_iff_some_node_reaches_itself(edges):
    rel = Relation(edges, "e")
    cyclic = any(reachable(edges, a, a) for a in range(7))
    cycle = rel.find_cycle()
    assert (cycle is not None) == cyclic == (not rel.is_acyclic())
    if cycle:
        for (a, b, tag), (c, _, _) in zip(cycle, cycle[1:] + cycle[:1]):
            assert (a, b) in rel and b == c and tag == "e"


@settings(max_examples=200, deadline=None)
@given(edges_st)
def test_topo_sort_respects_acyclic_relations(edges):
    rel = Relation(edges)
    order = rel.topo_sort(range(7))
    if rel.is_acyclic():
        assert sorted(order) == list(range(7))
        assert rel.respected_by(order)
    else:
        assert order is None


def test_topo_sort_prefers_smallest_id():
    assert Relation({(2, 0)}).topo_sort(range(3)) == [1, 2, 0]


def test_self_loop_is_a_cycle():
    assert Relation({(3, 3)}, "x").find_cycle() == [(3, 3, "x")]


def test_union_keeps_first_tag():
    r = Relation({(1, 2)}, "a").union(Relation({(1, 2), (2, 3)}, "b"))
    assert r.tag(1, 2) == "a" and r.tag(2, 3) == "b"
    assert (Relation({(1, 2)}, "a") | Relation({(1, 2)}, "b")).tag(1, 2) == "a"


def test_restrict_filter_chain():
    r = Relation.chain([3, 1, 2], "c")
    assert r.edges == {(3, 1), (1, 2), (3, 2)}
    assert r.restrict({1, 2}).edges == {(1, 2)}
    assert r.filter(lambda a, b: a == 3).edges == {(3, 1), (3, 2)}
    assert r.closure() == r
