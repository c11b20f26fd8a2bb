from pathlib import Path

from memlattice.trace import load

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_text(name: str) -> str:
    return (CORPUS / f"{name}.trace").read_text()


def corpus(name: str):
    return load(corpus_text(name))


def random_query(seed: int, max_ops: int = 7, mode: str = "total"):
    """A random trace with a random subset (at most ``max_ops`` ids, initial
    writes included) and a random relation over it, possibly cyclic."""
    import random

    from memlattice.relation import Relation
    from memlattice.views import ViewQuery
    from memlattice.workload import random_trace

    rng = random.Random(seed)
    ex = load(random_trace(seed, rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 2)))
    rest = [i for i in ex.ids if i not in ex.initial_ids]
    room = max(0, max_ops - len(ex.initial_ids))
    subset = frozenset(rng.sample(rest, min(len(rest), rng.randint(0, room))))
    ids = sorted(subset | ex.initial_ids)
    density = rng.choice([0.0, 0.1, 0.25])
    edges = {(a, b) for a in ids for b in ids if a != b and rng.random() < density / (1 if a < b else 4)}
    return ex, ViewQuery(subset, Relation(edges, "rel"), mode)


def oracle_node(ex, node):
    """Decide a lattice node by literal enumeration: every serial order from
    the unpruned stream, the anti order built from it, and brute-force views."""
    from memlattice.lattice import GAO, property_relation
    from memlattice.orders import enumerate_serial_orders, local_order
    from memlattice.relation import Relation
    from memlattice.search import Query, SearchConfig, check_queries
    from memlattice.verdict import Status

    cfg = SearchConfig(engine="oracle")
    fixed = Relation()
    for p in node.properties:
        if p is not GAO:
            fixed = fixed.union(property_relation(ex, p))
    orders = enumerate_serial_orders(ex, cap=64, prune=False) if GAO in node.properties else [None]
    for so in orders:
        rel = fixed if so is None else fixed.union(property_relation(ex, GAO, so))
        queries = [Query(p, ex.own_and_writes(p), local_order(ex, p).union(rel)) for p in ex.processes]
        if check_queries(ex, queries, cfg).satisfied:
            return Status.SATISFIED
    return Status.VIOLATED


# one summary line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
