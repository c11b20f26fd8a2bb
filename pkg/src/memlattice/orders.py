"""Ordering relations derived from an execution.

PO, DO and CR are returned transitively closed. WO, SO and AO are left
unclosed; view checks close them implicitly because a view is a total order.
Acquires count as reads and releases as writes throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .relation import Relation
from .trace import Execution

DEFAULT_SO_CAP = 20
DEFAULT_AUGMENT_CAP = 10**5


class BudgetExceeded(Exception):
    """A search or enumeration ran past its configured limit."""

    def __init__(self, message: str, spent: int = 0):
        super().__init__(message)
        self.spent = spent


def _memo(ex: Execution, key, build):
    if key not in ex.cache:
        ex.cache[key] = build()
    return ex.cache[key]


def local_order(ex: Execution, proc: str) -> Relation:
    """Process ``proc``'s ops in issue order, with every initial write before them."""

    def build():
        ops = ex.local[proc]
        edges = {(a, b): "local order" for i, a in enumerate(ops) for b in ops[i + 1:]}
        for init in sorted(ex.initial_ids):
            for b in ops:
                edges[(init, b)] = "local order"
        return Relation(edges)

    return _memo(ex, ("local", proc), build)


def process_order(ex: Execution) -> Relation:
    def build():
        rel = Relation()
        for p in ex.processes:
            rel = rel.union(local_order(ex, p))
        return Relation({e: "PO" for e in rel.edges})

    return _memo(ex, "po", build)


def data_order(ex: Execution) -> Relation:
    """Closure of: same-variable PO, writes-to, and the read-forced clause.

    The third clause puts o1 before o2 when o1 precedes a read r in PO,
    o1's value differs from r's, and o2 is the write r reads from.
    """

    def build():
        ops = ex.ops
        po = process_order(ex)
        edges: dict = {}
        for a, b in sorted(po.edges):
            if ops[a].var == ops[b].var:
                edges[(a, b)] = "DO clause 1 (PO)"
        for r, w in sorted(ex.writes_to.items()):
            edges.setdefault((w, r), "DO clause 2 (writes-to)")
        for o1, r in sorted(po.edges):
            rop, o1op = ops[r], ops[o1]
            if rop.is_read and o1op.var == rop.var and o1op.value != rop.value:
                edges.setdefault((o1, ex.writes_to[r]), "DO clause 3")
        return Relation(edges).closure("DO clause 4 (transitive)")

    return _memo(ex, "do", build)


def write_read_write_order(ex: Execution) -> Relation:
    """w1 before w2 when some read of w1 precedes w2 in PO."""

    def build():
        ops = ex.ops
        edges = {}
        for r, w2 in sorted(process_order(ex).edges):
            if ops[r].is_read and ops[w2].is_write:
                edges[(ex.writes_to[r], w2)] = "WO"
        return Relation(edges)

    return _memo(ex, "wo", build)


def causal_relation(ex: Execution) -> Relation:
    def build():
        base = Relation({e: "PO" for e in process_order(ex).edges}).union(ex.writes_to_relation)
        return base.closure("CR (transitive)")

    return _memo(ex, "cr", build)


def process_data_order(ex: Execution) -> Relation:
    def build():
        return Relation({e: "PDO" for e in process_order(ex).intersection(data_order(ex)).edges})

    return _memo(ex, "pdo", build)


@dataclass(frozen=True)
class SerialPair:
    """A write w and a same-variable read r of a different value.

    Every serial order places exactly one of: w before r's source write
    (``write_first``), or r before w.
    """

    write: int
    read: int
    source: int
    forced: bool  # the r-before-w choice contradicts a local order

    @property
    def write_first_edge(self) -> tuple[int, int]:
        return (self.write, self.source)

    @property
    def read_first_edge(self) -> tuple[int, int]:
        return (self.read, self.write)


def serial_pairs(ex: Execution) -> list[SerialPair]:
    def build():
        po = process_order(ex).edges
        out = []
        for r in sorted(ex.read_ids):
            rop = ex.ops[r]
            for w in sorted(ex.write_ids):
                wop = ex.ops[w]
                if wop.var == rop.var and wop.value != rop.value:
                    out.append(SerialPair(w, r, ex.writes_to[r], (w, r) in po))
        return out

    return _memo(ex, "so_pairs", build)


@dataclass(frozen=True)
class SerialOrder:
    """One choice per serial pair; True means write-first."""

    pairs: tuple[SerialPair, ...]
    choices: tuple[bool, ...]

    @property
    def relation(self) -> Relation:
        edges = {}
        for pair, first in zip(self.pairs, self.choices):
            edges.setdefault(pair.write_first_edge if first else pair.read_first_edge, "SO")
        return Relation(edges)

    def read_first_pairs(self) -> list[SerialPair]:
        return [p for p, c in zip(self.pairs, self.choices) if not c]


def enumerate_serial_orders(
    ex: Execution, cap: int = DEFAULT_SO_CAP, prune: bool = True
) -> Iterator[SerialOrder]:
    """Yield serial-order assignments, write-first choices explored first.

    With ``prune`` a read-first choice is dropped when the write precedes
    the read in the read's local order. Raises BudgetExceeded when more than
    ``cap`` pairs remain free.
    """
    pairs = tuple(serial_pairs(ex))
    options = [(True,) if (prune and p.forced) else (True, False) for p in pairs]
    free = sum(1 for o in options if len(o) == 2)
    if free > cap:
        raise BudgetExceeded(f"{free} free serial-order pairs exceed the cap of {cap}")
    for combo in itertools.product(*options):
        yield SerialOrder(pairs, tuple(combo))


def anti_order(ex: Execution, so: SerialOrder) -> Relation:
    """Write-to-write anti order induced by DO and a serial order."""
    ops = ex.ops
    po = process_order(ex)
    do = data_order(ex)
    so_rel = so.relation
    wt = ex.writes_to
    po_succ = po.successors()
    do_succ = do.successors()
    so_succ = so_rel.successors()
    reads = sorted(ex.read_ids)
    edges: dict = {}

    def add(a, b, clause):
        if ops[a].is_write and ops[b].is_write:
            edges.setdefault((a, b), f"AO clause {clause}")

    for r1 in reads:
        w1 = wt[r1]
        for r2 in po_succ.get(r1, ()):
            if not ops[r2].is_read:
                continue
            for w2 in do_succ.get(r2, ()):
                add(w1, w2, 1)
            for w2 in so_succ.get(r2, ()):
                add(w1, w2, 2)
        for w2 in so_succ.get(r1, ()):
            add(w1, w2, 3)
    for w1, r1 in sorted(po.edges):
        if not (ops[w1].is_write and ops[r1].is_read):
            continue
        for w2 in do_succ.get(r1, ()):
            add(w1, w2, 4)
        for w2 in so_succ.get(r1, ()):
            add(w1, w2, 5)
    return Relation(edges)


def anti_order_fixed(ex: Execution) -> Relation:
    """The part of the anti order that does not depend on the serial order."""

    def build():
        ops = ex.ops
        po, do_succ = process_order(ex), data_order(ex).successors()
        edges: dict = {}
        for a, b in sorted(po.edges):
            if not ops[b].is_read:
                continue
            # a <PO r2 with a a write (clause 4), or a read r1 <PO r2 (clause 1)
            if ops[a].is_write:
                w1, clause = a, 4
            else:
                w1, clause = ex.writes_to[a], 1
            for w2 in do_succ.get(b, ()):
                if ops[w2].is_write:
                    edges.setdefault((w1, w2), f"AO clause {clause}")
        return Relation(edges)

    return _memo(ex, "ao_fixed", build)


def anti_order_from_read_first(ex: Execution, pair: SerialPair) -> Relation:
    """Anti-order edges into ``pair.write`` created by choosing read-first.

    They come from the source of the read itself, from sources of earlier
    reads of the same process, and from writes preceding the read.
    """
    r, w2 = pair.read, pair.write
    edges = {(ex.writes_to[r], w2): "AO clause 3"}
    for a, b in sorted(process_order(ex).edges):
        if b != r:
            continue
        if ex.ops[a].is_read:
            edges.setdefault((ex.writes_to[a], w2), "AO clause 2")
        else:
            edges.setdefault((a, w2), "AO clause 5")
    return Relation(edges)


def augmented_data_orders(ex: Execution, budget: int = DEFAULT_AUGMENT_CAP) -> Iterator[Relation]:
    """Every way of totally ordering each variable's ops consistently with DO.

    Yields the union over variables of the total orders (as closed chains).
    Raises BudgetExceeded after ``budget`` results.
    """
    do = data_order(ex)
    if not do.is_acyclic():
        return
    per_var = []
    for v in ex.variables:
        ids = [op.id for op in ex.ops if op.var == v]
        exts = list(itertools.islice(_linear_extensions(ids, do.restrict(set(ids))), budget + 1))
        if len(exts) > budget:
            raise BudgetExceeded(f"more than {budget} orders of {v}", len(exts))
        per_var.append(exts)
    count = 0
    for combo in itertools.product(*per_var):
        count += 1
        if count > budget:
            raise BudgetExceeded(f"more than {budget} augmentations", count)
        rel = Relation()
        for order in combo:
            rel = rel.union(Relation.chain(order, "augmented DO"))
        yield rel


def _linear_extensions(ids: Sequence[int], rel: Relation) -> Iterator[tuple[int, ...]]:
    preds = {i: set() for i in ids}
    for a, b in rel.edges:
        preds[b].add(a)
    placed: list[int] = []
    done: set[int] = set()

    def rec():
        if len(placed) == len(ids):
            yield tuple(placed)
            return
        for i in sorted(ids):
            if i not in done and preds[i] <= done:
                placed.append(i)
                done.add(i)
                yield from rec()
                placed.pop()
                done.discard(i)

    yield from rec()


def linear_extensions(ids: Sequence[int], rel: Relation) -> Iterator[tuple[int, ...]]:
    return _linear_extensions(ids, rel.restrict(set(ids)))
