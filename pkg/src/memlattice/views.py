"""Serial view search.

A view over a subset of operations is serial when every read returns the
value of the most recent preceding write to its variable. The main entry
point asks whether some serial total order of a subset respects a relation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .orders import BudgetExceeded
from .relation import Relation
from .trace import Execution, OperationPattern
from .verdict import Verdict, satisfied, unknown, violated_by_cycle, violated_exhausted

DEFAULT_BUDGET = 10**6
ORACLE_LIMIT = 9

TOTAL = "total"
PARTIAL = "partial"


class OracleRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ViewQuery:
    """Subset (ids or patterns), the relation to respect, and the search mode."""

    subset: frozenset
    relation: Relation
    mode: str = TOTAL
    budget: int = DEFAULT_BUDGET

    def resolve(self, ex: Execution) -> frozenset[int]:
        items = list(self.subset)
        if items and isinstance(items[0], OperationPattern):
            return ex.select(items)
        return frozenset(items) | ex.initial_ids


def is_serial(ex: Execution, order: Sequence[int]) -> bool:
    last: dict[str, int] = {}
    for i in order:
        op = ex.ops[i]
        if op.is_write:
            last[op.var] = i
        elif last.get(op.var) != ex.writes_to[i]:
            return False
    return True


def validate_witness(ex: Execution, order: Sequence[int], subset: Iterable[int], rel: Relation) -> bool:
    """True when ``order`` is a serial permutation of ``subset`` respecting ``rel``."""
    ids = set(subset)
    return sorted(order) == sorted(ids) and rel.restrict(ids).respected_by(order) and is_serial(ex, order)


def exists_serial_view(ex: Execution, query: ViewQuery, engine: str = "search") -> Verdict:
    ids = query.resolve(ex)
    if engine == "oracle":
        return brute_force_oracle(ex, query)
    if query.mode == PARTIAL:
        return _partial_view(ex, ids, query.relation)
    return _total_view(ex, ids, query.relation, query.budget)


def _missing_source(ex: Execution, ids: frozenset[int]) -> Optional[str]:
    for i in sorted(ids):
        if ex.ops[i].is_read and ex.writes_to[i] not in ids:
            return f"{ex.describe(i)} reads a write outside the view"
    return None


def _total_view(ex: Execution, ids: frozenset[int], rel: Relation, budget: int) -> Verdict:
    restricted = rel.restrict(ids)
    cycle = restricted.find_cycle()
    if cycle:
        return violated_by_cycle(cycle)
    missing = _missing_source(ex, ids)
    if missing:
        return violated_exhausted(missing)
    try:
        order, spent = _search(ex, sorted(ids), restricted, budget)
    except BudgetExceeded as exc:
        return unknown(str(exc), exc.spent)
    if order is None:
        return violated_exhausted("no serial order respects the relation", spent)
    return satisfied({"view": tuple(order)}, spent)


def _search(ex: Execution, ids: list[int], rel: Relation, budget: int):
    """Backtracking over linear extensions.

    Reads are placed greedily as soon as they are enabled and their source
    is the latest write to their variable; this never loses a solution.
    Writes are branched on in ascending id order, and a write may not
    overwrite a write that still has unplaced readers.
    """
    n = len(ids)
    pos = {op: k for k, op in enumerate(ids)}
    pred = [0] * n
    for a, b in rel.edges:
        pred[pos[b]] |= 1 << pos[a]
    var_index: dict[str, int] = {}
    var = []
    for op in ids:
        var.append(var_index.setdefault(ex.ops[op].var, len(var_index)))
    reads = [k for k, op in enumerate(ids) if ex.ops[op].is_read]
    writes = [k for k, op in enumerate(ids) if ex.ops[op].is_write]
    src = {k: pos[ex.writes_to[ids[k]]] for k in reads}
    readers = [0] * n
    for k in reads:
        readers[src[k]] |= 1 << k
    full = (1 << n) - 1
    failed: set = set()
    order: list[int] = []
    spent = 0

    def dfs(placed: int, last: tuple) -> bool:
        nonlocal spent
        added = 0
        progress = True
        while progress:
            progress = False
            for k in reads:
                bit = 1 << k
                if not placed & bit and not pred[k] & ~placed and last[var[k]] == src[k]:
                    placed |= bit
                    order.append(k)
                    added += 1
                    progress = True
                    break
        if placed == full:
            return True
        key = (placed, last)
        if key not in failed:
            spent += 1
            if spent > budget:
                raise BudgetExceeded(f"view search exceeded {budget} nodes", spent)
            for k in writes:
                bit = 1 << k
                if placed & bit or pred[k] & ~placed:
                    continue
                cur = last[var[k]]
                if cur >= 0 and readers[cur] & ~placed:
                    continue
                order.append(k)
                if dfs(placed | bit, last[: var[k]] + (k,) + last[var[k] + 1:]):
                    return True
                order.pop()
            failed.add(key)
        del order[len(order) - added:]
        return False

    ok = dfs(0, (-1,) * len(var_index))
    return ([ids[k] for k in order] if ok else None), spent


def _partial_view(ex: Execution, ids: frozenset[int], rel: Relation) -> Verdict:
    """Partial-order variant: the relation plus writes-to must be acyclic,
    and no same-variable write may sit between a read and its source."""
    missing = _missing_source(ex, ids)
    if missing:
        return violated_exhausted(missing)
    base = rel.restrict(ids).union(ex.writes_to_relation.restrict(ids))
    cycle = base.find_cycle()
    if cycle:
        return violated_by_cycle(cycle)
    closed = base.closure()
    for r in sorted(ids):
        op = ex.ops[r]
        if not op.is_read:
            continue
        w = ex.writes_to[r]
        for w2 in sorted(ids):
            other = ex.ops[w2]
            if w2 != w and other.is_write and other.var == op.var and (w, w2) in closed and (w2, r) in closed:
                note = f"{ex.describe(w2)} lies between {ex.describe(r)} and its source {ex.describe(w)}"
                return violated_exhausted(note)
    return satisfied({"view": tuple(base.topo_sort(ids))})


def brute_force_oracle(ex: Execution, query: ViewQuery) -> Verdict:
    """Try every permutation. Refuses subsets larger than nine operations."""
    ids = query.resolve(ex)
    if len(ids) > ORACLE_LIMIT:
        raise OracleRangeError(f"oracle refuses {len(ids)} operations (limit {ORACLE_LIMIT})")
    rel = query.relation.restrict(ids)
    if query.mode == PARTIAL:
        return _partial_oracle(ex, ids, rel)
    for perm in itertools.permutations(sorted(ids)):
        if rel.respected_by(perm) and is_serial(ex, perm):
            return satisfied({"view": perm})
    return violated_exhausted("no permutation is a serial view")


def _partial_oracle(ex: Execution, ids: frozenset[int], rel: Relation) -> Verdict:
    # Extra edges can only create dominated reads, so the least order holding
    # rel and writes-to decides. Closed here with Floyd-Warshall.
    base = rel.union(ex.writes_to_relation.restrict(ids))
    nodes = sorted(ids)
    reach = {(a, b) for a, b in base.edges}
    for k in nodes:
        for a in nodes:
            for b in nodes:
                if (a, k) in reach and (k, b) in reach:
                    reach.add((a, b))
    if any((a, a) in reach for a in nodes):
        return violated_exhausted("relation is cyclic")
    for r in nodes:
        if ex.ops[r].is_read:
            if ex.writes_to[r] not in ids:
                return violated_exhausted("source outside view")
            w = ex.writes_to[r]
            for w2 in nodes:
                if ex.ops[w2].is_write and ex.ops[w2].var == ex.ops[r].var and (w, w2) in reach and (w2, r) in reach:
                    return violated_exhausted("dominated read")
    return satisfied({"view": tuple(base.topo_sort(ids))})


def iter_serial_views(
    ex: Execution, ids: Iterable[int], rel: Relation, budget: int = DEFAULT_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Every serial linear extension of ``rel`` on ``ids``, ascending-id first."""
    nodes = sorted(set(ids))
    restricted = rel.restrict(set(nodes))
    preds = {i: set() for i in nodes}
    for a, b in restricted.edges:
        preds[b].add(a)
    readers: dict[int, set[int]] = {}
    for i in nodes:
        if ex.ops[i].is_read:
            readers.setdefault(ex.writes_to[i], set()).add(i)
    order: list[int] = []
    done: set[int] = set()
    last: dict[str, int] = {}
    spent = 0

    def rec():
        nonlocal spent
        spent += 1
        if spent > budget:
            raise BudgetExceeded(f"view enumeration exceeded {budget} nodes", spent)
        if len(order) == len(nodes):
            yield tuple(order)
            return
        for i in nodes:
            if i in done or not preds[i] <= done:
                continue
            op = ex.ops[i]
            if op.is_read:
                if last.get(op.var) != ex.writes_to[i]:
                    continue
                prev = None
            else:
                prev = last.get(op.var)
                if prev is not None and not readers.get(prev, set()) <= done:
                    continue
                last[op.var] = i
            order.append(i)
            done.add(i)
            yield from rec()
            order.pop()
            done.discard(i)
            if op.is_write:
                if prev is None:
                    del last[op.var]
                else:
                    last[op.var] = prev

    yield from rec()
