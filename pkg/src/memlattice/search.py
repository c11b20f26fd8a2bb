"""Combinators over per-process view queries.

``check_queries`` asks for one serial view per query. ``check_with_serial_order``
additionally searches for a single serial order shared by every query: each
serial pair contributes one of two edge sets, and the branches are explored
depth first with cycle pruning.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .orders import DEFAULT_SO_CAP
from .relation import Relation
from .trace import Execution
from .verdict import Counterexample, Status, Step, Verdict, all_of, unknown, violated_by_cycle
from .views import DEFAULT_BUDGET, TOTAL, ViewQuery, exists_serial_view


@dataclass(frozen=True)
class Query:
    label: str
    subset: frozenset
    relation: Relation


@dataclass(frozen=True)
class Choice:
    """One decision covering one or more serial pairs that must agree.

    Holds the edges each side would add; None marks a pruned side.
    """

    pairs: tuple
    write_first: Optional[Relation]
    read_first: Optional[Relation]


@dataclass
class SearchConfig:
    budget: int = DEFAULT_BUDGET
    so_cap: int = DEFAULT_SO_CAP
    mode: str = TOTAL
    engine: str = "search"
    prune: bool = True


def check_queries(ex: Execution, queries: Sequence[Query], cfg: SearchConfig) -> Verdict:
    results = []
    for q in queries:
        v = exists_serial_view(ex, ViewQuery(q.subset, q.relation, cfg.mode, cfg.budget), cfg.engine)
        results.append((q.label, v))
        if v.violated:
            break
    return all_of(results)


def check_with_serial_order(
    ex: Execution,
    queries: Sequence[Query],
    choices: Sequence[Choice],
    cfg: SearchConfig,
    derive: Optional[Callable[[Relation], Relation]] = None,
) -> Verdict:
    """Is there one serial order under which every query has a view?

    ``derive`` maps the edges chosen so far to further edges that follow
    from them (used for transitive synchronization orders); it must be
    monotone.
    """
    def full_relation(extra: Relation, q: Query) -> Relation:
        rel = q.relation.union(extra)
        if derive is not None:
            rel = rel.union(derive(extra))
        return rel.restrict(q.subset | ex.initial_ids)

    def refute(extra: Relation):
        for q in queries:
            cycle = full_relation(extra, q).find_cycle()
            if cycle:
                return cycle
        return None

    base_cycle = refute(Relation())
    if base_cycle:
        return violated_by_cycle(base_cycle)
    fixed = Relation()
    undecided: list[tuple[tuple, list[Relation]]] = []
    for c in choices:
        opts = [r for r in (c.write_first, c.read_first) if r is not None]
        undecided.append((c.pairs, opts))
    # Propagate to a fixpoint: drop a side that alone closes a cycle, and take
    # the smaller side when one side's edges contain the other's.
    changed = True
    while changed:
        changed = False
        remaining = []
        for pairs, opts in undecided:
            live = []
            for o in opts:
                if o.edges <= fixed.edges:
                    live = [o]
                    break
                if refute(fixed.union(o)) is None:
                    live.append(o)
            if len(live) == 2:
                if live[0].edges <= live[1].edges:
                    live = [live[0]]
                elif live[1].edges <= live[0].edges:
                    live = [live[1]]
            if not live:
                cycle = refute(fixed.union(opts[0])) if opts else refute(fixed)
                pair = pairs[0]
                note = f"neither order of {ex.describe(pair.write)} and {ex.describe(pair.read)} is possible"
                return Verdict(Status.VIOLATED, None, Counterexample(_steps(cycle), True, note))
            if len(live) == 1:
                if not live[0].edges <= fixed.edges:
                    fixed = fixed.union(live[0])
                    changed = True
            else:
                remaining.append((pairs, live))
        undecided = remaining
    branching = undecided
    if len(branching) > cfg.so_cap:
        return unknown(f"{len(branching)} free serial-order decisions exceed the cap of {cfg.so_cap}")

    spent = 0
    first_cycle = None
    saw_unknown = None
    memo: dict = {}

    def leaf(extra: Relation):
        nonlocal spent, saw_unknown, first_cycle
        results = []
        for q in queries:
            rel = full_relation(extra, q)
            key = (q.label, rel.edges)
            if key not in memo:
                v = exists_serial_view(ex, ViewQuery(q.subset, rel, cfg.mode, cfg.budget), cfg.engine)
                spent += v.budget_spent
                memo[key] = v
            v = memo[key]
            results.append((q.label, v))
            if not v.satisfied:
                if v.unknown and saw_unknown is None:
                    saw_unknown = v
                if v.violated and first_cycle is None and v.counterexample and v.counterexample.cycle:
                    first_cycle = [(st.src, st.dst, st.why) for st in v.counterexample.cycle]
                return None
        return all_of(results), extra

    def dfs(k: int, extra: Relation):
        nonlocal spent, first_cycle
        spent += 1
        if spent > cfg.budget:
            raise _OutOfBudget
        for q in queries:
            cycle = full_relation(extra, q).find_cycle()
            if cycle:
                if first_cycle is None:
                    first_cycle = cycle
                return None
        if k == len(branching):
            return leaf(extra)
        for opt in branching[k][1]:
            found = dfs(k + 1, extra.union(opt))
            if found is not None:
                return found
        return None

    try:
        found = dfs(0, fixed)
    except _OutOfBudget:
        return unknown(f"serial-order search exceeded {cfg.budget} nodes", spent)
    if found is not None:
        verdict, extra = found
        order = sorted(e for e in extra.edges if extra.tag(*e) == "SO")
        return Verdict(Status.SATISFIED, verdict.witness, None, spent, {"serial_order": order})
    if saw_unknown is not None:
        note = saw_unknown.counterexample.note if saw_unknown.counterexample else ""
        return unknown(note, spent)
    if not branching and first_cycle is not None:
        return violated_by_cycle(first_cycle, spent)
    steps = _steps(first_cycle)
    note = f"every serial order fails ({len(branching)} free decisions)"
    if steps:
        note += "; cycle shown for the first refuted branch"
    return Verdict(Status.VIOLATED, None, Counterexample(steps, True, note), spent)


class _OutOfBudget(Exception):
    pass


def _steps(cycle):
    return None if cycle is None else tuple(Step(a, b, why) for a, b, why in cycle)
