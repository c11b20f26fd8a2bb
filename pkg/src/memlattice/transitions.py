"""Synchronized models: weak, release, lazy release, entry, scope and location.

Every operation carries a set of property labels. Views respect the local
order, the synchronization order (each property's relation restricted to
pairs of operations that both carry its label), the model's D order between
ordinary and synchronizing operations, and the transitive order T that
carries D across synchronization chains.

By default synchronizing operations are labeled GPO+GWO+GAO, ordinary ones
GPDO, and initial writes every property.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .lattice import SEQUENTIAL, check_node, property_relation, serial_order_choices
from .orders import (
    DEFAULT_SO_CAP,
    BudgetExceeded,
    anti_order_fixed,
    local_order,
    process_order,
    write_read_write_order,
)
from .properties import ALL_PROPERTIES, Property
from .relation import Relation
from .search import Query, SearchConfig, check_queries, check_with_serial_order
from .trace import Execution
from .verdict import Status, Verdict, unknown, violated_exhausted
from .views import DEFAULT_BUDGET, PARTIAL, TOTAL, iter_serial_views

SYNC_KINDS = ("weak", "release", "lazy-release", "entry", "scope", "location")
SYNC_DEFAULT = frozenset({Property.GPO, Property.GWO, Property.GAO})
ORDINARY_DEFAULT = frozenset({Property.GPDO})


class LabelingError(ValueError):
    pass


def normalize_kind(kind: str) -> str:
    k = kind.strip().lower().replace("_", "-")
    if k == "lazy":
        k = "lazy-release"
    if k not in SYNC_KINDS:
        raise ValueError(f"unknown synchronized model {kind!r}")
    return k


@dataclass(frozen=True)
class Labeling:
    labels: Mapping[int, frozenset]

    def __getitem__(self, op_id: int) -> frozenset:
        return self.labels[op_id]

    def has(self, op_id: int, prop: Property) -> bool:
        return prop in self.labels[op_id]

    @classmethod
    def default(cls, ex: Execution) -> "Labeling":
        return cls({
            op.id: ALL_PROPERTIES if op.is_initial else (SYNC_DEFAULT if op.is_sync else ORDINARY_DEFAULT)
            for op in ex.ops
        })

    @classmethod
    def uniform(cls, ex: Execution, props) -> "Labeling":
        props = frozenset(props)
        return cls({op.id: ALL_PROPERTIES if op.is_initial else props for op in ex.ops})

    @classmethod
    def from_trace(cls, ex: Execution, default: Optional["Labeling"] = None) -> "Labeling":
        """Labels written in the trace; unlabeled ops fall back to ``default``."""
        out = {}
        for op in ex.ops:
            if op.is_initial:
                out[op.id] = ALL_PROPERTIES
            elif op.labels:
                out[op.id] = frozenset(op.labels)
            elif default is not None:
                out[op.id] = default[op.id]
            else:
                raise LabelingError(f"{op} on line {op.line} has no property labels")
        return cls(out)


def _association(ex: Execution) -> dict[str, str]:
    """Static variable-to-lock association read from @tags on ordinary ops."""
    assoc: dict[str, str] = {}
    for op in ex.ops:
        if op.is_sync or op.is_initial or not op.sync_var:
            continue
        prev = assoc.setdefault(op.var, op.sync_var)
        if prev != op.sync_var:
            raise LabelingError(f"variable {op.var} is associated with both {prev} and {op.sync_var} (line {op.line})")
    return assoc


def _is_acquire(op) -> bool:
    return op.is_sync and op.is_read


def _is_release(op) -> bool:
    return op.is_sync and op.is_write


def build_D(ex: Execution, kind: str, seq=None) -> Relation:
    """Order between ordinary and synchronizing operations of each process.

    ``seq`` (a total order of the synchronizing operations) is used only by
    lazy release; without it the release-before-acquire test uses PO, WO and
    writes-to among synchronizing operations.
    """
    kind = normalize_kind(kind)
    ops = ex.ops
    tag = f"D({kind})"
    if kind == "weak":
        bad = [op for op in ops if op.kind.value in ("acq", "rel")]
        if bad:
            raise LabelingError(f"weak ordering expects sr/sw, found {bad[0].kind.value} on line {bad[0].line}")
    assoc = _association(ex) if kind in ("entry", "location") else {}
    edges: dict = {}
    for p in ex.processes:
        local = ex.local[p]
        for k, s in enumerate(local):
            sop = ops[s]
            if not sop.is_sync:
                continue
            before = [o for o in local[:k] if not ops[o].is_sync]
            after = [o for o in local[k + 1:] if not ops[o].is_sync]
            if kind == "scope":
                same = lambda o: ops[o].is_sync and ops[o].sync_key == sop.sync_key
                nxt = next((j for j in range(k + 1, len(local)) if same(local[j])), len(local))
                prv = max((j for j in range(k) if same(local[j])), default=-1)
                after = [o for o in local[k + 1:nxt] if not ops[o].is_sync]
                before = [o for o in local[prv + 1:k] if not ops[o].is_sync]
            if kind in ("entry", "location"):
                after = [o for o in after if assoc.get(ops[o].var) == sop.sync_key]
                before = [o for o in before if assoc.get(ops[o].var) == sop.sync_key]
            if kind == "weak":
                for o in before:
                    edges[(o, s)] = tag
                for o in after:
                    edges[(s, o)] = tag
            elif _is_acquire(sop):
                for o in after:
                    edges[(s, o)] = tag
            elif kind != "lazy-release":
                for o in before:
                    edges[(o, s)] = tag
    d = Relation(edges)
    if kind == "lazy-release":
        d = _lazy_predecessors(ex, d, seq, tag)
    return d


def _lazy_predecessors(ex: Execution, d: Relation, seq, tag: str) -> Relation:
    """Add o before acquire a when o precedes a release that is ordered before a."""
    ops = ex.ops
    sync = ex.sync_ids
    if seq is not None:
        base = Relation.chain([i for i in seq if i in sync])
    else:
        po = process_order(ex)
        base = po.union(write_read_write_order(ex), ex.writes_to_relation).restrict(sync)
    acquires = sorted(i for i in sync if _is_acquire(ops[i]))
    releases = sorted(i for i in sync if _is_release(ops[i]))
    before_release = {}
    for rel in releases:
        local = ex.local[ops[rel].proc]
        before_release[rel] = [o for o in local[: local.index(rel)] if not ops[o].is_sync]
    while True:
        closed = d.union(base).closure()
        new = {}
        for a in acquires:
            for rel in releases:
                if (rel, a) in closed:
                    for o in before_release[rel]:
                        if (o, a) not in d:
                            new[(o, a)] = tag
        if not new:
            return d
        d = d.union(Relation(new))


def _synch_fixed(ex: Execution, labeling: Labeling) -> Relation:
    """Label-restricted relations that do not depend on a serial order."""
    out = Relation()
    for prop in (Property.GPO, Property.GDO, Property.GWO, Property.GPDO):
        out = out.union(property_relation(ex, prop).filter(lambda a, b: labeling.has(a, prop) and labeling.has(b, prop)))
    gao = Property.GAO
    out = out.union(anti_order_fixed(ex).filter(lambda a, b: labeling.has(a, gao) and labeling.has(b, gao)))
    return out


def synch_order(ex: Execution, labeling: Labeling, so=None) -> Relation:
    """The synchronization order; GAO edges are included when ``so`` is given."""
    out = _synch_fixed(ex, labeling)
    if so is not None:
        gao = Property.GAO
        extra = property_relation(ex, gao, so).filter(lambda a, b: labeling.has(a, gao) and labeling.has(b, gao))
        out = out.union(extra)
    return out


def transitive_order(ex: Execution, d: Relation, synch: Relation) -> Relation:
    """Orders that D induces through chains of synchronization edges."""
    ops = ex.ops
    plus = synch.closure("synch")
    d_pred: dict[int, list[int]] = {}
    d_succ: dict[int, list[int]] = {}
    for a, b in sorted(d.edges):
        d_succ.setdefault(a, []).append(b)
        d_pred.setdefault(b, []).append(a)
    plus_succ = plus.successors()
    sreads = [i for i in sorted(ex.sync_ids) if ops[i].is_read]
    edges: dict = {}
    for sr in sreads:
        preds = d_pred.get(sr, [])
        succs = d_succ.get(sr, [])
        for o1 in preds:
            for o2 in succs:
                edges.setdefault((o1, o2), "T clause 3")
        for x in plus_succ.get(sr, ()):
            xop = ops[x]
            if xop.is_sync and xop.is_write:
                for o in preds:
                    edges.setdefault((o, x), "T clause 1")
            if xop.is_sync and xop.is_read:
                for o1 in preds:
                    for o2 in d_succ.get(x, ()):
                        edges.setdefault((o1, o2), "T clause 4")
    for sw, sr in sorted(plus.edges):
        if ops[sw].is_sync and ops[sw].is_write and ops[sr].is_sync and ops[sr].is_read:
            for o in d_succ.get(sr, ()):
                edges.setdefault((sw, o), "T clause 2")
    return Relation(edges)


def check_generalized(
    ex: Execution,
    labeling: Labeling,
    d: Optional[Relation] = None,
    partial: bool = False,
    budget: int = DEFAULT_BUDGET,
    so_cap: int = DEFAULT_SO_CAP,
    engine: str = "search",
    prune: bool = True,
) -> Verdict:
    """Some serial order lets every process see its own reads and all writes
    in an order respecting local order, synch, D and T."""
    d = d if d is not None else Relation()
    synch = _synch_fixed(ex, labeling)
    common = synch.union(d)
    queries = [
        Query(p, ex.own_and_writes(p), local_order(ex, p).union(common, transitive_order(ex, d, synch)))
        for p in ex.processes
    ]
    cfg = SearchConfig(budget=budget, so_cap=so_cap, mode=PARTIAL if partial else TOTAL, engine=engine, prune=prune)
    gao = Property.GAO
    if not any(gao in labeling[op.id] for op in ex.ops if not op.is_initial):
        return check_queries(ex, queries, cfg)
    keep = lambda a, b: labeling.has(a, gao) and labeling.has(b, gao)
    choices = serial_order_choices(ex, prune, keep)
    derive = lambda extra: transitive_order(ex, d, synch.union(extra))
    return check_with_serial_order(ex, queries, choices, cfg, derive)


def check_synchronized(
    ex: Execution,
    kind: str,
    variant: str = "revised",
    budget: int = DEFAULT_BUDGET,
    so_cap: int = DEFAULT_SO_CAP,
    engine: str = "search",
) -> Verdict:
    """Check a synchronized model with the default labeling.

    ``revised`` lets each process see only its own synchronizing reads;
    ``original`` shows every process all synchronizing operations in one
    shared order.
    """
    kind = normalize_kind(kind)
    partial = kind == "location"
    if variant == "revised":
        return check_generalized(ex, Labeling.default(ex), build_D(ex, kind), partial, budget, so_cap, engine)
    if variant != "original":
        raise ValueError(f"unknown variant {variant!r}")
    return _check_original(ex, kind, partial, budget, engine)


def _check_original(ex: Execution, kind: str, partial: bool, budget: int, engine: str) -> Verdict:
    labeling = Labeling.default(ex)
    synch = _synch_fixed(ex, labeling)
    sync = ex.sync_ids
    d_fixed = None if kind == "lazy-release" else build_D(ex, kind)
    seq_ids = set(sync) | {ex.initial[ex.ops[i].var] for i in sync}
    cfg = SearchConfig(budget=budget, mode=PARTIAL if partial else TOTAL, engine=engine)
    seen = set()
    spent = 0
    try:
        for view in iter_serial_views(ex, seq_ids, process_order(ex), budget):
            order = tuple(i for i in view if i in sync)
            if order in seen:
                continue
            seen.add(order)
            d = d_fixed if d_fixed is not None else build_D(ex, kind, seq=view)
            common = synch.union(d, Relation.chain(order, "sync order"))
            queries = []
            for p in ex.processes:
                subset = frozenset(i for i in ex.local[p] if not ex.ops[i].is_sync) | ex.write_ids | sync
                queries.append(Query(p, subset, local_order(ex, p).union(common)))
            v = check_queries(ex, queries, cfg)
            spent += v.budget_spent
            if v.satisfied:
                return Verdict(Status.SATISFIED, v.witness, None, spent, {"sync_order": list(order)})
            if v.unknown:
                return v
    except BudgetExceeded as exc:
        return unknown(str(exc), exc.spent)
    if not seen:
        return violated_exhausted("synchronizing operations admit no serial order", spent)
    return violated_exhausted(f"all {len(seen)} orders of the synchronizing operations fail", spent)


@dataclass(frozen=True)
class DrfResult:
    status: str  # vacuous | witnessed | violation | unknown
    weak: Verdict
    sequential: Optional[Verdict]


def drf_check(ex: Execution, budget: int = DEFAULT_BUDGET, so_cap: int = DEFAULT_SO_CAP) -> DrfResult:
    """On one trace: weakly ordered should imply sequentially consistent."""
    weak = check_synchronized(ex, "weak", "revised", budget, so_cap)
    if weak.violated:
        return DrfResult("vacuous", weak, None)
    if weak.unknown:
        return DrfResult("unknown", weak, None)
    seq = check_node(ex, SEQUENTIAL, budget=budget, so_cap=so_cap)
    status = {Status.SATISFIED: "witnessed", Status.VIOLATED: "violation", Status.UNKNOWN: "unknown"}[seq.status]
    return DrfResult(status, weak, seq)
