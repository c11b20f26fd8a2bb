"""The lattice of view-based consistency models.

A node is a set of properties, each asking every process for a serial view
of its own operations plus all writes that respects the local order and
one more relation:

    GPO  process order          GDO  data order
    GWO  write-read-write order GAO  anti order under a shared serial order
    GPDO process order intersected with data order

GAO subsumes GDO, and GPDO is implied by GPO or GDO, so nodes are kept in
a normal form with those redundancies removed.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

from .orders import (
    DEFAULT_AUGMENT_CAP,
    DEFAULT_SO_CAP,
    BudgetExceeded,
    SerialOrder,
    anti_order,
    anti_order_fixed,
    anti_order_from_read_first,
    causal_relation,
    data_order,
    linear_extensions,
    local_order,
    process_data_order,
    process_order,
    serial_pairs,
    write_read_write_order,
)
from .properties import Property, sort_properties
from .relation import Relation
from .search import Choice, Query, SearchConfig, check_queries, check_with_serial_order
from .trace import Execution
from .verdict import Status, Verdict, all_of, unknown, violated_by_cycle, violated_exhausted
from .views import DEFAULT_BUDGET, iter_serial_views

GPO, GDO, GWO, GAO, GPDO = Property.GPO, Property.GDO, Property.GWO, Property.GAO, Property.GPDO


def normalize(props: Iterable[Property]) -> frozenset[Property]:
    s = set(props)
    if GAO in s:
        s.discard(GDO)
    if GPDO in s and s & {GPO, GDO, GAO}:
        s.discard(GPDO)
    return frozenset(s)


def implied(props: Iterable[Property]) -> frozenset[Property]:
    """Every property guaranteed by ``props``."""
    s = set(props)
    if GAO in s:
        s.add(GDO)
    if s & {GPO, GDO}:
        s.add(GPDO)
    return frozenset(s)


_ALIASES = {
    frozenset({GPO, GWO, GAO}): "sequential",
    frozenset({GPO, GWO}): "causal",
    frozenset({GPO}): "pram",
    frozenset({GDO}): "cache",
    frozenset({GPDO}): "slow",
    frozenset(): "local",
}


@dataclass(frozen=True)
class ModelNode:
    properties: frozenset
    augmented: bool = False  # processor consistency: GPO+GDO with augmented data order

    @classmethod
    def of(cls, *props: Property) -> "ModelNode":
        return cls(normalize(props))

    @property
    def alias(self) -> Optional[str]:
        if self.augmented:
            return "processor"
        return _ALIASES.get(self.properties)

    @property
    def label(self) -> str:
        return "+".join(p.value for p in sort_properties(self.properties)) or "∅"

    @property
    def display(self) -> str:
        if self.augmented:
            return "PROCESSOR"
        alias = _ALIASES.get(self.properties)
        return alias.upper() if alias else self.label

    def __str__(self) -> str:
        return self.display

    def sort_key(self):
        return tuple(p.rank for p in sort_properties(self.properties))


SEQUENTIAL = ModelNode.of(GPO, GWO, GAO)
CAUSAL = ModelNode.of(GPO, GWO)
PRAM = ModelNode.of(GPO)
CACHE = ModelNode.of(GDO)
SLOW = ModelNode.of(GPDO)
LOCAL = ModelNode.of()
PROCESSOR = ModelNode(frozenset({GPO, GDO}), augmented=True)

# strongest first, one tier per row
LATTICE_NODES: tuple[ModelNode, ...] = (
    SEQUENTIAL,
    ModelNode.of(GPO, GAO),
    ModelNode.of(GPO, GDO, GWO),
    ModelNode.of(GWO, GAO),
    ModelNode.of(GPO, GDO),
    CAUSAL,
    ModelNode.of(GDO, GWO),
    ModelNode.of(GAO),
    PRAM,
    CACHE,
    ModelNode.of(GWO),
    SLOW,
    LOCAL,
)

CLASSICAL = ("sequential", "processor", "causal", "pram", "cache", "slow", "local")


def parse_model(name: str) -> ModelNode:
    """Parse a lattice model name: an alias, or properties joined with '+'."""
    key = name.strip().lower()
    if key == "processor":
        return PROCESSOR
    for props, alias in _ALIASES.items():
        if key == alias:
            return ModelNode(props)
    if key in ("∅", "none", ""):
        return LOCAL
    try:
        return ModelNode.of(*(Property.parse(p) for p in key.split("+")))
    except ValueError:
        raise ValueError(f"unknown model {name!r}") from None


def _plain(node: ModelNode) -> frozenset:
    if node.augmented:
        raise ValueError("processor consistency is not a lattice node")
    return implied(node.properties)


# Bounds are taken on implied property sets. GWO+GPDO is the one bound that is
# not among LATTICE_NODES: lub(GWO, SLOW) and glb(CAUSAL, GDO+GWO).
def lub(a: ModelNode, b: ModelNode) -> ModelNode:
    return ModelNode(normalize(_plain(a) | _plain(b)))


def glb(a: ModelNode, b: ModelNode) -> ModelNode:
    return ModelNode(normalize(_plain(a) & _plain(b)))


def compare(a: ModelNode, b: ModelNode) -> str:
    """One of 'stronger', 'weaker', 'equal', 'incomparable' (a relative to b)."""
    pa, pb = _plain(a), _plain(b)
    if pa == pb:
        return "equal"
    if pa > pb:
        return "stronger"
    if pa < pb:
        return "weaker"
    return "incomparable"


def stronger_or_equal(a: ModelNode, b: ModelNode) -> bool:
    return compare(a, b) in ("stronger", "equal")


def property_relation(ex: Execution, prop: Property, so: Optional[SerialOrder] = None) -> Relation:
    if prop is GPO:
        return process_order(ex)
    if prop is GDO:
        return data_order(ex)
    if prop is GWO:
        return write_read_write_order(ex)
    if prop is GPDO:
        return process_data_order(ex)
    if so is None:
        raise ValueError("the anti-order property needs a serial order")
    return so.relation.union(anti_order(ex, so))


def _config(budget: int, so_cap: int, engine: str, prune: bool = True) -> SearchConfig:
    return SearchConfig(budget=budget, so_cap=so_cap, engine=engine, prune=prune)


def serial_order_choices(ex: Execution, prune: bool = True, keep=None) -> list[Choice]:
    """Edge sets for the serial-order decisions; ``keep(a, b)`` filters edges.

    Pairs sharing a write w and a source s are decided together: write-first
    orders w before s, read-first puts s before w in the anti order, so
    mixing the two is always cyclic.
    """
    groups: dict = {}
    singles = []
    for pair in serial_pairs(ex):
        first = Relation({pair.write_first_edge: "SO"})
        second = None
        # read-first contradicts the read's local order, unless its edge is filtered away
        if not (prune and pair.forced and (keep is None or keep(*pair.read_first_edge))):
            second = Relation({pair.read_first_edge: "SO"}).union(anti_order_from_read_first(ex, pair))
        if keep is not None:
            first = first.filter(keep)
            second = None if second is None else second.filter(keep)
        w, s = pair.write_first_edge
        if keep is None or (keep(w, s) and keep(s, w)):
            groups.setdefault((w, s), []).append((pair, first, second))
        else:
            singles.append(Choice((pair,), first, second))
    out = []
    for members in groups.values():
        pairs = tuple(m[0] for m in members)
        first = Relation().union(*(m[1] for m in members))
        seconds = [m[2] for m in members]
        second = None if any(x is None for x in seconds) else Relation().union(*seconds)
        out.append(Choice(pairs, first, second))
    return out + singles


def check_node(
    ex: Execution,
    node: ModelNode,
    budget: int = DEFAULT_BUDGET,
    so_cap: int = DEFAULT_SO_CAP,
    engine: str = "search",
    prune: bool = True,
) -> Verdict:
    """Check one lattice node: per-process views over own ops plus all writes."""
    if node.augmented:
        return check_processor(ex, budget=budget, engine=engine)
    props = normalize(node.properties)
    fixed = Relation()
    for p in sort_properties(props):
        if p is not GAO:
            fixed = fixed.union(property_relation(ex, p))
    if GAO in props:
        fixed = fixed.union(anti_order_fixed(ex))
    queries = [Query(p, ex.own_and_writes(p), local_order(ex, p).union(fixed)) for p in ex.processes]
    cfg = _config(budget, so_cap, engine, prune)
    if GAO not in props:
        return check_queries(ex, queries, cfg)
    return check_with_serial_order(ex, queries, serial_order_choices(ex, prune), cfg)


def check_intersection(ex: Execution, budget: int = DEFAULT_BUDGET, engine: str = "search") -> Verdict:
    """GPO and GDO with independent view families (weaker than GPO+GDO)."""
    parts = []
    for node in (PRAM, CACHE):
        v = check_node(ex, node, budget=budget, engine=engine)
        if v.witness:
            v = Verdict(v.status, {f"{node.label}:{k}": o for k, o in v.witness.items()}, v.counterexample, v.budget_spent)
        parts.append((node.label, v))
    return all_of(parts)


def check_classical(
    ex: Execution, name: str, budget: int = DEFAULT_BUDGET, engine: str = "search", augment_cap: int = DEFAULT_AUGMENT_CAP
) -> Verdict:
    """The textbook formulations, independent of the lattice properties."""
    name = name.lower()
    cfg = _config(budget, DEFAULT_SO_CAP, engine)
    po = process_order(ex)
    if name == "sequential":
        return check_queries(ex, [Query("all", frozenset(ex.ids), po)], cfg)
    if name == "pram":
        return check_queries(ex, [Query(p, ex.own_and_writes(p), po) for p in ex.processes], cfg)
    if name == "causal":
        cr = causal_relation(ex)
        return check_queries(ex, [Query(p, ex.own_and_writes(p), cr) for p in ex.processes], cfg)
    if name == "local":
        return check_queries(ex, [Query(p, ex.own_and_writes(p), local_order(ex, p)) for p in ex.processes], cfg)
    if name == "cache":
        return check_queries(ex, [Query(v, _ops_on(ex, v), po) for v in ex.variables], cfg)
    if name == "slow":
        queries = []
        for p in ex.processes:
            for v in ex.variables:
                subset = frozenset(i for i in ex.local[p] if ex.ops[i].var == v) | _writes_on(ex, v)
                queries.append(Query(f"{p}/{v}", subset, po))
        return check_queries(ex, queries, cfg)
    if name == "processor":
        return _classical_processor(ex, cfg, augment_cap)
    raise ValueError(f"unknown classical model {name!r}")


def _ops_on(ex: Execution, var: str) -> frozenset[int]:
    return frozenset(op.id for op in ex.ops if op.var == var)


def _writes_on(ex: Execution, var: str) -> frozenset[int]:
    return frozenset(op.id for op in ex.ops if op.var == var and op.is_write)


def _classical_processor(ex: Execution, cfg: SearchConfig, cap: int) -> Verdict:
    """Some per-variable serial views, merged with PO, admit a view per process."""
    po = process_order(ex)
    per_var = []
    try:
        for v in ex.variables:
            seen = {}
            for view in iter_serial_views(ex, _ops_on(ex, v), po, cfg.budget):
                key = tuple(i for i in view if ex.ops[i].is_write)
                seen.setdefault(key, view)
                if len(seen) > cap:
                    raise BudgetExceeded(f"more than {cap} views of {v}")
            if not seen:
                return violated_exhausted(f"no serial view of variable {v}")
            per_var.append([Relation.chain(view, f"view of {v}") for view in seen.values()])
        return _try_augmentations(ex, itertools.product(*per_var), cfg, cap)
    except BudgetExceeded as exc:
        return unknown(str(exc), exc.spent)


def _try_augmentations(ex: Execution, combos, cfg: SearchConfig, cap: int) -> Verdict:
    po = process_order(ex)
    spent = 0
    first_cycle = None
    saw_unknown = None
    count = 0
    for combo in combos:
        count += 1
        if count > cap:
            return unknown(f"more than {cap} augmentations", spent)
        aug = Relation().union(*combo)
        queries = [Query(p, ex.own_and_writes(p), local_order(ex, p).union(po, aug)) for p in ex.processes]
        v = check_queries(ex, queries, cfg)
        spent += v.budget_spent
        if v.satisfied:
            return Verdict(Status.SATISFIED, v.witness, None, spent, {"augmentations_tried": count})
        if v.unknown and saw_unknown is None:
            saw_unknown = v
        if v.violated and first_cycle is None and v.counterexample and v.counterexample.cycle:
            first_cycle = [(s.src, s.dst, s.why) for s in v.counterexample.cycle]
    if saw_unknown is not None:
        return unknown(saw_unknown.counterexample.note, spent)
    return violated_exhausted(f"all {count} augmentations fail", spent, first_cycle)


def serial_augmentations(ex: Execution):
    """Per-variable write orders extending DO, each read slotted after its source.

    Reads of different processes in one slot are left unordered: only a
    process's own reads appear in its view, and PO already orders those.
    """
    do = data_order(ex)
    per_var = []
    for v in ex.variables:
        writes = sorted(_writes_on(ex, v))
        group = {w: w for w in writes}
        readers = {w: [] for w in writes}
        for op in ex.ops:
            if op.var == v and op.is_read:
                group[op.id] = ex.writes_to[op.id]
                readers[ex.writes_to[op.id]].append(op.id)
        gedges = Relation(
            {(group[a], group[b]): "" for a, b in do.edges if a in group and b in group and group[a] != group[b]}
        )
        options = []
        for order in linear_extensions(writes, gedges):
            edges = {}
            for k, w in enumerate(order):
                for r in readers[w]:
                    edges[(w, r)] = "augmented DO"
                if k + 1 < len(order):
                    nxt = order[k + 1]
                    edges[(w, nxt)] = "augmented DO"
                    for r in readers[w]:
                        edges[(r, nxt)] = "augmented DO"
            options.append(Relation(edges).closure("augmented DO"))
        per_var.append(options)
    return itertools.product(*per_var)


def check_processor(
    ex: Execution, budget: int = DEFAULT_BUDGET, engine: str = "search", augment_cap: int = DEFAULT_AUGMENT_CAP
) -> Verdict:
    """GPO plus an augmented data order shared by every process."""
    cycle = data_order(ex).find_cycle()
    if cycle:
        return violated_by_cycle(cycle, note="data order is cyclic")
    return _try_augmentations(ex, serial_augmentations(ex), _config(budget, DEFAULT_SO_CAP, engine), augment_cap)


@dataclass
class Classification:
    verdicts: dict  # ModelNode -> Verdict, in LATTICE_NODES order
    maximal: list

    @property
    def satisfied(self) -> list:
        return [n for n, v in self.verdicts.items() if v.satisfied]

    @property
    def unknown(self) -> list:
        return [n for n, v in self.verdicts.items() if v.unknown]


def _check_for_pool(args):
    ex, node, budget, so_cap = args
    return check_node(ex, node, budget=budget, so_cap=so_cap)


def classify(ex: Execution, budget: int = DEFAULT_BUDGET, so_cap: int = DEFAULT_SO_CAP, jobs: int = 1) -> Classification:
    """Check every lattice node and report the strongest satisfied ones."""
    nodes = list(LATTICE_NODES)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_check_for_pool, [(ex, n, budget, so_cap) for n in nodes]))
    else:
        results = [check_node(ex, n, budget=budget, so_cap=so_cap) for n in nodes]
    verdicts = dict(zip(nodes, results))
    sat = [n for n in nodes if verdicts[n].satisfied]
    maximal = [n for n in sat if not any(m != n and compare(m, n) == "stronger" for m in sat)]
    maximal.sort(key=ModelNode.sort_key)
    return Classification(verdicts, maximal)
