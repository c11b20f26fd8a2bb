"""Binary relations over operation ids.

Every edge carries a short provenance tag ("PO", "DO clause 3", ...) so
that cycles can be explained. When two relations are merged the first tag
seen for an edge wins.
"""
from __future__ import annotations

import heapq
from typing import Iterable, Iterator, Mapping, Optional

Edge = tuple[int, int]


class Relation:
    __slots__ = ("_tags",)

    def __init__(self, edges: Iterable[Edge] | Mapping[Edge, str] = (), tag: str = ""):
        if isinstance(edges, Mapping):
            self._tags: dict[Edge, str] = dict(edges)
        else:
            self._tags = {(a, b): tag for a, b in edges}

    @classmethod
    def chain(cls, order: Iterable[int], tag: str = "") -> "Relation":
        """All pairs (a, b) with a before b in ``order``."""
        seq = list(order)
        return cls({(a, b): tag for i, a in enumerate(seq) for b in seq[i + 1:]})

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self._tags)

    def tag(self, a: int, b: int) -> str:
        return self._tags[(a, b)]

    def tagged(self) -> dict[Edge, str]:
        return dict(self._tags)

    def __contains__(self, edge: object) -> bool:
        return edge in self._tags

    def __len__(self) -> int:
        return len(self._tags)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self._tags))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self._tags.keys() == other._tags.keys()

    def __hash__(self) -> int:
        return hash(frozenset(self._tags))

    def __repr__(self) -> str:
        return f"Relation({sorted(self._tags)})"

    def __or__(self, other: "Relation") -> "Relation":
        return self.union(other)

    def union(self, *others: "Relation") -> "Relation":
        tags = dict(self._tags)
        for other in others:
            for e, t in other._tags.items():
                tags.setdefault(e, t)
        return Relation(tags)

    def intersection(self, other: "Relation") -> "Relation":
        return Relation({e: t for e, t in self._tags.items() if e in other._tags})

    def restrict(self, ids: Iterable[int]) -> "Relation":
        keep = ids if isinstance(ids, (set, frozenset)) else set(ids)
        return Relation({e: t for e, t in self._tags.items() if e[0] in keep and e[1] in keep})

    def filter(self, pred) -> "Relation":
        return Relation({e: t for e, t in self._tags.items() if pred(*e)})

    def nodes(self) -> set[int]:
        out = set()
        for a, b in self._tags:
            out.add(a)
            out.add(b)
        return out

    def successors(self) -> dict[int, list[int]]:
        succ: dict[int, list[int]] = {}
        for a, b in sorted(self._tags):
            succ.setdefault(a, []).append(b)
        return succ

    def closure(self, tag: str = "transitive") -> "Relation":
        succ = self.successors()
        tags = dict(self._tags)
        for start in sorted(succ):
            seen: set[int] = set()
            stack = list(succ[start])
            while stack:
                n = stack.pop()
                if n in seen:
                    continue
                seen.add(n)
                stack.extend(succ.get(n, ()))
            for n in seen:
                tags.setdefault((start, n), tag)
        return Relation(tags)

    def find_cycle(self) -> Optional[list[tuple[int, int, str]]]:
        """Return one cycle as a list of tagged edges, or None if acyclic.

        The search visits nodes and successors in ascending id order, so the
        reported cycle is deterministic. Self-loops are reported only when no
        longer cycle exists, since in a closed relation they just summarize one.
        """
        succ = {a: [b for b in bs if b != a] for a, bs in self.successors().items()}
        color: dict[int, int] = {}
        for root in sorted(succ):
            if color.get(root):
                continue
            path = [root]
            iters = [iter(succ.get(root, ()))]
            color[root] = 1
            while iters:
                nxt = next(iters[-1], None)
                if nxt is None:
                    color[path.pop()] = 2
                    iters.pop()
                    continue
                c = color.get(nxt, 0)
                if c == 1:
                    i = path.index(nxt)
                    loop = path[i:] + [nxt]
                    return [(x, y, self._tags[(x, y)]) for x, y in zip(loop, loop[1:])]
                if c == 0:
                    color[nxt] = 1
                    path.append(nxt)
                    iters.append(iter(succ.get(nxt, ())))
        for a, b in sorted(self._tags):
            if a == b:
                return [(a, a, self._tags[(a, a)])]
        return None

    def is_acyclic(self) -> bool:
        return self.find_cycle() is None

    def topo_sort(self, nodes: Iterable[int] | None = None) -> Optional[list[int]]:
        """Smallest-id-first linear extension, or None when cyclic."""
        universe = set(nodes) if nodes is not None else self.nodes()
        rel = self.restrict(universe)
        indeg = {n: 0 for n in universe}
        succ = rel.successors()
        for _, b in rel._tags:
            indeg[b] += 1
        heap = [n for n, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            n = heapq.heappop(heap)
            out.append(n)
            for m in succ.get(n, ()):
                indeg[m] -= 1
                if indeg[m] == 0:
                    heapq.heappush(heap, m)
        return out if len(out) == len(universe) else None

    def respected_by(self, order: Iterable[int]) -> bool:
        pos = {op: i for i, op in enumerate(order)}
        return all(pos[a] < pos[b] for a, b in self._tags if a in pos and b in pos)


def transitive_closure(rel: Relation, tag: str = "transitive") -> Relation:
    return rel.closure(tag)


def find_cycle(rel: Relation):
    return rel.find_cycle()


def topo_sort(rel: Relation, nodes: Iterable[int] | None = None):
    return rel.topo_sort(nodes)
