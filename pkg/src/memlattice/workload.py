"""Trace generators.

``gen_trace`` simulates a memory system whose behaviour is allowed by the
target model, so every trace it emits satisfies that model:

    sequential  one shared store
    pram        per-process replicas, FIFO channel per sender/receiver pair
    cache       one write log per variable, per-process read cursors
    causal      replicas with causally ordered broadcast (vector clocks)
    slow        replicas, FIFO channel per sender/receiver/variable
    weak        one shared store, some operations marked synchronizing

``random_trace`` draws unconstrained traces for fuzzing and ``mutate_trace``
perturbs read values.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .properties import sort_properties
from .trace import format_value, parse_trace

GEN_MODELS = ("sequential", "pram", "cache", "causal", "slow", "weak")
_VAR_NAMES = "xyzuvst"


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    model: str
    procs: int = 2
    ops: int = 4  # per process
    vars: int = 2
    seed: int = 0
    write_prob: float = 0.5
    sync_prob: float = 0.0


def var_names(n: int) -> list[str]:
    return [_VAR_NAMES[i] if i < len(_VAR_NAMES) else f"v{i}" for i in range(n)]


def proc_names(n: int) -> list[str]:
    return [f"p{i + 1}" for i in range(n)]


def gen_trace(spec: GenSpec) -> str:
    model = spec.model.lower()
    if model not in GEN_MODELS:
        raise GenerationError(f"no generator for {spec.model!r} (choose from {', '.join(GEN_MODELS)})")
    if spec.procs < 1 or spec.ops < 0 or spec.vars < 1:
        raise GenerationError("need at least one process and one variable")
    rng = random.Random(spec.seed)
    procs = proc_names(spec.procs)
    variables = var_names(spec.vars)
    sync_prob = spec.sync_prob if spec.sync_prob else (0.3 if model == "weak" else 0.0)
    remaining = {p: spec.ops for p in procs}
    fresh = {v: 0 for v in variables}
    lines: list[str] = []
    sim = _make_simulator(model, procs, variables, rng)

    while any(remaining.values()):
        if sim.pending() and rng.random() < 0.4:
            sim.deliver()
            continue
        p = rng.choice([q for q in procs if remaining[q]])
        remaining[p] -= 1
        v = rng.choice(variables)
        sync = model == "weak" and rng.random() < sync_prob
        if rng.random() < spec.write_prob:
            fresh[v] += 1
            sim.write(p, v, fresh[v])
            lines.append(f"{p} {'sw' if sync else 'w'} {v} {fresh[v]}")
        else:
            val = sim.read(p, v)
            lines.append(f"{p} {'sr' if sync else 'r'} {v} {format_value(val)}")
    return "\n".join(lines) + ("\n" if lines else "")


def _make_simulator(model, procs, variables, rng):
    if model in ("sequential", "weak"):
        return _SharedStore(variables)
    if model == "pram":
        return _FifoReplicas(procs, variables, rng, per_variable=False)
    if model == "slow":
        return _FifoReplicas(procs, variables, rng, per_variable=True)
    if model == "cache":
        return _WriteLogs(procs, variables, rng)
    return _CausalReplicas(procs, variables, rng)


class _SharedStore:
    def __init__(self, variables):
        self.mem = {v: None for v in variables}

    def pending(self):
        return False

    def deliver(self):
        pass

    def write(self, p, v, val):
        self.mem[v] = val

    def read(self, p, v):
        return self.mem[v]


class _FifoReplicas:
    """Writes apply locally at once and reach other replicas through FIFO
    channels, one per (sender, receiver) or per (sender, receiver, variable)."""

    def __init__(self, procs, variables, rng, per_variable):
        self.procs = procs
        self.rng = rng
        self.per_variable = per_variable
        self.mem = {p: {v: None for v in variables} for p in procs}
        self.channels: dict = {}

    def pending(self):
        return any(self.channels.values())

    def deliver(self):
        key = self.rng.choice(sorted(k for k, q in self.channels.items() if q))
        v, val = self.channels[key].popleft()
        self.mem[key[1]][v] = val

    def write(self, p, v, val):
        self.mem[p][v] = val
        for q in self.procs:
            if q != p:
                key = (p, q, v) if self.per_variable else (p, q, "")
                self.channels.setdefault(key, deque()).append((v, val))

    def read(self, p, v):
        return self.mem[p][v]


class _WriteLogs:
    """Each variable has one global write order; a process's cursor into it
    only moves forward, and its own writes move it to the end."""

    def __init__(self, procs, variables, rng):
        self.rng = rng
        self.logs = {v: [None] for v in variables}
        self.cursor = {(p, v): 0 for p in procs for v in variables}

    def pending(self):
        return any(c < len(self.logs[v]) - 1 for (p, v), c in self.cursor.items())

    def deliver(self):
        key = self.rng.choice(sorted(k for k, c in self.cursor.items() if c < len(self.logs[k[1]]) - 1))
        self.cursor[key] += 1

    def write(self, p, v, val):
        self.logs[v].append(val)
        self.cursor[(p, v)] = len(self.logs[v]) - 1

    def read(self, p, v):
        return self.logs[v][self.cursor[(p, v)]]


class _CausalReplicas:
    """Causal broadcast: a write is applied at a replica only after every
    write that causally precedes it."""

    def __init__(self, procs, variables, rng):
        self.procs = procs
        self.rng = rng
        self.mem = {p: {v: None for v in variables} for p in procs}
        self.clock = {p: {q: 0 for q in procs} for p in procs}
        self.inbox: dict = {p: [] for p in procs}

    def _ready(self, p, msg):
        sender, stamp, _, _ = msg
        mine = self.clock[p]
        if stamp[sender] != mine[sender] + 1:
            return False
        return all(stamp[q] <= mine[q] for q in self.procs if q != sender)

    def _deliverable(self):
        return [(p, i) for p in self.procs for i, m in enumerate(self.inbox[p]) if self._ready(p, m)]

    def pending(self):
        return bool(self._deliverable())

    def deliver(self):
        p, i = self.rng.choice(self._deliverable())
        sender, stamp, v, val = self.inbox[p].pop(i)
        self.mem[p][v] = val
        self.clock[p][sender] += 1

    def write(self, p, v, val):
        self.clock[p][p] += 1
        self.mem[p][v] = val
        stamp = dict(self.clock[p])
        for q in self.procs:
            if q != p:
                self.inbox[q].append((p, stamp, v, val))

    def read(self, p, v):
        return self.mem[p][v]


def random_trace(
    seed: int, procs: int = 2, ops: int = 3, vars: int = 2, write_prob: float = 0.5, sync_prob: float = 0.0
) -> str:
    """An arbitrary valid trace: reads may return any value written to their variable."""
    rng = random.Random(seed)
    variables = var_names(vars)
    program = []
    fresh = {v: 0 for v in variables}
    for p in proc_names(procs):
        for _ in range(ops):
            v = rng.choice(variables)
            sync = rng.random() < sync_prob
            if rng.random() < write_prob:
                fresh[v] += 1
                program.append((p, "sw" if sync else "w", v, fresh[v]))
            else:
                program.append((p, "sr" if sync else "r", v, None))
    lines = []
    for p, kind, v, val in program:
        if kind in ("r", "sr"):
            val = rng.choice([None] + list(range(1, fresh[v] + 1)))
        lines.append(f"{p} {kind} {v} {format_value(val)}")
    return "\n".join(lines) + ("\n" if lines else "")


def _read_alternatives(raw):
    written: dict[str, set] = {}
    for op in raw:
        if op.kind.is_write:
            written.setdefault(op.var, set()).add(op.value)
    out = []
    for op in raw:
        if op.kind.is_read:
            alts = sorted(({None} | written.get(op.var, set())) - {op.value}, key=lambda x: -1 if x is None else x)
            if alts:
                out.append((op, alts))
    return out


def reassign_read(text: str, line: int, value: Optional[int]) -> str:
    """Replace the value token of the operation on ``line`` (1-based)."""
    lines = text.splitlines()
    body, sep, comment = lines[line - 1].partition("#")
    tokens = body.split()
    tokens[3] = format_value(value)
    lines[line - 1] = " ".join(tokens) + (f" {sep}{comment}" if sep else "")
    return "\n".join(lines) + "\n"


def mutate_trace(text: str, seed: int, n: int) -> str:
    """Reassign ``n`` read values at random; each new value is written to the
    same variable somewhere in the trace (or is the initial value)."""
    if n <= 0:
        return text
    rng = random.Random(seed)
    for _ in range(n):
        candidates = _read_alternatives(parse_trace(text))
        if not candidates:
            raise GenerationError("trace has no read that can be reassigned")
        op, alts = rng.choice(candidates)
        text = reassign_read(text, op.line, rng.choice(alts))
    return text


def disjoint_union(texts) -> str:
    """Concatenate traces, renaming processes and variables apart.

    Component k gets a ``_k`` suffix on every name, so no two parts interact.
    """
    out = []
    for k, text in enumerate(texts):
        for op in parse_trace(text):
            suffix = f"_{k}"
            line = f"{op.proc}{suffix} {op.kind.value} {op.var}{suffix} {format_value(op.value)}"
            if op.sync_var:
                line += f" @{op.sync_var}{suffix}"
            if op.labels:
                line += " !" + "+".join(p.value for p in sort_properties(op.labels))
            out.append(line)
    return "\n".join(out) + ("\n" if out else "")
