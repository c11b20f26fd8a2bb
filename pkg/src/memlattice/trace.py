"""Operations, executions and the line-oriented trace format.

A trace line looks like::

    <proc> <kind> <var> <value> [@<sync_var>] [!<prop>(+<prop>)*]

``kind`` is one of w, r, sw, sr, acq, rel and ``_`` stands for the
initial (bottom) value. ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .properties import Property
from .relation import Relation

INITIAL = "ε"
BOTTOM_TEXT = "_"


class Kind(str, Enum):
    WRITE = "w"
    READ = "r"
    SYNC_WRITE = "sw"
    SYNC_READ = "sr"
    ACQUIRE = "acq"
    RELEASE = "rel"

    @property
    def is_read(self) -> bool:
        return self in (Kind.READ, Kind.SYNC_READ, Kind.ACQUIRE)

    @property
    def is_write(self) -> bool:
        return not self.is_read

    @property
    def is_sync(self) -> bool:
        return self not in (Kind.READ, Kind.WRITE)


class TraceError(Exception):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class TraceSyntaxError(TraceError):
    pass


class TraceValidationError(TraceError):
    pass


def format_value(value: Optional[int]) -> str:
    return BOTTOM_TEXT if value is None else str(value)


@dataclass(frozen=True)
class Operation:
    id: int
    kind: Kind
    proc: str
    var: str
    value: Optional[int]
    sync_var: Optional[str] = None
    labels: frozenset = frozenset()
    line: Optional[int] = None

    @property
    def is_initial(self) -> bool:
        return self.proc == INITIAL

    @property
    def is_read(self) -> bool:
        return self.kind.is_read

    @property
    def is_write(self) -> bool:
        return self.kind.is_write

    @property
    def is_sync(self) -> bool:
        return self.kind.is_sync

    @property
    def sync_key(self) -> str:
        """Synchronization variable of a sync op: its tag if given, else its own variable."""
        return self.sync_var or self.var

    def __str__(self) -> str:
        val = "⊥" if self.value is None else str(self.value)
        return f"({self.kind.value},{self.proc},{self.var},{val})"

    def line_text(self) -> str:
        parts = [self.proc, self.kind.value, self.var, format_value(self.value)]
        if self.sync_var:
            parts.append("@" + self.sync_var)
        if self.labels:
            parts.append("!" + "+".join(p.value for p in sorted(self.labels, key=lambda p: p.rank)))
        return " ".join(parts)


@dataclass(frozen=True)
class RawOp:
    proc: str
    kind: Kind
    var: str
    value: Optional[int]
    sync_var: Optional[str] = None
    labels: frozenset = frozenset()
    line: Optional[int] = None


_NAME = r"[A-Za-z_][A-Za-z0-9_.\-]*"
_NAME_RE = re.compile(_NAME + r"\Z")
_INT_RE = re.compile(r"-?[0-9]+\Z")


def parse_trace(text: str) -> list[RawOp]:
    """Parse trace text into raw operations in file order.

    Raises TraceSyntaxError with the line and column of the first problem.
    """
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]
        if not tokens:
            continue
        ops.append(_parse_line(tokens, lineno, len(body.rstrip()) + 1))
    return ops


def _parse_line(tokens, lineno: int, eol: int) -> RawOp:
    def fail(msg, col):
        raise TraceSyntaxError(msg, lineno, col)

    if len(tokens) < 4:
        fail("expected '<proc> <kind> <var> <value>'", eol)
    (proc, pc), (kind_s, kc), (var, vc), (val_s, valc) = tokens[:4]
    if not _NAME_RE.match(proc) or proc == BOTTOM_TEXT:
        fail(f"bad process name {proc!r}", pc)
    try:
        kind = Kind(kind_s)
    except ValueError:
        fail(f"unknown operation kind {kind_s!r} (expected w, r, sw, sr, acq or rel)", kc)
    if not _NAME_RE.match(var):
        fail(f"bad variable name {var!r}", vc)
    if val_s == BOTTOM_TEXT:
        value = None
        if kind.is_write:
            fail("a process may not write the initial value '_'", valc)
    elif _INT_RE.match(val_s):
        value = int(val_s)
    else:
        fail(f"bad value {val_s!r} (expected an integer or '_')", valc)
    sync_var = None
    labels: set[Property] = set()
    seen_sync = seen_labels = False
    for tok, col in tokens[4:]:
        if tok.startswith("@") and not seen_sync and not seen_labels:
            if not _NAME_RE.match(tok[1:]):
                fail(f"bad sync variable {tok!r}", col)
            sync_var = tok[1:]
            seen_sync = True
        elif tok.startswith("!") and not seen_labels:
            for part in tok[1:].split("+"):
                try:
                    labels.add(Property.parse(part))
                except ValueError:
                    fail(f"unknown property {part!r} in label", col)
            seen_labels = True
        else:
            fail(f"unexpected token {tok!r}", col)
    return RawOp(proc, kind, var, value, sync_var, frozenset(labels), lineno)


@dataclass(frozen=True)
class OperationPattern:
    """A pattern such as (w,*,*,*) or (r,p1,x,*).

    ``kind`` is a class: r and w match every read-like or write-like kind,
    or/ow the ordinary ones, sr/sw the synchronizing ones (acquire counts as
    sr, release as sw), s any sync op, and acq/rel match exactly.
    ``None`` in any position is a wildcard.
    """

    kind: Optional[str] = None
    proc: Optional[str] = None
    var: Optional[str] = None

    def matches(self, op: Operation) -> bool:
        if self.proc is not None and op.proc != self.proc:
            return False
        if self.var is not None and op.var != self.var:
            return False
        k = self.kind
        if k is None:
            return True
        if k == "r":
            return op.is_read
        if k == "w":
            return op.is_write
        if k == "or":
            return op.kind is Kind.READ
        if k == "ow":
            return op.kind is Kind.WRITE
        if k == "sr":
            return op.kind in (Kind.SYNC_READ, Kind.ACQUIRE)
        if k == "sw":
            return op.kind in (Kind.SYNC_WRITE, Kind.RELEASE)
        if k == "s":
            return op.is_sync
        return op.kind.value == k

    @classmethod
    def parse(cls, text: str) -> "OperationPattern":
        parts = [p.strip() for p in text.strip().strip("()").split(",")]
        if len(parts) != 4:
            raise ValueError(f"bad pattern {text!r}")
        kind, proc, var, _ = (None if p == "*" else p for p in parts)
        return cls(kind, proc, var)


class Execution:
    """A validated trace: operations with ids, local orders and writes-to.

    Ids 0..V-1 are the initial writes in sorted variable order; the trace
    operations follow in file order.
    """

    def __init__(self, ops: Sequence[Operation], processes: Sequence[str], writes_to: dict[int, int]):
        self.ops = tuple(ops)
        self.processes = tuple(processes)
        self.variables = tuple(sorted({op.var for op in ops}))
        self.writes_to = dict(writes_to)
        self.initial = {op.var: op.id for op in ops if op.is_initial}
        self.local: dict[str, tuple[int, ...]] = {
            p: tuple(op.id for op in ops if op.proc == p) for p in processes
        }
        # derived relations, memoized by the orders module
        self.cache: dict = {}

    def __len__(self) -> int:
        return len(self.ops)

    def __getitem__(self, i: int) -> Operation:
        return self.ops[i]

    @property
    def ids(self) -> range:
        return range(len(self.ops))

    @cached_property
    def write_ids(self) -> frozenset[int]:
        return frozenset(op.id for op in self.ops if op.is_write)

    @cached_property
    def read_ids(self) -> frozenset[int]:
        return frozenset(op.id for op in self.ops if op.is_read)

    @cached_property
    def initial_ids(self) -> frozenset[int]:
        return frozenset(self.initial.values())

    @cached_property
    def sync_ids(self) -> frozenset[int]:
        return frozenset(op.id for op in self.ops if op.is_sync)

    def select(self, patterns: Iterable[OperationPattern]) -> frozenset[int]:
        """Ids matching any pattern, always including the initial writes."""
        pats = list(patterns)
        return frozenset(op.id for op in self.ops if op.is_initial or any(p.matches(op) for p in pats))

    def own_and_writes(self, proc: str) -> frozenset[int]:
        return frozenset(self.local[proc]) | self.write_ids

    @cached_property
    def writes_to_relation(self) -> Relation:
        return Relation({(w, r): "writes-to" for r, w in self.writes_to.items()})

    def describe(self, i: int) -> str:
        return str(self.ops[i])

    def text(self, i: int) -> str:
        return self.ops[i].line_text()


def validate(raw: Sequence[RawOp]) -> Execution:
    """Assign ids, check write uniqueness and resolve writes-to."""
    variables = sorted({op.var for op in raw})
    ops: list[Operation] = [Operation(i, Kind.WRITE, INITIAL, v, None) for i, v in enumerate(variables)]
    processes: list[str] = []
    writer: dict[tuple[str, Optional[int]], int] = {(v, None): i for i, v in enumerate(variables)}
    for r in raw:
        if r.proc not in processes:
            processes.append(r.proc)
        op = Operation(len(ops), r.kind, r.proc, r.var, r.value, r.sync_var, r.labels, r.line)
        if op.is_write:
            key = (op.var, op.value)
            if key in writer:
                first = ops[writer[key]]
                raise TraceValidationError(
                    f"value {op.value} is written to {op.var} twice (first on line {first.line})", r.line
                )
            writer[key] = op.id
        ops.append(op)
    writes_to = {}
    for op in ops:
        if op.is_read:
            src = writer.get((op.var, op.value))
            if src is None:
                raise TraceValidationError(
                    f"read of {op.var}={format_value(op.value)} has no matching write", op.line
                )
            writes_to[op.id] = src
    return Execution(ops, processes, writes_to)


def load(text: str) -> Execution:
    return validate(parse_trace(text))


def derive_writes_to(ex: Execution) -> Relation:
    return ex.writes_to_relation


def render(ex: Execution) -> str:
    lines = [op.line_text() for op in ex.ops if not op.is_initial]
    return "\n".join(lines) + ("\n" if lines else "")


def restrict(ex: Execution, rel: Relation, patterns: Iterable[OperationPattern]) -> Relation:
    return rel.restrict(ex.select(patterns))
