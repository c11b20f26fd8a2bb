"""Three-valued results of consistency checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class Status(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Step:
    src: int
    dst: int
    why: str


@dataclass(frozen=True)
class Counterexample:
    """Why a check failed.

    ``cycle`` is a cycle in the relation a view would have to respect.
    ``exhausted`` means the search tried every candidate; when both are set,
    the cycle refutes the first branch of a search over several branches.
    """

    cycle: Optional[tuple[Step, ...]] = None
    exhausted: bool = False
    note: str = ""


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Optional[dict[str, tuple[int, ...]]] = None
    counterexample: Optional[Counterexample] = None
    budget_spent: int = 0
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def satisfied(self) -> bool:
        return self.status is Status.SATISFIED

    @property
    def violated(self) -> bool:
        return self.status is Status.VIOLATED

    @property
    def unknown(self) -> bool:
        return self.status is Status.UNKNOWN

    def to_dict(self) -> dict:
        out: dict = {"status": self.status.value, "budget_spent": self.budget_spent}
        out["witness"] = None if self.witness is None else {k: list(v) for k, v in self.witness.items()}
        if self.counterexample is None:
            out["counterexample"] = None
        else:
            ce = self.counterexample
            out["counterexample"] = {
                "cycle": None if ce.cycle is None else [[s.src, s.dst, s.why] for s in ce.cycle],
                "exhausted": ce.exhausted,
                "note": ce.note,
            }
        out["detail"] = _plain(self.detail)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Verdict":
        witness = data.get("witness")
        ce = data.get("counterexample")
        counter = None
        if ce is not None:
            cycle = ce.get("cycle")
            counter = Counterexample(
                None if cycle is None else tuple(Step(a, b, why) for a, b, why in cycle),
                bool(ce.get("exhausted", False)),
                ce.get("note", ""),
            )
        return cls(
            Status(data["status"]),
            None if witness is None else {k: tuple(v) for k, v in witness.items()},
            counter,
            int(data.get("budget_spent", 0)),
            dict(data.get("detail") or {}),
        )


def _plain(value):
    """Tuples become lists so the detail survives a JSON round trip unchanged."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def satisfied(witness=None, spent: int = 0, **detail) -> Verdict:
    return Verdict(Status.SATISFIED, witness or {}, None, spent, detail)


def violated_by_cycle(cycle, spent: int = 0, note: str = "") -> Verdict:
    steps = tuple(Step(a, b, why) for a, b, why in cycle)
    return Verdict(Status.VIOLATED, None, Counterexample(steps, False, note), spent)


def violated_exhausted(note: str = "", spent: int = 0, cycle=None) -> Verdict:
    steps = None if cycle is None else tuple(Step(a, b, why) for a, b, why in cycle)
    return Verdict(Status.VIOLATED, None, Counterexample(steps, True, note), spent)


def unknown(note: str, spent: int = 0) -> Verdict:
    return Verdict(Status.UNKNOWN, None, Counterexample(None, False, note), spent)


def relabel(v: Verdict, label: str) -> Verdict:
    """Rename the single anonymous view of a query verdict."""
    if v.witness is None:
        return v
    return Verdict(v.status, {label: order for order in v.witness.values()}, v.counterexample, v.budget_spent, v.detail)


def all_of(labelled: list[tuple[str, Verdict]]) -> Verdict:
    """Conjunction of per-view verdicts; the first violation decides."""
    spent = sum(v.budget_spent for _, v in labelled)
    for label, v in labelled:
        if v.violated:
            ce = v.counterexample
            note = f"no view for {label}" + (f": {ce.note}" if ce and ce.note else "")
            return Verdict(Status.VIOLATED, None, Counterexample(ce.cycle if ce else None, ce.exhausted if ce else True, note), spent)
    for label, v in labelled:
        if v.unknown:
            note = v.counterexample.note if v.counterexample else ""
            return unknown(f"{label}: {note}", spent)
    witness: dict[str, tuple[int, ...]] = {}
    for label, v in labelled:
        for k, order in (v.witness or {}).items():
            witness[k if k != "view" else label] = order
    return Verdict(Status.SATISFIED, witness, None, spent)
