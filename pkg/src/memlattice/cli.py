"""Command-line front end.

Exit codes: 0 satisfied or success, 1 violated, 2 unknown (budget ran out),
64 usage error, 65 invalid trace.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .lattice import (
    CLASSICAL,
    LATTICE_NODES,
    ModelNode,
    check_classical,
    check_intersection,
    check_node,
    classify,
    compare,
    glb,
    implied,
    lub,
    parse_model,
)
from .orders import DEFAULT_SO_CAP, anti_order_fixed, data_order, process_order, serial_pairs, write_read_write_order
from .properties import sort_properties
from .trace import Execution, TraceError, load
from .transitions import LabelingError, check_synchronized, drf_check, normalize_kind
from .verdict import Status, Verdict
from .views import DEFAULT_BUDGET, OracleRangeError
from .workload import GEN_MODELS, GenerationError, GenSpec, gen_trace, mutate_trace

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_INVALID = 65

_EXIT = {Status.SATISFIED: EXIT_OK, Status.VIOLATED: EXIT_VIOLATED, Status.UNKNOWN: EXIT_UNKNOWN}
_INTERSECTION = ("intersection", "gpo&gdo", "pram&cache")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_trace(path: str) -> Execution:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return load(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def _operations(ex: Execution) -> list:
    return [{"id": op.id, "op": str(op)} for op in ex.ops]


def _format_cycle(ex: Execution, verdict: Verdict, explain: bool) -> list[str]:
    ce = verdict.counterexample
    lines = []
    if ce is None:
        return lines
    if ce.note:
        lines.append(f"note: {ce.note}")
    if ce.cycle:
        if explain:
            lines.append("cycle:")
            for st in ce.cycle:
                lines.append(f"  {ex.describe(st.src)} -> {ex.describe(st.dst)}  [{st.why}]")
        else:
            path = [ex.describe(st.src) for st in ce.cycle] + [ex.describe(ce.cycle[0].src)]
            lines.append("cycle: " + " -> ".join(path))
    if ce.exhausted and verdict.violated:
        lines.append("search exhausted every candidate")
    return lines


def _format_witness(ex: Execution, verdict: Verdict) -> list[str]:
    lines = []
    for label, order in (verdict.witness or {}).items():
        lines.append(f"view {label}:")
        lines.extend(f"  {ex.text(i)}" for i in order if not ex.ops[i].is_initial)
    so = verdict.detail.get("serial_order")
    if so:
        lines.append("serial order:")
        lines.extend(f"  {ex.describe(a)} -> {ex.describe(b)}" for a, b in so)
    sync = verdict.detail.get("sync_order")
    if sync:
        lines.append("synchronization order:")
        lines.extend(f"  {ex.text(i)}" for i in sync)
    return lines


def _run_check(ex: Execution, args) -> tuple[str, Verdict]:
    name = args.model.strip().lower()
    engine = "oracle" if args.oracle else "search"
    kind = _sync_kind(name)
    if args.variant and kind is None:
        raise UsageError("--variant applies only to synchronized models")
    if kind is not None:
        return kind, check_synchronized(ex, kind, args.variant or "revised", args.budget, args.so_cap, engine)
    if name in _INTERSECTION:
        return "GPO∩GDO", check_intersection(ex, args.budget, engine)
    if args.classical:
        if name not in CLASSICAL:
            raise UsageError(f"--classical needs one of {', '.join(CLASSICAL)}")
        return name.upper(), check_classical(ex, name, args.budget, engine)
    try:
        node = parse_model(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return node.display, check_node(ex, node, budget=args.budget, so_cap=args.so_cap, engine=engine)


def _sync_kind(name: str) -> Optional[str]:
    try:
        return normalize_kind(name)
    except ValueError:
        return None


def cmd_check(args, out) -> int:
    ex = _read_trace(args.trace)
    label, verdict = _run_check(ex, args)
    if args.json:
        out.write(_dump({"model": label, "operations": _operations(ex), "verdict": verdict.to_dict()}) + "\n")
        return _EXIT[verdict.status]
    out.write(f"{label}: {verdict.status.value}\n")
    if not verdict.satisfied:
        for line in _format_cycle(ex, verdict, args.explain):
            out.write(line + "\n")
    elif args.witness:
        for line in _format_witness(ex, verdict):
            out.write(line + "\n")
    return _EXIT[verdict.status]


def cmd_classify(args, out) -> int:
    ex = _read_trace(args.trace)
    result = classify(ex, budget=args.budget, so_cap=args.so_cap, jobs=args.jobs)
    names = [n.display for n in result.maximal]
    code = EXIT_UNKNOWN if result.unknown else EXIT_OK
    if args.json:
        payload = {
            "maximal": names,
            "unknown": [n.display for n in result.unknown],
            "nodes": [{"model": n.display, "verdict": v.to_dict()} for n, v in result.verdicts.items()],
        }
        out.write(_dump(payload) + "\n")
        return code
    out.write(f"maximal: {', '.join(names) if names else '(none)'}\n")
    if result.unknown:
        out.write(f"unknown: {', '.join(n.display for n in result.unknown)}\n")
    width = max(len(n.display) for n in LATTICE_NODES)
    for node, verdict in result.verdicts.items():
        mark = " *" if node in result.maximal else ""
        out.write(f"  {node.display:<{width}}  {verdict.status.value}{mark}\n")
    return code


def _node(name: str) -> ModelNode:
    try:
        node = parse_model(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if node.augmented:
        raise UsageError("processor consistency is not a lattice node")
    return node


def _describe_node(node: ModelNode) -> dict:
    weaker = [m for m in LATTICE_NODES if m != node and compare(node, m) == "stronger"]
    covers = [m for m in weaker if not any(compare(k, m) == "stronger" for k in weaker)]
    stronger = [m for m in LATTICE_NODES if m != node and compare(m, node) == "stronger"]
    covered_by = [m for m in stronger if not any(compare(m, k) == "stronger" for k in stronger)]
    return {
        "model": node.display,
        "properties": [p.value for p in sort_properties(node.properties)],
        "implied": [p.value for p in sort_properties(implied(node.properties))],
        "covers": [m.display for m in covers],
        "covered_by": [m.display for m in covered_by],
    }


def cmd_lattice(args, out) -> int:
    op = args.op
    if op == "show":
        if len(args.models) > 1:
            raise UsageError("show takes at most one model")
        nodes = [_node(args.models[0])] if args.models else list(LATTICE_NODES)
        info = [_describe_node(n) for n in nodes]
        if args.json:
            out.write(_dump(info if not args.models else info[0]) + "\n")
            return EXIT_OK
        for d in info:
            below = ", ".join(d["covers"]) or "(bottom)"
            out.write(f"{d['model']}: {'+'.join(d['implied']) or '∅'} -> {below}\n")
        return EXIT_OK
    if len(args.models) != 2:
        raise UsageError(f"{op} takes two models")
    a, b = (_node(m) for m in args.models)
    if op == "compare":
        rel = compare(a, b)
        text = {
            "stronger": "stronger than",
            "weaker": "weaker than",
            "equal": "equal to",
            "incomparable": "incomparable with",
        }[rel]
        if args.json:
            out.write(_dump({"a": a.label, "b": b.label, "relation": rel}) + "\n")
        else:
            out.write(f"{a.label} {text} {b.label}\n")
        return EXIT_OK
    result = lub(a, b) if op == "lub" else glb(a, b)
    if args.json:
        out.write(_dump({"op": op, "a": a.display, "b": b.display, "result": result.display}) + "\n")
    else:
        out.write(result.display + "\n")
    return EXIT_OK


def cmd_drf(args, out) -> int:
    ex = _read_trace(args.trace)
    result = drf_check(ex, budget=args.budget, so_cap=args.so_cap)
    code = {"vacuous": EXIT_OK, "witnessed": EXIT_OK, "violation": EXIT_VIOLATED, "unknown": EXIT_UNKNOWN}[result.status]
    if args.json:
        payload = {
            "status": result.status,
            "weak": result.weak.to_dict(),
            "sequential": None if result.sequential is None else result.sequential.to_dict(),
        }
        out.write(_dump(payload) + "\n")
        return code
    out.write(f"{result.status}\n")
    out.write(f"  weak: {result.weak.status.value}\n")
    if result.sequential is not None:
        out.write(f"  sequential: {result.sequential.status.value}\n")
        if args.explain and result.sequential.violated:
            for line in _format_cycle(ex, result.sequential, True):
                out.write("  " + line + "\n")
    return code


def cmd_gen(args, out) -> int:
    spec = GenSpec(args.model, args.procs, args.ops, args.vars, args.seed, args.write_prob, args.sync_prob)
    try:
        text = gen_trace(spec)
        if args.mutate:
            text = mutate_trace(text, args.seed, args.mutate)
    except GenerationError as exc:
        raise UsageError(str(exc)) from None
    out.write(text)
    return EXIT_OK


_RELATIONS = {
    "po": process_order,
    "do": data_order,
    "wo": write_read_write_order,
    "ao": anti_order_fixed,
}


def cmd_explain(args, out) -> int:
    ex = _read_trace(args.trace)
    wanted = ["writes-to", "po", "do", "wo", "ao", "so"] if args.relation == "all" else [args.relation]
    payload: dict = {"operations": _operations(ex)}
    lines = ["operations:"] + [f"  {op.id:>3}  {op}" for op in ex.ops]
    for name in wanted:
        if name == "so":
            pairs = [
                {"write": p.write, "read": p.read, "source": p.source, "forced": p.forced} for p in serial_pairs(ex)
            ]
            payload["so"] = pairs
            lines.append("serial-order pairs:")
            for p in pairs:
                flag = "  (write-first forced)" if p["forced"] else ""
                lines.append(f"  {ex.describe(p['write'])} / {ex.describe(p['read'])}{flag}")
            continue
        rel = ex.writes_to_relation if name == "writes-to" else _RELATIONS[name](ex)
        edges = sorted(rel.tagged().items())
        payload[name] = [[a, b, tag] for (a, b), tag in edges]
        title = "anti order (serial-order independent part)" if name == "ao" else name
        lines.append(f"{title}:")
        lines.extend(f"  {ex.describe(a)} -> {ex.describe(b)}  [{tag}]" for (a, b), tag in edges)
    if args.json:
        out.write(_dump(payload) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memlattice", description="Decide which consistency models an execution trace satisfies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def search_flags(p):
        p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET, help="node budget per view search")
        p.add_argument("--so-cap", type=_positive, default=DEFAULT_SO_CAP, help="max free serial-order decisions")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("check", help="check one model")
    p.add_argument("model", help="lattice node (e.g. sequential, gpo+gdo), processor, intersection, or a synchronized model")
    p.add_argument("trace", help="trace file, or - for stdin")
    p.add_argument("--witness", action="store_true", help="print the views when satisfied")
    p.add_argument("--explain", action="store_true", help="print each counterexample edge with its origin")
    p.add_argument("--variant", choices=("original", "revised"), help="synchronized models only")
    p.add_argument("--oracle", action="store_true", help="use brute-force view enumeration (small traces)")
    p.add_argument("--classical", action="store_true", help="use the textbook formulation of a named model")
    search_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", help="strongest lattice nodes a trace satisfies")
    p.add_argument("trace")
    p.add_argument("--jobs", type=_positive, default=1, help="worker processes")
    search_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("lattice", help="lattice algebra")
    p.add_argument("op", choices=("lub", "glb", "compare", "show"))
    p.add_argument("models", nargs="*")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("drf", help="does weak acceptance imply sequential acceptance on this trace")
    p.add_argument("trace")
    p.add_argument("--explain", action="store_true")
    search_flags(p)
    p.set_defaults(func=cmd_drf)

    p = sub.add_parser("gen", help="generate a trace allowed by a model")
    p.add_argument("--model", required=True, choices=GEN_MODELS)
    p.add_argument("--procs", type=_positive, default=2)
    p.add_argument("--ops", type=int, default=4, help="operations per process")
    p.add_argument("--vars", type=_positive, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--write-prob", type=float, default=0.5)
    p.add_argument("--sync-prob", type=float, default=0.0)
    p.add_argument("--mutate", type=int, default=0, help="reassign this many read values afterwards")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("explain", help="print the derived relations of a trace")
    p.add_argument("trace")
    p.add_argument("--relation", choices=("all", "writes-to", "po", "do", "wo", "ao", "so"), default="all")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"memlattice: {exc}\n")
        return EXIT_USAGE
    except OracleRangeError as exc:
        sys.stderr.write(f"memlattice: {exc}\n")
        return EXIT_USAGE
    except TraceError as exc:
        where = args.trace if getattr(args, "trace", None) not in (None, "-") else "<stdin>"
        sys.stderr.write(f"{where}: {exc}\n")
        return EXIT_INVALID
    except LabelingError as exc:
        sys.stderr.write(f"memlattice: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
