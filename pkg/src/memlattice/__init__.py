"""Decide which shared-memory consistency models an execution trace satisfies."""
from .lattice import (
    CAUSAL,
    CACHE,
    LATTICE_NODES,
    LOCAL,
    PRAM,
    PROCESSOR,
    SEQUENTIAL,
    SLOW,
    ModelNode,
    check_classical,
    check_intersection,
    check_node,
    check_processor,
    classify,
    compare,
    glb,
    lub,
    parse_model,
)
from .properties import Property
from .relation import Relation
from .trace import Execution, Operation, TraceError, load, parse_trace
from .transitions import Labeling, check_generalized, check_synchronized, drf_check
from .verdict import Status, Verdict
from .views import ViewQuery, brute_force_oracle, exists_serial_view
from .workload import GenSpec, gen_trace, mutate_trace

__all__ = [
    "CACHE", "CAUSAL", "LATTICE_NODES", "LOCAL", "PRAM", "PROCESSOR", "SEQUENTIAL", "SLOW",
    "Execution", "GenSpec", "Labeling", "ModelNode", "Operation", "Property", "Relation", "Status",
    "TraceError", "Verdict", "ViewQuery", "brute_force_oracle", "check_classical", "check_generalized",
    "check_intersection", "check_node", "check_processor", "check_synchronized", "classify", "compare",
    "drf_check", "exists_serial_view", "gen_trace", "glb", "load", "lub", "mutate_trace", "parse_model",
    "parse_trace",
]
