"""Incremental Datalog evaluation driven by formula derivatives."""
from .boolean_delta import (
    BooleanDelta,
    Ordering,
    apply_delta,
    compose_delta,
    delta_leq,
    delta_sup,
    minus_bot,
    minus_top,
)
from .derivative import FormulaDerivative, delta, derive, derive_program, nabla, next_value
from .engine import (
    MaintenanceResult,
    Solution,
    SolverConfig,
    apply_changes,
    edb_relations,
    immediate_consequence,
    maintain,
    naive_lfp,
    seminaive_lfp,
    solution_equal,
    solve,
)
from .errors import DeltalogError
from .program import Program, parse_program
from .relations import ActiveDomain, Relation, Schema
from .semantics import Interpretation, evaluate, evaluate_reference

__version__ = "0.1.0"

__all__ = [
    "ActiveDomain",
    "apply_changes",
    "apply_delta",
    "BooleanDelta",
    "compose_delta",
    "delta",
    "delta_leq",
    "delta_sup",
    "DeltalogError",
    "derive",
    "derive_program",
    "edb_relations",
    "evaluate",
    "evaluate_reference",
    "FormulaDerivative",
    "immediate_consequence",
    "Interpretation",
    "maintain",
    "MaintenanceResult",
    "minus_bot",
    "minus_top",
    "nabla",
    "naive_lfp",
    "next_value",
    "Ordering",
    "parse_program",
    "Program",
    "Relation",
    "Schema",
    "seminaive_lfp",
    "Solution",
    "solution_equal",
    "solve",
    "SolverConfig",
]
