"""Behavioural compatibility and substitutability analysis for service protocols."""

from .compat import (
    CompatNotion,
    check_compat,
    check_deadlock_free,
    check_unidirectional_complementarity,
    check_unspecified_receptions,
    stable_states,
)
from .equiv import (
    RelationKind,
    RelationWitness,
    behavioural_subtype,
    branching_bisim,
    check_relation,
    simulation_preorder,
    strong_bisim,
    trace_equiv,
    weak_bisim,
)
from .formats import (
    EmptyIfElseError,
    EmptyListenError,
    ParseError,
    StsDocument,
    export_aut,
    parse_sts,
    parse_workflow,
    print_sts,
)
from .model import (
    TAU,
    TICK,
    ComplementDirection,
    Direction,
    Label,
    ReservedNameCollision,
    Sts,
    Transition,
    ValidationError,
    ValidationIssue,
    Verdict,
    annotate_finals,
    build_sts,
    emission,
    has_tau_cycle,
    reception,
    reverse_directions,
    strip_parameters,
    tau_confluence_reduce,
)
from .product import (
    ProductStep,
    StateExplosion,
    StepKind,
    WitnessTrace,
    find_deadlocks,
    product_to_sts,
    replay_witness,
    synchronous_product,
)
from .subst import (
    SubstitutionReport,
    check_subst_by_recompose,
    check_subst_by_relation,
    substitution_report,
)
from .testkit import Fixture, GenConfig, SizeLimit, evaluate, fixture, fixtures, generate_sts
from .workflow import Workflow, translate_workflow

__all__ = [
    "TAU",
    "TICK",
    "CompatNotion",
    "ComplementDirection",
    "Direction",
    "EmptyIfElseError",
    "EmptyListenError",
    "Fixture",
    "GenConfig",
    "Label",
    "ParseError",
    "ProductStep",
    "RelationKind",
    "RelationWitness",
    "ReservedNameCollision",
    "SizeLimit",
    "StateExplosion",
    "StepKind",
    "Sts",
    "StsDocument",
    "SubstitutionReport",
    "Transition",
    "ValidationError",
    "ValidationIssue",
    "Verdict",
    "WitnessTrace",
    "Workflow",
    "annotate_finals",
    "behavioural_subtype",
    "branching_bisim",
    "build_sts",
    "check_compat",
    "check_deadlock_free",
    "check_relation",
    "check_subst_by_recompose",
    "check_subst_by_relation",
    "check_unidirectional_complementarity",
    "check_unspecified_receptions",
    "emission",
    "evaluate",
    "export_aut",
    "find_deadlocks",
    "fixture",
    "fixtures",
    "generate_sts",
    "has_tau_cycle",
    "parse_sts",
    "parse_workflow",
    "print_sts",
    "product_to_sts",
    "reception",
    "replay_witness",
    "reverse_directions",
    "simulation_preorder",
    "stable_states",
    "strip_parameters",
    "strong_bisim",
    "substitution_report",
    "synchronous_product",
    "tau_confluence_reduce",
    "trace_equiv",
    "translate_workflow",
    "weak_bisim",
]
