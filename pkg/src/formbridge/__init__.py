"""formbridge: plan, execute, repair, and audit translations between
modeling formalisms.

The pieces compose in one direction: ``core`` defines artifacts, elements,
and the formalism registry; ``planner`` finds multi-hop translation plans
over a transformation graph and executes them; ``repair`` wraps single hops
in a validate-and-feedback loop; ``fidelity`` measures round-trip
distortion; ``router`` classifies free-text requests onto task kinds;
``serving`` prices adapter-loading policies; ``reporting`` renders tables,
records, and figures; ``cli`` ties it all to a command line.
"""
from __future__ import annotations

from .core import (
    Artifact,
    Authored,
    Diagnostic,
    Element,
    ElementSet,
    FormbridgeError,
    Registry,
    Translated,
)
from .fidelity import FidelityReport, benchmark, roundtrip, semantic_diff
from .formalisms import builtin_registry
from .planner import (
    CostPolicy,
    Ftg,
    Plan,
    default_graph,
    execute_plan,
    plan,
)
from .repair import RepairPolicy, RepairTrace, repair_translate
from .router import RoutingDecision, classify_task, dispatch
from .serving import CostReport, FullSwap, SharedBackbone, simulate
from .translate import TranslationOutcome, TranslatorSpec, make_spec

__version__ = "0.1.0"

__all__ = [
    "Artifact",
    "Authored",
    "CostPolicy",
    "CostReport",
    "Diagnostic",
    "Element",
    "ElementSet",
    "FidelityReport",
    "FormbridgeError",
    "Ftg",
    "FullSwap",
    "Plan",
    "Registry",
    "RepairPolicy",
    "RepairTrace",
    "RoutingDecision",
    "SharedBackbone",
    "Translated",
    "TranslationOutcome",
    "TranslatorSpec",
    "benchmark",
    "builtin_registry",
    "classify_task",
    "default_graph",
    "dispatch",
    "execute_plan",
    "make_spec",
    "plan",
    "repair_translate",
    "roundtrip",
    "semantic_diff",
    "simulate",
    "__version__",
]
