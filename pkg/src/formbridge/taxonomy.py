"""Shipped task-to-pipeline bindings and the schema merge stub.

Each task kind is bound to exactly one pipeline descriptor: which action to
run, over which formalism route, with which planning and repair settings.
The bindings are static configuration; executors read them through
``router.dispatch``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import Diagnostic, ElementSet, error, identity_key
from .planner import CostPolicy
from .repair import RepairPolicy
from .router import TaskKind
from .translate import LLM_DIRECT, LLM_SCRIPTED, RULE_BASED

__all__ = [
    "PLAN_EXECUTE",
    "REPAIR_TRANSLATE",
    "SCRIPTED_TRANSLATE",
    "VERBALIZE",
    "MERGE_ELEMENTS",
    "ROUNDTRIP_CHECK",
    "PLAN_ROUTE",
    "PipelineDescriptor",
    "PipelineBinding",
    "shipped_bindings",
    "bindings_by_kind",
    "binding_lines",
    "merge_elements",
]

PLAN_EXECUTE = "plan-execute"
REPAIR_TRANSLATE = "repair-translate"
SCRIPTED_TRANSLATE = "scripted-translate"
VERBALIZE = "verbalize"
MERGE_ELEMENTS = "merge-elements"
ROUNDTRIP_CHECK = "roundtrip-check"
PLAN_ROUTE = "plan-route"

ACTIONS = frozenset({
    PLAN_EXECUTE, REPAIR_TRANSLATE, SCRIPTED_TRANSLATE, VERBALIZE,
    MERGE_ELEMENTS, ROUNDTRIP_CHECK, PLAN_ROUTE,
})


@dataclass(frozen=True, slots=True)
class PipelineDescriptor:
    """What to run for one task kind: an action over a formalism route."""

    action: str
    route: tuple[str, ...] = ()
    translator_kinds: tuple[str, ...] = ()
    policy: CostPolicy | None = None
    repair: RepairPolicy = field(default_factory=RepairPolicy)

    def __post_init__(self) -> None:
        if self.action not in ACTIONS:
            raise ValueError(f"unknown pipeline action {self.action!r}")


@dataclass(frozen=True, slots=True)
class PipelineBinding:
    task: TaskKind
    pipeline: PipelineDescriptor
    rationale_note: str


def shipped_bindings() -> list[PipelineBinding]:
    """One binding per task kind; routes name only default-graph nodes."""
    b = PipelineBinding
    d = PipelineDescriptor
    return [
        b(TaskKind.DRAFT_MODEL_STRUCTURE,
          d(REPAIR_TRANSLATE, ("nl", "uml-mini"), (LLM_DIRECT,)),
          "Drafts a first-cut class structure from a prose description; the "
          "repair loop regenerates until the sketch parses."),
        b(TaskKind.ALIGN_ONTOLOGIES,
          d(MERGE_ELEMENTS, ("er-mini",)),
          "Merges two entity schemas into one, surfacing conflicting "
          "definitions as diagnostics instead of silently picking a side."),
        b(TaskKind.RECONCILE_SCHEMA,
          d(SCRIPTED_TRANSLATE, ("tab-json", "tab-csv"), (LLM_SCRIPTED,)),
          "Reconciles record layouts by synthesizing a conversion script "
          "once, then replaying it deterministically."),
        b(TaskKind.VERIFY_MODEL_LOGIC,
          d(PLAN_EXECUTE, ("nl", "fol-p9", "fol-pk"),
            (LLM_DIRECT, RULE_BASED), CostPolicy.MAX_FIDELITY),
          "Routes informal claims into prover-ready rules through the richer "
          "logic syntax first; the direct hop loses more."),
        b(TaskKind.SPECIFY_PROCESS_MODEL,
          d(REPAIR_TRANSLATE, ("nl", "er-mini"), (LLM_DIRECT,)),
          "Turns a process description into entities and relationships that "
          "downstream tooling can validate."),
        b(TaskKind.FORMALIZE_RULES,
          d(PLAN_EXECUTE, ("nl", "fol-pk"),
            (LLM_DIRECT, RULE_BASED), CostPolicy.MAX_FIDELITY),
          "Converts informal business constraints into executable rule "
          "syntax, letting the planner pick the highest-fidelity chain."),
        b(TaskKind.DOCUMENT_MODEL,
          d(VERBALIZE, ("uml-mini", "nl"), (LLM_DIRECT,)),
          "Verbalizes a formal model into prose for stakeholders; free-text "
          "output, so no validator gate applies."),
        b(TaskKind.ORCHESTRATE_WORKFLOW,
          d(PLAN_ROUTE, (), ()),
          "Sequences multi-step conversions by planning over the "
          "transformation graph on demand."),
        b(TaskKind.GENERATE_SIMULATION_CODE,
          d(REPAIR_TRANSLATE, ("nl", "tab-json"), (LLM_DIRECT,)),
          "Emits machine-readable run configuration from a scenario "
          "description, the structured stand-in for code generation."),
        b(TaskKind.TRANSLATE_CODE,
          d(SCRIPTED_TRANSLATE, ("tab-csv", "tab-json"), (LLM_SCRIPTED,)),
          "Ports data between serialization dialects with a certified "
          "script, the same shape as source-to-source porting."),
        b(TaskKind.GENERATE_TESTS,
          d(ROUNDTRIP_CHECK, ("tab-json", "tab-csv"), (RULE_BASED,)),
          "Exercises a translator pair by round-tripping fixtures and "
          "reporting any distortion as failures."),
        b(TaskKind.GENERATE_DOCUMENTATION,
          d(VERBALIZE, ("er-mini", "nl"), (LLM_DIRECT,)),
          "Summarizes schema definitions as prose reference documentation."),
        b(TaskKind.ANALYZE_REQUIREMENTS,
          d(REPAIR_TRANSLATE, ("nl", "fol-p9"), (LLM_DIRECT,)),
          "Extracts checkable obligations from requirements text into "
          "quantified rules."),
    ]


def bindings_by_kind(
        bindings: list[PipelineBinding] | None = None,
) -> dict[TaskKind, PipelineBinding]:
    table: dict[TaskKind, PipelineBinding] = {}
    for binding in shipped_bindings() if bindings is None else bindings:
        if binding.task in table:
            raise ValueError(f"{binding.task.value} bound twice")
        table[binding.task] = binding
    return table


def binding_lines(bindings: list[PipelineBinding] | None = None) -> list[str]:
    """Compact one-line-per-binding view, mirrored in the shipped fixture."""
    lines = []
    for binding in shipped_bindings() if bindings is None else bindings:
        route = "->".join(binding.pipeline.route) or "-"
        lines.append(f"bind {binding.task.value} {binding.pipeline.action} "
                     f"{route}")
    return lines


def merge_elements(a: ElementSet, b: ElementSet,
                   ) -> tuple[ElementSet, list[Diagnostic]]:
    """Union two element sets, reporting identity-key conflicts.

    A conflict is two elements, one per side, that share an identity key but
    differ in payload (say, the same attribute declared with two types).
    Both versions stay in the merged set; the diagnostics are the signal
    that a human or a richer pipeline must resolve the clash.
    """
    merged = a | b
    diagnostics: list[Diagnostic] = []
    keys_a = {identity_key(el): el for el in a}
    for el in sorted(b - a, key=identity_key):
        other = keys_a.get(identity_key(el))
        if other is not None and other != el:
            kind, owner, name = identity_key(el)
            where = f"{owner}.{name}" if owner else name
            diagnostics.append(error(
                "merge.conflict",
                f"conflicting definitions for {kind} {where}"))
    return merged, diagnostics
