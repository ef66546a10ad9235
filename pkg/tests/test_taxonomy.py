"""Task-to-pipeline bindings and the element-set merge helper."""

import importlib.resources

import pytest

from formbridge.core import Artifact, identity_key
from formbridge.planner import CostPolicy, plan
from formbridge.router import TaskKind
from formbridge.taxonomy import (
    ACTIONS,
    MERGE_ELEMENTS,
    PLAN_EXECUTE,
    PLAN_ROUTE,
    REPAIR_TRANSLATE,
    ROUNDTRIP_CHECK,
    SCRIPTED_TRANSLATE,
    VERBALIZE,
    PipelineDescriptor,
    binding_lines,
    bindings_by_kind,
    merge_elements,
    shipped_bindings,
)


def parse_uml(registry, text):
    result = registry.parse(Artifact("uml-mini", text))
    assert not result.diagnostics
    return result.elements


def test_action_constants_cover_catalog():
    names = {
        SCRIPTED_TRANSLATE,
        VERBALIZE,
        ROUNDTRIP_CHECK,
        MERGE_ELEMENTS,
        PLAN_ROUTE,
        PLAN_EXECUTE,
        REPAIR_TRANSLATE,
    }
    assert names == ACTIONS
    assert ACTIONS == frozenset(
        {
            "scripted-translate",
            "verbalize",
            "roundtrip-check",
            "merge-elements",
            "plan-route",
            "plan-execute",
            "repair-translate",
        }
    )


def test_descriptor_rejects_unknown_action():
    with pytest.raises(ValueError, match="unknown pipeline action 'bogus'"):
        PipelineDescriptor("bogus", ("nl",), ("llm-direct",), None, None)


def test_shipped_bindings_cover_every_task_once():
    bindings = shipped_bindings()
    assert [b.task for b in bindings] == list(TaskKind)
    assert all(b.pipeline.action in ACTIONS for b in bindings)
    assert all(b.rationale_note.strip() for b in bindings)


def test_shipped_binding_details():
    by_kind = bindings_by_kind(shipped_bindings())

    draft = by_kind[TaskKind.DRAFT_MODEL_STRUCTURE].pipeline
    assert draft.action == REPAIR_TRANSLATE
    assert draft.route == ("nl", "uml-mini")
    assert draft.translator_kinds == ("llm-direct",)
    assert draft.policy is None
    assert draft.repair.max_attempts == 3

    verify = by_kind[TaskKind.VERIFY_MODEL_LOGIC].pipeline
    assert verify.action == PLAN_EXECUTE
    assert verify.route == ("nl", "fol-p9", "fol-pk")
    assert verify.translator_kinds == ("llm-direct", "rule-based")
    assert verify.policy is CostPolicy.MAX_FIDELITY

    orchestrate = by_kind[TaskKind.ORCHESTRATE_WORKFLOW].pipeline
    assert orchestrate.action == PLAN_ROUTE
    assert orchestrate.route == ()
    assert orchestrate.translator_kinds == ()

    tests = by_kind[TaskKind.GENERATE_TESTS].pipeline
    assert tests.action == ROUNDTRIP_CHECK
    assert tests.route == ("tab-json", "tab-csv")
    assert tests.translator_kinds == ("rule-based",)


def test_shipped_routes_are_plannable(graph):
    nodes = set(graph.nodes)
    for binding in shipped_bindings():
        route = binding.pipeline.route
        assert all(node in nodes for node in route)
        for source, target in zip(route, route[1:]):
            assert plan(graph, source, target, CostPolicy.MAX_FIDELITY).hops


def test_bindings_by_kind_rejects_double_binding():
    bindings = shipped_bindings()
    with pytest.raises(ValueError, match="DraftModelStructure bound twice"):
        bindings_by_kind(bindings + [bindings[0]])


def test_binding_lines_match_packaged_file():
    lines = binding_lines(shipped_bindings())
    assert lines[:3] == [
        "bind DraftModelStructure repair-translate nl->uml-mini",
        "bind AlignOntologies merge-elements er-mini",
        "bind ReconcileSchema scripted-translate tab-json->tab-csv",
    ]
    text = (importlib.resources.files("formbridge") / "data" / "bindings.txt").read_text()
    shipped = [
        line
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    assert shipped == lines


def test_merge_disjoint_sets_is_plain_union(registry):
    a = parse_uml(registry, "class Order { total: real; }")
    b = parse_uml(registry, "class Line { qty: int; }")
    merged, diags = merge_elements(a, b)
    assert merged == a | b
    assert diags == []


def test_merge_with_itself_changes_nothing(registry):
    a = parse_uml(registry, "class Order { total: real; }")
    merged, diags = merge_elements(a, a)
    assert merged == a
    assert diags == []


def test_merge_conflicting_attribute_keeps_both_sides(registry):
    a = parse_uml(registry, "class Order { total: real; }")
    b = parse_uml(registry, "class Order { total: int; }")
    merged, diags = merge_elements(a, b)
    # both candidate definitions stay in the set so a reviewer can pick
    assert len(merged) == 3
    types = {e.type_name for e in merged if getattr(e, "name", None) == "total"}
    assert types == {"int", "real"}
    assert len(diags) == 1
    assert diags[0].code == "merge.conflict"
    assert diags[0].message == "conflicting definitions for attribute Order.total"
    assert diags[0].severity == "error"
    assert diags[0].location is None


def test_merge_reports_conflicts_in_identity_order(registry):
    a = parse_uml(registry, "class B { v: int; } class A { w: real; }")
    b = parse_uml(registry, "class B { v: real; } class A { w: int; }")
    merged, diags = merge_elements(a, b)
    assert [d.message for d in diags] == [
        "conflicting definitions for attribute A.w",
        "conflicting definitions for attribute B.v",
    ]
    keys = [identity_key(e) for e in merged]
    assert len(keys) == len(set(keys)) + 2


def test_merge_conflicting_relation(registry):
    a = parse_uml(registry, "class A { } class B { }\nA -- B : has;")
    b = parse_uml(registry, "class A { } class B { }\nB -- A : has;")
    merged, diags = merge_elements(a, b)
    assert [d.message for d in diags] == ["conflicting definitions for relation has"]
    assert len(merged) == 4
