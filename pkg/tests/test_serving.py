import random

import pytest

from formbridge.router import AdapterSpec
from formbridge.serving import (
    DEFAULT_MODEL,
    BackendModelSpec,
    FullSwap,
    SharedBackbone,
    UnknownTaskInTrace,
    compare,
    load_trace,
    parse_trace,
    policy_name,
    replay,
    simulate,
)
from formbridge.taxonomy import TaskKind

D = TaskKind.DRAFT_MODEL_STRUCTURE
A = TaskKind.ALIGN_ONTOLOGIES
G = TaskKind.GENERATE_TESTS

ADAPTERS = [AdapterSpec(k, k.value.lower(), load_cost_ms=50, mem_mb=100)
            for k in TaskKind]


def test_parameter_validation():
    with pytest.raises(ValueError, match="cache_capacity must be at least 1"):
        FullSwap(0)
    with pytest.raises(ValueError, match="adapter_cache_capacity must be at least 1"):
        SharedBackbone(0)
    with pytest.raises(ValueError, match="load_ms must be finite and positive"):
        BackendModelSpec(0, 5)
    with pytest.raises(ValueError, match="trace must be nonempty"):
        simulate([], FullSwap(1), adapters=ADAPTERS)
    with pytest.raises(ValueError, match="at least 2 policies"):
        compare([G], [FullSwap(1)], adapters=ADAPTERS)


def test_policy_names():
    assert policy_name(FullSwap(2)) == "full-swap(2)"
    assert policy_name(SharedBackbone(8)) == "shared-backbone(8)"


def test_full_swap_reloads_the_whole_model_on_every_switch():
    report = simulate([D, A, D, A], FullSwap(1), adapters=ADAPTERS)
    assert report.policy == "full-swap(1)"
    assert report.total_load_ms == 40000.0
    assert report.peak_mem_mb == 16000.0
    assert report.swap_count == 4
    assert report.per_request_wait_ms == (10000.0,) * 4
    assert [e.item for e in report.events] == [
        "model:DraftModelStructure", "model:AlignOntologies",
        "model:DraftModelStructure", "model:AlignOntologies"]
    assert report.events[1].evicted == ("model:DraftModelStructure",)


def test_shared_backbone_loads_the_model_once_and_swaps_adapters():
    report = simulate([D, A, D, A], SharedBackbone(8), adapters=ADAPTERS)
    assert report.policy == "shared-backbone(8)"
    assert report.total_load_ms == 10100.0
    assert report.peak_mem_mb == 16200.0
    assert report.swap_count == 3  # backbone + two adapter loads
    assert report.per_request_wait_ms == (10050.0, 50.0, 0.0, 0.0)
    assert [e.item for e in report.events] == [
        "backbone",
        "adapter:DraftModelStructure/draftmodelstructure",
        "adapter:AlignOntologies/alignontologies"]
    assert report.events[0].resident_mem_mb == 16000.0
    assert report.events[2].resident_mem_mb == 16200.0


def test_full_swap_cache_is_lru():
    report = simulate([G, A, G, D], FullSwap(2), adapters=ADAPTERS)
    # G hits on request 2, refreshing it; D then evicts A
    assert report.per_request_wait_ms == (10000.0, 10000.0, 0.0, 10000.0)
    assert [(e.item, e.evicted) for e in report.events] == [
        ("model:GenerateTests", ()),
        ("model:AlignOntologies", ()),
        ("model:DraftModelStructure", ("model:AlignOntologies",))]


def test_shared_backbone_evicts_adapters_at_capacity():
    report = simulate([G, A, G], SharedBackbone(1), adapters=ADAPTERS)
    assert report.per_request_wait_ms == (10050.0, 50.0, 50.0)
    assert report.total_load_ms == 10150.0
    assert report.swap_count == 4
    evictions = [e.evicted for e in report.events if e.evicted]
    assert evictions == [("adapter:GenerateTests/generatetests",),
                         ("adapter:AlignOntologies/alignontologies",)]


def test_adapter_profiles_resolve_name_sorted_per_kind():
    doubled = [AdapterSpec(G, "zeta", load_cost_ms=500, mem_mb=100),
               AdapterSpec(G, "alpha", load_cost_ms=50, mem_mb=100)]
    report = simulate([G], SharedBackbone(4), adapters=doubled)
    assert report.total_load_ms == 10050.0
    assert report.events[1].item == "adapter:GenerateTests/alpha"


def test_missing_adapter_rejected_under_both_policies():
    for policy in (FullSwap(1), SharedBackbone(4)):
        with pytest.raises(UnknownTaskInTrace, match="no adapter for GenerateTests"):
            simulate([G], policy, adapters=[])


def test_replay_reconstructs_totals_from_the_event_log():
    rng = random.Random(7)
    kinds = list(TaskKind)
    for _ in range(20):
        trace = [rng.choice(kinds) for _ in range(rng.randint(1, 30))]
        for policy in (FullSwap(rng.randint(1, 3)), SharedBackbone(rng.randint(1, 4))):
            report = simulate(trace, policy, adapters=ADAPTERS)
            assert replay(report.events) == (
                report.total_load_ms, report.peak_mem_mb, report.swap_count)
            assert len(report.per_request_wait_ms) == len(trace)
            assert sum(report.per_request_wait_ms) == report.total_load_ms


def test_larger_caches_never_cost_more():
    rng = random.Random(11)
    kinds = list(TaskKind)[:5]
    for _ in range(10):
        trace = [rng.choice(kinds) for _ in range(25)]
        full = [simulate(trace, FullSwap(c), adapters=ADAPTERS).total_load_ms
                for c in (1, 2, 4)]
        shared = [simulate(trace, SharedBackbone(c), adapters=ADAPTERS).total_load_ms
                  for c in (1, 2, 4)]
        assert full == sorted(full, reverse=True)
        assert shared == sorted(shared, reverse=True)


def test_compare_runs_each_policy_on_the_same_trace():
    reports = compare([D, A, D, A], [FullSwap(1), SharedBackbone(8)], adapters=ADAPTERS)
    assert [r.policy for r in reports] == ["full-swap(1)", "shared-backbone(8)"]
    assert reports[0].total_load_ms == 40000.0
    assert reports[1].total_load_ms == 10100.0


def test_parse_trace():
    assert parse_trace("# c\nGenerateTests\nAlignOntologies\n") == [G, A]
    with pytest.raises(UnknownTaskInTrace, match="line 1: unknown task kind 'NotAKind'"):
        parse_trace("NotAKind\n")
    with pytest.raises(UnknownTaskInTrace, match="expected one task kind"):
        parse_trace("GenerateTests extra\n")


def test_load_trace_reads_the_packaged_walkthrough():
    import importlib.resources as res

    path = res.files("formbridge") / "data" / "t1t2.trace"
    assert load_trace(str(path)) == [D, A, D, A]


def test_default_model_spec():
    assert DEFAULT_MODEL == BackendModelSpec(load_ms=10000.0, mem_mb=16000.0)
