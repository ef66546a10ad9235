"""Serving-cost simulation: full-model swapping versus a shared backbone
with per-task adapters.

The simulator charges load time and resident memory only; no queueing, no
token-level latency. A request's wait is whatever load it triggered (zero
on a cache hit). Both cache flavors evict least-recently-used. Every load
appends an event record, and the report can be reproduced from the event
log alone, so the accounting is auditable.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

from .core import FormbridgeError
from .router import AdapterSpec, TaskKind

__all__ = [
    "BackendModelSpec",
    "FullSwap",
    "SharedBackbone",
    "ServingPolicy",
    "LoadEvent",
    "CostReport",
    "UnknownTaskInTrace",
    "simulate",
    "compare",
    "replay",
    "policy_name",
    "parse_trace",
    "load_trace",
    "DEFAULT_MODEL",
]


@dataclass(frozen=True, slots=True)
class BackendModelSpec:
    load_ms: float = 10000.0
    mem_mb: float = 16000.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.load_ms) and self.load_ms > 0):
            raise ValueError("load_ms must be finite and positive")
        if not (math.isfinite(self.mem_mb) and self.mem_mb > 0):
            raise ValueError("mem_mb must be finite and positive")


DEFAULT_MODEL = BackendModelSpec()


@dataclass(frozen=True, slots=True)
class FullSwap:
    """One full model instance per task kind, at most ``cache_capacity``
    resident at once. The default keeps a single slot: serve task A, then
    unload it to serve task B."""

    cache_capacity: int = 1

    def __post_init__(self) -> None:
        if self.cache_capacity < 1:
            raise ValueError("cache_capacity must be at least 1")


@dataclass(frozen=True, slots=True)
class SharedBackbone:
    """One backbone loaded once, plus an LRU cache of task adapters. The
    default capacity of 8 holds a typical working set without pretending
    memory is free."""

    adapter_cache_capacity: int = 8

    def __post_init__(self) -> None:
        if self.adapter_cache_capacity < 1:
            raise ValueError("adapter_cache_capacity must be at least 1")


ServingPolicy = Union[FullSwap, SharedBackbone]


class UnknownTaskInTrace(FormbridgeError):
    pass


@dataclass(frozen=True, slots=True)
class LoadEvent:
    request_index: int
    item: str
    load_ms: float
    mem_mb: float
    evicted: tuple[str, ...]
    resident_mem_mb: float


@dataclass(frozen=True, slots=True)
class CostReport:
    policy: str
    total_load_ms: float
    peak_mem_mb: float
    swap_count: int
    per_request_wait_ms: tuple[float, ...]
    events: tuple[LoadEvent, ...]

    def record_lines(self) -> list[str]:
        waits = self.per_request_wait_ms
        mean_wait = sum(waits) / len(waits) if waits else 0.0
        return [
            f"policy={self.policy}",
            f"requests={len(waits)}",
            f"total_load_ms={self.total_load_ms:g}",
            f"peak_mem_mb={self.peak_mem_mb:g}",
            f"swap_count={self.swap_count}",
            f"mean_wait_ms={mean_wait:g}",
        ]


def policy_name(policy: ServingPolicy) -> str:
    if isinstance(policy, FullSwap):
        return f"full-swap({policy.cache_capacity})"
    return f"shared-backbone({policy.adapter_cache_capacity})"


def _adapter_table(adapters: Sequence[AdapterSpec]) -> dict[TaskKind, AdapterSpec]:
    table: dict[TaskKind, AdapterSpec] = {}
    for adapter in sorted(adapters, key=lambda a: a.name):
        table.setdefault(adapter.task, adapter)
    return table


def simulate(trace: Sequence[TaskKind], policy: ServingPolicy,
             model: BackendModelSpec = DEFAULT_MODEL,
             adapters: Sequence[AdapterSpec] = ()) -> CostReport:
    """Replay the trace against one serving policy.

    FullSwap charges a whole model load per cache miss. SharedBackbone
    charges the backbone once, at the first request, then one adapter load
    per adapter miss. ``swap_count`` is the number of load events.
    """
    if not trace:
        raise ValueError("trace must be nonempty")
    table = _adapter_table(adapters)
    for kind in trace:
        if kind not in table:
            raise UnknownTaskInTrace(f"no adapter for {kind.value}")
    events: list[LoadEvent] = []
    waits: list[float] = []
    peak = 0.0

    def emit(index: int, item: str, load_ms: float, mem_mb: float,
             evicted: tuple[str, ...], resident: float) -> float:
        nonlocal peak
        events.append(LoadEvent(index, item, load_ms, mem_mb, evicted, resident))
        peak = max(peak, resident)
        return load_ms

    if isinstance(policy, FullSwap):
        cache: OrderedDict[TaskKind, None] = OrderedDict()
        for index, kind in enumerate(trace):
            if kind in cache:
                cache.move_to_end(kind)
                waits.append(0.0)
                continue
            evicted: tuple[str, ...] = ()
            if len(cache) == policy.cache_capacity:
                out, _ = cache.popitem(last=False)
                evicted = (f"model:{out.value}",)
            cache[kind] = None
            resident = len(cache) * model.mem_mb
            waits.append(emit(index, f"model:{kind.value}", model.load_ms,
                              model.mem_mb, evicted, resident))
    else:
        backbone_loaded = False
        cache_a: OrderedDict[TaskKind, AdapterSpec] = OrderedDict()

        def resident_mem() -> float:
            base = model.mem_mb if backbone_loaded else 0.0
            return base + sum(a.mem_mb for a in cache_a.values())

        for index, kind in enumerate(trace):
            wait = 0.0
            if not backbone_loaded:
                backbone_loaded = True
                wait += emit(index, "backbone", model.load_ms, model.mem_mb,
                             (), resident_mem())
            if kind in cache_a:
                cache_a.move_to_end(kind)
            else:
                adapter = table[kind]
                evicted = ()
                if len(cache_a) == policy.adapter_cache_capacity:
                    out_kind, out_adapter = cache_a.popitem(last=False)
                    evicted = (f"adapter:{out_kind.value}/{out_adapter.name}",)
                cache_a[kind] = adapter
                wait += emit(index, f"adapter:{kind.value}/{adapter.name}",
                             adapter.load_cost_ms, adapter.mem_mb, evicted,
                             resident_mem())
            waits.append(wait)
    return CostReport(
        policy_name(policy),
        total_load_ms=sum(e.load_ms for e in events),
        peak_mem_mb=peak,
        swap_count=len(events),
        per_request_wait_ms=tuple(waits),
        events=tuple(events),
    )


def replay(events: Sequence[LoadEvent]) -> tuple[float, float, int]:
    """Recompute (total_load_ms, peak_mem_mb, swap_count) from the event
    log alone; must agree with the report the log came from."""
    total = sum(e.load_ms for e in events)
    peak = max((e.resident_mem_mb for e in events), default=0.0)
    return total, peak, len(events)


def compare(trace: Sequence[TaskKind], policies: Sequence[ServingPolicy],
            model: BackendModelSpec = DEFAULT_MODEL,
            adapters: Sequence[AdapterSpec] = ()) -> list[CostReport]:
    if len(policies) < 2:
        raise ValueError("compare needs at least 2 policies")
    return [simulate(trace, policy, model, adapters) for policy in policies]


def parse_trace(text: str) -> list[TaskKind]:
    """Trace file: one TaskKind token per line, ``#`` comments allowed."""
    trace: list[TaskKind] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if len(line.split()) != 1:
            raise UnknownTaskInTrace(
                f"line {lineno}: expected one task kind, got {line!r}")
        try:
            trace.append(TaskKind(line))
        except ValueError:
            raise UnknownTaskInTrace(
                f"line {lineno}: unknown task kind {line!r}") from None
    return trace


def load_trace(path: str | Path) -> list[TaskKind]:
    return parse_trace(Path(path).read_text(encoding="utf-8"))
