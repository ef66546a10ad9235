"""Translation trust metrics: semantic diffs, round-trip distortion, and
translator benchmarks.

Distortion is the Jaccard distance between canonical element sets: bounded,
order-insensitive, and checkable by hand. Discrepant elements are further
partitioned into missing, fabricated, and mutated (same identity key on both
sides, different payload), because the *kind* of error a translator makes
matters as much as how often it errs.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .backends import CompletionBackend
from .core import (
    Artifact,
    Element,
    ElementSet,
    Registry,
    element_sort_key,
    identity_key,
)
from .planner import HopFailed, Plan, TransformationEdge, execute_plan
from .repair import RepairPolicy
from .translate import RULE_BASED, ScriptCache, TranslatorSpec, make_spec

__all__ = [
    "ErrorClass",
    "FidelityReport",
    "semantic_diff",
    "roundtrip",
    "BenchmarkRow",
    "benchmark",
]


class ErrorClass(enum.Enum):
    MISSING = "missing"
    FABRICATED = "fabricated"
    MUTATED = "mutated"
    SYNTAX_INVALID = "syntax-invalid"


@dataclass(frozen=True, slots=True)
class FidelityReport:
    """Outcome of comparing a source element set against a result set.

    ``distortion`` is 1 - |intersection| / |union| (0 for two empty sets).
    ``missing`` elements were in the source only, ``fabricated`` in the
    result only, and ``mutated`` pairs share an identity key but differ in
    payload; the three views partition the symmetric difference, so no
    element is counted twice.
    """

    distortion: float
    missing: tuple[Element, ...]
    fabricated: tuple[Element, ...]
    mutated: tuple[tuple[Element, Element], ...]
    syntactic_valid: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.distortion <= 1.0:
            raise ValueError("distortion must lie in [0, 1]")

    @property
    def clean(self) -> bool:
        return self.syntactic_valid and self.distortion == 0.0

    def class_counts(self) -> dict[ErrorClass, int]:
        return {
            ErrorClass.MISSING: len(self.missing),
            ErrorClass.FABRICATED: len(self.fabricated),
            ErrorClass.MUTATED: len(self.mutated),
            ErrorClass.SYNTAX_INVALID: 0 if self.syntactic_valid else 1,
        }


def semantic_diff(a: ElementSet, b: ElementSet,
                  syntactic_valid: bool = True) -> FidelityReport:
    """Compare two element sets. Symmetric: swapping the arguments swaps
    missing with fabricated and reverses each mutated pair."""
    union = a | b
    inter = a & b
    if union:
        distortion = float(Fraction(len(union) - len(inter), len(union)))
    else:
        distortion = 0.0
    only_a = a - b
    only_b = b - a
    by_key_a: dict[tuple, list[Element]] = defaultdict(list)
    by_key_b: dict[tuple, list[Element]] = defaultdict(list)
    for el in only_a:
        by_key_a[identity_key(el)].append(el)
    for el in only_b:
        by_key_b[identity_key(el)].append(el)
    mutated: list[tuple[Element, Element]] = []
    missing: list[Element] = []
    fabricated: list[Element] = []
    for key in sorted(set(by_key_a) | set(by_key_b)):
        xs = sorted(by_key_a.get(key, ()), key=element_sort_key)
        ys = sorted(by_key_b.get(key, ()), key=element_sort_key)
        paired = min(len(xs), len(ys))
        mutated.extend(zip(xs[:paired], ys[:paired]))
        missing.extend(xs[paired:])
        fabricated.extend(ys[paired:])
    return FidelityReport(
        distortion,
        tuple(sorted(missing, key=element_sort_key)),
        tuple(sorted(fabricated, key=element_sort_key)),
        tuple(mutated),
        syntactic_valid,
    )


def _measure(a: Artifact, forward: Plan, backward: Plan,
             backend: CompletionBackend, policy: RepairPolicy,
             registry: Registry, *, params: float, seed: int,
             script_cache: ScriptCache | None) -> tuple[FidelityReport, int]:
    if forward.source != a.formalism:
        raise ValueError(f"forward plan starts at {forward.source}, "
                         f"artifact is {a.formalism}")
    if backward.source != forward.target:
        raise ValueError("backward plan does not start where forward ends")
    if backward.target != a.formalism:
        raise ValueError(f"backward plan ends at {backward.target}, "
                         f"expected {a.formalism}")
    parsed = registry.parse(a)
    if not parsed.ok:
        raise ValueError("source artifact does not parse; nothing to measure")
    original = parsed.elements
    try:
        outward, _ = execute_plan(a, forward, backend, policy, registry,
                                  params=params, seed=seed,
                                  script_cache=script_cache)
        homeward, _ = execute_plan(outward.artifact, backward, backend,
                                   policy, registry, params=params, seed=seed,
                                   script_cache=script_cache)
    except HopFailed as exc:
        exc.partial_report = semantic_diff(original, frozenset(),
                                           syntactic_valid=False)
        raise
    attempts = outward.attempts + homeward.attempts
    final = registry.parse(homeward.artifact)
    if not final.ok:
        return semantic_diff(original, frozenset(),
                             syntactic_valid=False), attempts
    return semantic_diff(original, final.elements), attempts


def roundtrip(a: Artifact, forward: Plan, backward: Plan,
              backend: CompletionBackend, policy: RepairPolicy,
              registry: Registry, *, params: float = 0.0, seed: int = 0,
              script_cache: ScriptCache | None = None) -> FidelityReport:
    """Run the artifact out along ``forward`` and home along ``backward``,
    then diff the original elements against what came back.

    If the returned artifact no longer parses, the report compares against
    the empty set (everything is missing) with ``syntactic_valid`` False.
    If a hop fails outright, the HopFailed exception is re-raised with a
    ``partial_report`` attribute diffing the original against the empty set.
    """
    report, _ = _measure(a, forward, backward, backend, policy, registry,
                         params=params, seed=seed, script_cache=script_cache)
    return report


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class BenchmarkRow:
    variant: str
    mean_distortion: float
    mean_attempts: float
    histogram: dict[ErrorClass, int]
    runs: int

    def record_line(self) -> str:
        h = self.histogram
        return (f"variant={self.variant} "
                f"mean_distortion={self.mean_distortion:.6f} "
                f"missing={h[ErrorClass.MISSING]} "
                f"fabricated={h[ErrorClass.FABRICATED]} "
                f"mutated={h[ErrorClass.MUTATED]} "
                f"syntax_invalid={h[ErrorClass.SYNTAX_INVALID]}")


def _variant_names(variants: Sequence[TranslatorSpec]) -> list[str]:
    names = []
    for spec in variants:
        name = spec.kind if spec.mode == "strict" else f"{spec.kind}+{spec.mode}"
        names.append(name)
    seen: dict[str, int] = {}
    out = []
    for name in names:
        seen[name] = seen.get(name, 0) + 1
        out.append(name if names.count(name) == 1 else f"{name}#{seen[name]}")
    return out


def benchmark(corpus: Sequence[Artifact], variants: Sequence[TranslatorSpec],
              backend: CompletionBackend, policy: RepairPolicy,
              registry: Registry, *, seeds: Iterable[int] = (0,),
              params: float = 0.0,
              script_cache: ScriptCache | None = None) -> list[BenchmarkRow]:
    """Round-trip every corpus fixture through every variant and aggregate.

    Each variant translates forward; the way home is always the rule-based
    reverse translator, so differences between rows are attributable to the
    forward leg. The per-run seed is a pure function of (seed, fixture
    index), so results do not depend on execution order.
    """
    if not corpus:
        raise ValueError("corpus must be nonempty")
    if not variants:
        raise ValueError("variants must be nonempty")
    pairs = {(v.source, v.target) for v in variants}
    if len(pairs) != 1:
        raise ValueError("variants must share one source/target pair")
    (source, target), = pairs
    for i, a in enumerate(corpus):
        if a.formalism != source:
            raise ValueError(f"corpus[{i}] is {a.formalism}, expected {source}")
    back = Plan((TransformationEdge(make_spec(target, source, RULE_BASED)),),
                target)
    seed_list = list(seeds)
    rows: list[BenchmarkRow] = []
    for name, spec in zip(_variant_names(variants), variants):
        forward = Plan((TransformationEdge(spec),), source)
        histogram = {cls: 0 for cls in ErrorClass}
        total_distortion = 0.0
        total_attempts = 0
        runs = 0
        for seed in seed_list:
            for index, fixture in enumerate(corpus):
                run_seed = seed * 1_000_003 + index
                report, attempts = _measure(
                    fixture, forward, back, backend, policy, registry,
                    params=params, seed=run_seed, script_cache=script_cache)
                for cls, count in report.class_counts().items():
                    histogram[cls] += count
                total_distortion += report.distortion
                total_attempts += attempts
                runs += 1
        rows.append(BenchmarkRow(name, total_distortion / runs,
                                 total_attempts / runs, histogram, runs))
    return rows
