"""Formalism-transformation graph: route planning and plan execution.

Formalisms are nodes; translators are directed edges carrying fidelity and
latency estimates. ``plan`` picks the best simple path under a cost policy,
``execute_plan`` walks the chosen chain hop by hop, handing LLM hops to the
repair loop and scripted hops to the script synthesizer.

Costs are compared as exact :class:`fractions.Fraction` values derived from
the configured estimates, so plan selection never depends on float rounding.
Maximizing the fidelity product this way selects the same path as a shortest
path under -log(fidelity) edge weights (log is monotone), without the float
ties the log form invites.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .backends import (
    BackendTimeout,
    BackendUnavailable,
    CompletionBackend,
    wrap_artifact_block,
)
from .core import Artifact, FormbridgeError, Registry, Translated
from .repair import (
    BACKEND_ERROR,
    BUDGET_EXHAUSTED,
    VALID,
    RepairBackendError,
    RepairPolicy,
    RepairTrace,
    repair_translate,
)
from .translate import (
    LLM_SCRIPTED,
    RULE_BASED,
    ScriptCache,
    ScriptSynthesisFailed,
    TranslationOutcome,
    TranslatorSpec,
    make_spec,
    synthesize_conversion_script,
    translate_rule_based,
    translate_via_script,
)

__all__ = [
    "CostPolicy",
    "TransformationEdge",
    "Ftg",
    "Plan",
    "NoPath",
    "HopFailed",
    "GraphFormatError",
    "plan_sort_key",
    "plan",
    "enumerate_plans",
    "execute_plan",
    "parse_graph",
    "load_graph",
    "default_graph",
    "NATURAL_LANGUAGE",
]

NATURAL_LANGUAGE = "nl"


class NoPath(FormbridgeError):
    pass


class GraphFormatError(FormbridgeError):
    pass


class HopFailed(FormbridgeError):
    """Execution stopped at hop ``index``; ``traces`` holds one entry per hop
    started so far, the failing hop's trace last."""

    def __init__(self, index: int, traces: list[RepairTrace], message: str):
        self.index = index
        self.traces = traces
        super().__init__(message)

    @property
    def trace(self) -> RepairTrace:
        return self.traces[-1]


class CostPolicy(enum.Enum):
    MAX_FIDELITY = "max-fidelity"
    MIN_LATENCY = "min-latency"
    LEXICOGRAPHIC = "lexicographic"
    PREFER_DETERMINISTIC = "prefer-deterministic"


@dataclass(frozen=True, slots=True)
class TransformationEdge:
    spec: TranslatorSpec

    @property
    def edge_id(self) -> tuple[str, str, str]:
        return (self.spec.source, self.spec.target, self.spec.kind)

    @property
    def fidelity_exact(self) -> Fraction:
        # Fraction(str(x)) reads the shortest decimal repr, so 0.8 becomes
        # exactly 4/5 rather than the nearest binary double.
        return Fraction(str(self.spec.fidelity_est))

    @property
    def latency_exact(self) -> Fraction:
        return Fraction(str(self.spec.latency_est))


class Ftg:
    """Immutable directed multigraph. Parallel edges must differ in
    translator kind; self-loops are rejected (an identity hop is the empty
    plan, not an edge)."""

    def __init__(self, nodes: Iterable[str], edges: Iterable[TransformationEdge]):
        self.nodes = frozenset(nodes)
        self.edges = tuple(sorted(edges, key=lambda e: e.edge_id))
        seen: set[tuple[str, str, str]] = set()
        outgoing: dict[str, list[TransformationEdge]] = {n: [] for n in self.nodes}
        for edge in self.edges:
            source, target, _ = edge.edge_id
            if source == target:
                raise ValueError(f"self-loop edge on {source!r}")
            if source not in self.nodes or target not in self.nodes:
                raise ValueError(f"edge {edge.edge_id} endpoint not a node")
            if edge.edge_id in seen:
                raise ValueError(f"duplicate edge {edge.edge_id}")
            seen.add(edge.edge_id)
            outgoing[source].append(edge)
        self._outgoing = {n: tuple(es) for n, es in outgoing.items()}

    def out_edges(self, node: str) -> tuple[TransformationEdge, ...]:
        return self._outgoing.get(node, ())


@dataclass(frozen=True, slots=True)
class Plan:
    """A chain of edges from ``source``. Empty hops means source = target."""

    hops: tuple[TransformationEdge, ...]
    source: str

    def __post_init__(self) -> None:
        at = self.source
        for hop in self.hops:
            if hop.spec.source != at:
                raise ValueError(
                    f"hop {hop.edge_id} does not chain from {at!r}")
            at = hop.spec.target

    @property
    def target(self) -> str:
        return self.hops[-1].spec.target if self.hops else self.source

    @property
    def fidelity_exact(self) -> Fraction:
        total = Fraction(1)
        for hop in self.hops:
            total *= hop.fidelity_exact
        return total

    @property
    def latency_exact(self) -> Fraction:
        return sum((hop.latency_exact for hop in self.hops), Fraction(0))

    @property
    def predicted_fidelity(self) -> float:
        return float(self.fidelity_exact)

    @property
    def predicted_latency(self) -> float:
        return float(self.latency_exact)

    @property
    def edge_ids(self) -> tuple[tuple[str, str, str], ...]:
        return tuple(hop.edge_id for hop in self.hops)

    def describe(self) -> str:
        return " -> ".join([self.source] + [h.spec.target for h in self.hops])


def _nondeterministic_hops(hops: Sequence[TransformationEdge]) -> int:
    return sum(1 for hop in hops if not hop.spec.deterministic)


def _key_of(policy: CostPolicy, fidelity: Fraction, latency: Fraction,
            nondet: int, edge_ids: tuple) -> tuple:
    if policy is CostPolicy.MAX_FIDELITY:
        return (-fidelity, edge_ids)
    if policy is CostPolicy.MIN_LATENCY:
        return (latency, edge_ids)
    if policy is CostPolicy.LEXICOGRAPHIC:
        return (-fidelity, latency, edge_ids)
    if policy is CostPolicy.PREFER_DETERMINISTIC:
        return (nondet, -fidelity, latency, edge_ids)
    raise ValueError(f"unknown policy {policy!r}")


def plan_sort_key(p: Plan, policy: CostPolicy) -> tuple:
    """Total order over candidate plans; the policy optimum is the minimum.

    Every component grows (or holds) when a hop is appended, and the final
    edge-id component makes the order total, so ties never depend on
    insertion order.
    """
    return _key_of(policy, p.fidelity_exact, p.latency_exact,
                   _nondeterministic_hops(p.hops), p.edge_ids)


def plan(g: Ftg, source: str, target: str, policy: CostPolicy) -> Plan:
    """Select the policy-optimal simple path from source to target.

    Best-first search over partial simple paths. Appending an edge strictly
    increases a path's sort key (fidelity factors are <= 1, latencies are
    >= 0, and the edge-id tuple always extends), so the first path popped at
    the target is optimal. States that reach the same (node, visited set)
    with a worse key are pruned: both paths have the same continuations and
    key comparison survives appending a common suffix.
    """
    if source not in g.nodes:
        raise NoPath(f"source node {source!r} not in graph")
    if target not in g.nodes:
        raise NoPath(f"target node {target!r} not in graph")
    if source == target:
        return Plan((), source)
    start_key = _key_of(policy, Fraction(1), Fraction(0), 0, ())
    counter = 0
    heap: list[tuple] = [(start_key, counter, source, frozenset({source}), ())]
    popped: set[tuple[str, frozenset]] = set()
    while heap:
        _, _, node, visited, hops = heapq.heappop(heap)
        if node == target:
            return Plan(hops, source)
        state = (node, visited)
        if state in popped:
            continue
        popped.add(state)
        for edge in g.out_edges(node):
            nxt = edge.spec.target
            if nxt in visited:
                continue
            new_hops = hops + (edge,)
            new_key = _key_of(
                policy,
                _prod(new_hops),
                _lat(new_hops),
                _nondeterministic_hops(new_hops),
                tuple(h.edge_id for h in new_hops),
            )
            counter += 1
            heapq.heappush(
                heap, (new_key, counter, nxt, visited | {nxt}, new_hops))
    raise NoPath(f"no path from {source!r} to {target!r}")


def _prod(hops: Sequence[TransformationEdge]) -> Fraction:
    total = Fraction(1)
    for hop in hops:
        total *= hop.fidelity_exact
    return total


def _lat(hops: Sequence[TransformationEdge]) -> Fraction:
    return sum((hop.latency_exact for hop in hops), Fraction(0))


def enumerate_plans(g: Ftg, source: str, target: str, max_hops: int) -> list[Plan]:
    """Every simple path from source to target with at most max_hops edges.

    Exhaustive depth-first oracle for ``plan``; fine for the small graphs it
    is meant to check.
    """
    if max_hops < 0:
        raise ValueError("max_hops must be non-negative")
    if source not in g.nodes or target not in g.nodes:
        return []
    plans: list[Plan] = []

    def walk(node: str, visited: frozenset, hops: tuple) -> None:
        if node == target:
            plans.append(Plan(hops, source))
            return
        if len(hops) == max_hops:
            return
        for edge in g.out_edges(node):
            nxt = edge.spec.target
            if nxt in visited:
                continue
            walk(nxt, visited | {nxt}, hops + (edge,))

    walk(source, frozenset({source}), ())
    return plans


# ---------------------------------------------------------------------------
# Plan execution
# ---------------------------------------------------------------------------


_FREE_TEXT_HINT = "free-form natural language; no grammar is enforced"


def _verbalization_prompt(a: Artifact, target: str) -> str:
    return (f"Translate the artifact below from {a.formalism} to {target}.\n"
            f"Target grammar: {_FREE_TEXT_HINT}\n"
            f"{wrap_artifact_block(a.formalism, target, a.content)}\n"
            f"Reply with only the {target} text.")


def _single_shot_trace(outcome: TranslationOutcome) -> RepairTrace:
    status = VALID if outcome.ok else BUDGET_EXHAUSTED
    return RepairTrace([(outcome.artifact.content, list(outcome.diagnostics))],
                       status)


def execute_plan(a: Artifact, p: Plan, backend: CompletionBackend,
                 policy: RepairPolicy, registry: Registry, *,
                 params: float = 0.0, seed: int = 0,
                 script_cache: ScriptCache | None = None,
                 script_budget: int = 3,
                 ) -> tuple[TranslationOutcome, list[RepairTrace]]:
    """Run the plan hop by hop, collecting one RepairTrace per hop.

    Rule-based and scripted hops are deterministic single attempts;
    llm-direct hops run a full repair session. A hop whose target is not a
    registered formalism (natural-language verbalization) is a single
    completion with no validation. Execution halts at the first failing hop
    with :class:`HopFailed` carrying every trace gathered so far.
    """
    if a.formalism != p.source:
        raise ValueError(f"artifact is {a.formalism}, plan starts at {p.source}")
    if not p.hops:
        diagnostics = registry.validate(a) if a.formalism in registry else []
        spec = make_spec(a.formalism, a.formalism, RULE_BASED)
        return TranslationOutcome(a, diagnostics, 1, spec), []

    traces: list[RepairTrace] = []
    current = a
    total_attempts = 0
    outcome: TranslationOutcome | None = None
    for index, edge in enumerate(p.hops):
        spec = edge.spec
        try:
            outcome, trace = _run_hop(current, spec, backend, policy, registry,
                                      params=params, seed=seed,
                                      script_cache=script_cache,
                                      script_budget=script_budget)
        except RepairBackendError as exc:
            traces.append(exc.trace)
            raise HopFailed(index, traces,
                            f"hop {index} {spec.source}->{spec.target}: "
                            f"{exc}") from exc
        except (BackendUnavailable, BackendTimeout) as exc:
            traces.append(RepairTrace([], BACKEND_ERROR))
            raise HopFailed(index, traces,
                            f"hop {index} {spec.source}->{spec.target}: "
                            f"{exc}") from exc
        except ScriptSynthesisFailed as exc:
            traces.append(RepairTrace([], BUDGET_EXHAUSTED))
            raise HopFailed(index, traces,
                            f"hop {index} {spec.source}->{spec.target}: "
                            f"{exc}") from exc
        traces.append(trace)
        total_attempts += outcome.attempts
        if not outcome.ok:
            raise HopFailed(index, traces,
                            f"hop {index} {spec.source}->{spec.target} "
                            f"failed validation")
        current = outcome.artifact
    final = Artifact(current.formalism, current.content,
                     Translated(p.describe(), total_attempts))
    return (TranslationOutcome(final, outcome.diagnostics, total_attempts,
                               p.hops[-1].spec),
            traces)


def _run_hop(current: Artifact, spec: TranslatorSpec,
             backend: CompletionBackend, policy: RepairPolicy,
             registry: Registry, *, params: float, seed: int,
             script_cache: ScriptCache | None,
             script_budget: int) -> tuple[TranslationOutcome, RepairTrace]:
    if spec.kind == RULE_BASED:
        outcome = translate_rule_based(current, spec, registry)
        return outcome, _single_shot_trace(outcome)
    if spec.kind == LLM_SCRIPTED:
        script = synthesize_conversion_script(
            spec.source, spec.target, backend, registry, cache=script_cache,
            budget=script_budget, params=params, seed=seed)
        outcome = translate_via_script(current, script, registry)
        return outcome, _single_shot_trace(outcome)
    if spec.target in registry:
        return repair_translate(current, spec.target, backend, policy,
                                registry, params=params, seed=seed)
    # Verbalization hop: the target is plain text, so there is nothing to
    # validate and no repair loop to run.
    content = backend.complete(_verbalization_prompt(current, spec.target),
                               params, seed)
    artifact = Artifact(spec.target, content,
                        Translated(f"{spec.source}->{spec.target} {spec.kind} "
                                   f"via {backend.name}", 1))
    outcome = TranslationOutcome(artifact, [], 1, spec)
    return outcome, RepairTrace([(content, [])], VALID)


# ---------------------------------------------------------------------------
# Graph configuration files
# ---------------------------------------------------------------------------


def parse_graph(text: str) -> Ftg:
    """Graph file: one ``edge <source> <target> <kind> fid=<float>
    lat=<float>`` record per line, optional ``mode=<strict|annotated>``,
    ``#`` comments. Nodes are the set of edge endpoints."""
    edges: list[TransformationEdge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] != "edge":
            raise GraphFormatError(f"line {lineno}: expected 'edge', got "
                                   f"{tokens[0]!r}")
        if len(tokens) < 4:
            raise GraphFormatError(f"line {lineno}: expected "
                                   "'edge <source> <target> <kind> ...'")
        source, target, kind = tokens[1], tokens[2], tokens[3]
        fid: float | None = None
        lat: float | None = None
        mode = "strict"
        for token in tokens[4:]:
            key, _, value = token.partition("=")
            try:
                if key == "fid":
                    fid = float(value)
                elif key == "lat":
                    lat = float(value)
                elif key == "mode":
                    mode = value
                else:
                    raise GraphFormatError(
                        f"line {lineno}: unknown field {key!r}")
            except ValueError:
                raise GraphFormatError(
                    f"line {lineno}: bad number in {token!r}") from None
        if fid is None or lat is None:
            raise GraphFormatError(f"line {lineno}: fid= and lat= are required")
        try:
            spec = make_spec(source, target, kind, mode=mode,
                             fidelity_est=fid, latency_est=lat)
        except ValueError as exc:
            raise GraphFormatError(f"line {lineno}: {exc}") from None
        edges.append(TransformationEdge(spec))
    nodes = {e.spec.source for e in edges} | {e.spec.target for e in edges}
    try:
        return Ftg(nodes, edges)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def load_graph(path: str | Path) -> Ftg:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def default_graph() -> Ftg:
    """The shipped graph: the six built-in formalisms plus ``nl``."""
    text = resources.files("formbridge").joinpath("data/default.ftg") \
        .read_text(encoding="utf-8")
    return parse_graph(text)
