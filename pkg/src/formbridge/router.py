"""Task routing: classify a natural-language request into a task kind and
pick the adapter profile that should serve it.

Classification is transparent weighted keyword scoring, not a model call:
the router is the part of the stack that must stay auditable, and a
deterministic scorer can be inspected, versioned, and tested against a
fixed corpus. Adapters here are cost and prompt profiles on a shared
backbone, which is all the serving simulator and dispatcher need.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .core import FormbridgeError

__all__ = [
    "TaskKind",
    "AdapterSpec",
    "Lexicon",
    "RoutingDecision",
    "PipelineInvocation",
    "EmptyRequest",
    "AmbiguousTask",
    "NoPipelineForKind",
    "NoAdapterForKind",
    "RouterConfigError",
    "classify_task",
    "dispatch",
    "parse_lexicon",
    "load_lexicon",
    "parse_adapters",
    "load_adapters",
    "parse_corpus",
    "load_corpus",
]


class TaskKind(enum.Enum):
    """Closed catalog of modeling-and-simulation task kinds. Definition
    order is the deterministic tie-break order for classification."""

    DRAFT_MODEL_STRUCTURE = "DraftModelStructure"
    ALIGN_ONTOLOGIES = "AlignOntologies"
    RECONCILE_SCHEMA = "ReconcileSchema"
    VERIFY_MODEL_LOGIC = "VerifyModelLogic"
    SPECIFY_PROCESS_MODEL = "SpecifyProcessModel"
    FORMALIZE_RULES = "FormalizeRules"
    DOCUMENT_MODEL = "DocumentModel"
    ORCHESTRATE_WORKFLOW = "OrchestrateWorkflow"
    GENERATE_SIMULATION_CODE = "GenerateSimulationCode"
    TRANSLATE_CODE = "TranslateCode"
    GENERATE_TESTS = "GenerateTests"
    GENERATE_DOCUMENTATION = "GenerateDocumentation"
    ANALYZE_REQUIREMENTS = "AnalyzeRequirements"


_KIND_ORDER = {kind: i for i, kind in enumerate(TaskKind)}


def kind_from_token(token: str) -> TaskKind:
    try:
        return TaskKind(token)
    except ValueError:
        raise RouterConfigError(f"unknown task kind {token!r}") from None


class EmptyRequest(FormbridgeError):
    pass


class AmbiguousTask(FormbridgeError):
    """No kind scored at or above the threshold. Carries the two best
    (kind, score) candidates for the error message and for callers that
    want to ask the user to disambiguate."""

    def __init__(self, candidates: tuple[tuple[TaskKind, float], ...]):
        self.candidates = candidates
        described = ", ".join(f"{k.value}={s:.3f}" for k, s in candidates)
        super().__init__(f"no task kind scored above threshold; best: {described}")


class NoPipelineForKind(FormbridgeError):
    pass


class NoAdapterForKind(FormbridgeError):
    pass


class RouterConfigError(FormbridgeError):
    pass


@dataclass(frozen=True, slots=True)
class AdapterSpec:
    task: TaskKind
    name: str
    prompt_preamble: str = ""
    load_cost_ms: float = 50.0
    mem_mb: float = 100.0

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("adapter name must be nonempty")
        if not (math.isfinite(self.load_cost_ms) and self.load_cost_ms >= 0):
            raise ValueError("load_cost_ms must be finite and non-negative")
        if not (math.isfinite(self.mem_mb) and self.mem_mb >= 0):
            raise ValueError("mem_mb must be finite and non-negative")


class Lexicon:
    """Keyword weights per task kind. Keywords are matched as lowercase
    substrings of the request; a kind's score is the matched weight divided
    by its total weight, so scores are comparable across kinds with
    different vocabulary sizes."""

    def __init__(self, weights: Mapping[TaskKind, Mapping[str, float]]):
        if not weights:
            raise ValueError("lexicon must not be empty")
        cleaned: dict[TaskKind, dict[str, float]] = {}
        for kind, table in weights.items():
            if not table:
                raise ValueError(f"no keywords for {kind.value}")
            entry: dict[str, float] = {}
            for keyword, weight in table.items():
                word = keyword.lower()
                if not word:
                    raise ValueError("empty keyword")
                if weight <= 0:
                    raise ValueError(f"keyword {word!r} weight must be positive")
                entry[word] = float(weight)
            cleaned[kind] = entry
        self._weights = cleaned

    def kinds(self) -> list[TaskKind]:
        return sorted(self._weights, key=_KIND_ORDER.__getitem__)

    def keywords(self, kind: TaskKind) -> dict[str, float]:
        return dict(self._weights[kind])

    def score(self, kind: TaskKind, request: str) -> float:
        table = self._weights[kind]
        text = request.lower()
        matched = sum(w for kw, w in table.items() if kw in text)
        return matched / sum(table.values())


@dataclass(frozen=True, slots=True)
class RoutingDecision:
    task: TaskKind
    adapter: AdapterSpec
    confidence: float
    runner_up: tuple[TaskKind, float] | None = None


def classify_task(request: str, lexicon: Lexicon, threshold: float,
                  adapters: Sequence[AdapterSpec]) -> RoutingDecision:
    """Pick the kind with the highest normalized keyword score.

    Exact score ties go to the kind defined first in TaskKind, so the
    decision is a pure function of (request, lexicon, threshold, adapters).
    The argmax does not depend on the threshold; the threshold only decides
    whether the best score is good enough to act on.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if not request.strip():
        raise EmptyRequest("request is empty")
    ranked = sorted(
        ((lexicon.score(kind, request), kind) for kind in lexicon.kinds()),
        key=lambda pair: (-pair[0], _KIND_ORDER[pair[1]]))
    best_score, best_kind = ranked[0]
    runner_up = (ranked[1][1], ranked[1][0]) if len(ranked) > 1 else None
    if best_score < threshold:
        top2 = tuple((kind, score) for score, kind in ranked[:2])
        raise AmbiguousTask(top2)
    candidates = sorted((a for a in adapters if a.task is best_kind),
                        key=lambda a: a.name)
    if not candidates:
        raise NoAdapterForKind(f"no adapter registered for {best_kind.value}")
    return RoutingDecision(best_kind, candidates[0], best_score, runner_up)


@dataclass(frozen=True, slots=True)
class PipelineInvocation:
    """Everything the executor needs to run one routed request."""

    task: TaskKind
    adapter: AdapterSpec
    pipeline: object
    request: str
    prompt: str
    context: Mapping[str, object] = field(default_factory=dict)


def dispatch(decision: RoutingDecision, request: str,
             pipelines: Mapping[TaskKind, object],
             context: Mapping[str, object] | None = None) -> PipelineInvocation:
    """Bind the routed kind to its configured pipeline descriptor."""
    try:
        pipeline = pipelines[decision.task]
    except KeyError:
        raise NoPipelineForKind(decision.task.value) from None
    preamble = decision.adapter.prompt_preamble
    prompt = f"{preamble}\n{request}" if preamble else request
    return PipelineInvocation(decision.task, decision.adapter, pipeline,
                              request, prompt, dict(context or {}))


# ---------------------------------------------------------------------------
# Configuration files
# ---------------------------------------------------------------------------


def _config_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append((lineno, line))
    return out


def parse_lexicon(text: str) -> Lexicon:
    """Lexicon file: ``kind <TaskKind>`` opens a block, ``kw <keyword>
    <weight>`` lines fill it; ``#`` comments and blank lines ignored."""
    weights: dict[TaskKind, dict[str, float]] = {}
    current: TaskKind | None = None
    for lineno, line in _config_lines(text):
        tokens = line.split()
        if tokens[0] == "kind":
            if len(tokens) != 2:
                raise RouterConfigError(f"line {lineno}: expected 'kind <TaskKind>'")
            current = kind_from_token(tokens[1])
            if current in weights:
                raise RouterConfigError(
                    f"line {lineno}: duplicate kind {current.value}")
            weights[current] = {}
        elif tokens[0] == "kw":
            if current is None:
                raise RouterConfigError(f"line {lineno}: 'kw' before any 'kind'")
            if len(tokens) != 3:
                raise RouterConfigError(
                    f"line {lineno}: expected 'kw <keyword> <weight>'")
            keyword = tokens[1].lower()
            try:
                weight = float(tokens[2])
            except ValueError:
                raise RouterConfigError(
                    f"line {lineno}: bad weight {tokens[2]!r}") from None
            if keyword in weights[current]:
                raise RouterConfigError(
                    f"line {lineno}: duplicate keyword {keyword!r}")
            weights[current][keyword] = weight
        else:
            raise RouterConfigError(
                f"line {lineno}: expected 'kind' or 'kw', got {tokens[0]!r}")
    try:
        return Lexicon(weights)
    except ValueError as exc:
        raise RouterConfigError(str(exc)) from None


def load_lexicon(path: str | Path) -> Lexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def parse_adapters(text: str) -> list[AdapterSpec]:
    """Adapter registry file: ``adapter <kind> <name> load_ms=<n>
    mem_mb=<n>`` per line."""
    adapters: list[AdapterSpec] = []
    seen: set[tuple[TaskKind, str]] = set()
    for lineno, line in _config_lines(text):
        tokens = line.split()
        if tokens[0] != "adapter" or len(tokens) != 5:
            raise RouterConfigError(
                f"line {lineno}: expected "
                "'adapter <kind> <name> load_ms=<n> mem_mb=<n>'")
        kind = kind_from_token(tokens[1])
        name = tokens[2]
        values: dict[str, float] = {}
        for token in tokens[3:]:
            key, _, value = token.partition("=")
            if key not in ("load_ms", "mem_mb"):
                raise RouterConfigError(f"line {lineno}: unknown field {key!r}")
            try:
                values[key] = float(value)
            except ValueError:
                raise RouterConfigError(
                    f"line {lineno}: bad number in {token!r}") from None
        if set(values) != {"load_ms", "mem_mb"}:
            raise RouterConfigError(
                f"line {lineno}: load_ms= and mem_mb= are both required")
        if (kind, name) in seen:
            raise RouterConfigError(
                f"line {lineno}: duplicate adapter {kind.value}/{name}")
        seen.add((kind, name))
        try:
            adapters.append(AdapterSpec(kind, name,
                                        load_cost_ms=values["load_ms"],
                                        mem_mb=values["mem_mb"]))
        except ValueError as exc:
            raise RouterConfigError(f"line {lineno}: {exc}") from None
    return adapters


def load_adapters(path: str | Path) -> list[AdapterSpec]:
    return parse_adapters(Path(path).read_text(encoding="utf-8"))


def parse_corpus(text: str) -> list[tuple[TaskKind, str]]:
    """Labeled utterances, one ``<TaskKind> <utterance...>`` per line."""
    corpus: list[tuple[TaskKind, str]] = []
    for lineno, line in _config_lines(text):
        parts = line.split(maxsplit=1)
        if len(parts) != 2:
            raise RouterConfigError(
                f"line {lineno}: expected '<TaskKind> <utterance>'")
        corpus.append((kind_from_token(parts[0]), parts[1]))
    return corpus


def load_corpus(path: str | Path) -> list[tuple[TaskKind, str]]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"))
