"""Translators: deterministic rule-based maps, direct LLM completion, and
LLM-synthesized conversion scripts, all behind one outcome shape.

The three kinds trade differently: rule-based is exact but only exists for
the built-in pairs; direct completion covers anything but must be validated
every time; a synthesized script costs backend calls once, then converts
deterministically forever. The script cache makes that one-time cost
observable (zero backend calls on a warm cache).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .backends import CompletionBackend, wrap_artifact_block
from .core import (
    Artifact,
    AttributeDef,
    Diagnostic,
    EntityDef,
    FormbridgeError,
    Registry,
    RelationDef,
    Translated,
    UnrepresentableElement,
    error,
)
from .formalisms import PROBES
from .scriptlang import (
    GRAMMAR_HINT as SCRIPT_GRAMMAR_HINT,
    Op,
    ScriptRuntimeError,
    ScriptSyntaxError,
    execute,
    parse_script,
)

RULE_BASED = "rule-based"
LLM_DIRECT = "llm-direct"
LLM_SCRIPTED = "llm-scripted"
KINDS = (RULE_BASED, LLM_DIRECT, LLM_SCRIPTED)

STRICT = "strict"
ANNOTATED = "annotated"

# The annotated schema translator names synthesized keys after this marker
# so the reverse direction can remove exactly what was invented.
SYNTH_KEY_NAME = "synth_id"

RULE_BASED_PAIRS = frozenset({
    ("uml-mini", "er-mini"), ("er-mini", "uml-mini"),
    ("fol-p9", "fol-pk"), ("fol-pk", "fol-p9"),
    ("tab-json", "tab-csv"), ("tab-csv", "tab-json"),
})


class UnsupportedPair(FormbridgeError):
    pass


class ScriptSynthesisFailed(FormbridgeError):
    pass


class ScriptCacheError(FormbridgeError):
    pass


@dataclass(frozen=True, slots=True)
class TranslatorSpec:
    source: str
    target: str
    kind: str
    mode: str = STRICT
    fidelity_est: float = 1.0
    latency_est: float = 0.0
    deterministic: bool = True

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown translator kind {self.kind!r}")
        if self.mode not in (STRICT, ANNOTATED):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.fidelity_est <= 1:
            raise ValueError("fidelity_est must be in (0, 1]")
        if self.latency_est < 0:
            raise ValueError("latency_est must be non-negative")
        expected = {RULE_BASED: True, LLM_DIRECT: False, LLM_SCRIPTED: True}[self.kind]
        if self.deterministic != expected:
            raise ValueError(
                f"{self.kind} translators must have deterministic={expected}")


def make_spec(source: str, target: str, kind: str, *, mode: str = STRICT,
              fidelity_est: float = 1.0, latency_est: float = 0.0) -> TranslatorSpec:
    """Build a spec with the determinism flag implied by the kind."""
    return TranslatorSpec(source, target, kind, mode, fidelity_est, latency_est,
                          deterministic=kind != LLM_DIRECT)


@dataclass(frozen=True, slots=True)
class TranslationOutcome:
    artifact: Artifact
    diagnostics: list[Diagnostic]
    attempts: int
    translator: TranslatorSpec

    def __post_init__(self) -> None:
        if self.attempts < 1:
            raise ValueError("attempts must be positive")

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


# ---------------------------------------------------------------------------
# Rule-based maps
# ---------------------------------------------------------------------------


def rule_based_element_map(elements: frozenset, source: str, target: str,
                           mode: str = STRICT) -> frozenset:
    """The deterministic element-level translation for a built-in pair.

    uml->er synthesizes one integer key per class (named ``id`` in strict
    mode, ``synth_id`` in annotated mode) and drops association
    cardinalities, which er-mini cannot express. er->uml demotes key
    attributes to plain ones; annotated mode removes keys named
    ``synth_id`` entirely, undoing its own synthesis. The fol and tab
    pairs share canonical forms, so their maps are identity.
    """
    if (source, target) not in RULE_BASED_PAIRS:
        raise UnsupportedPair(f"no rule-based translator for {source} -> {target}")
    if source == "uml-mini" and target == "er-mini":
        key_name = SYNTH_KEY_NAME if mode == ANNOTATED else "id"
        out = set()
        for el in elements:
            if isinstance(el, RelationDef) and el.cardinality is not None:
                out.add(RelationDef(el.name, el.endpoints, None))
            else:
                out.add(el)
        for el in elements:
            if isinstance(el, EntityDef):
                out.add(AttributeDef(el.name, key_name, "int", True))
        return frozenset(out)
    if source == "er-mini" and target == "uml-mini":
        out = set()
        for el in elements:
            if isinstance(el, AttributeDef) and el.is_key:
                if mode == ANNOTATED and el.name == SYNTH_KEY_NAME:
                    continue
                out.add(AttributeDef(el.owner, el.name, el.type_name, False))
            else:
                out.add(el)
        return frozenset(out)
    # fol-p9 <-> fol-pk and tab-json <-> tab-csv share canonical elements.
    return frozenset(elements)


def translate_rule_based(a: Artifact, spec: TranslatorSpec,
                         registry: Registry) -> TranslationOutcome:
    if spec.kind != RULE_BASED:
        raise ValueError(f"spec kind is {spec.kind}, not {RULE_BASED}")
    if a.formalism != spec.source:
        raise ValueError(f"artifact is {a.formalism}, spec expects {spec.source}")
    provenance = Translated(f"{spec.source}->{spec.target} {spec.kind}", 1)
    source_diags = registry.validate(a)
    if any(d.is_error for d in source_diags):
        return TranslationOutcome(Artifact(spec.target, "", provenance),
                                  source_diags, 1, spec)
    elements = registry.parse(a).elements
    mapped = rule_based_element_map(elements, spec.source, spec.target, spec.mode)
    try:
        content = registry.render(mapped, spec.target)
    except UnrepresentableElement as exc:
        diag = error("translate.unrepresentable", str(exc))
        return TranslationOutcome(Artifact(spec.target, "", provenance),
                                  [diag], 1, spec)
    artifact = Artifact(spec.target, content, provenance)
    return TranslationOutcome(artifact, registry.validate(artifact), 1, spec)


# ---------------------------------------------------------------------------
# Direct LLM translation
# ---------------------------------------------------------------------------


def build_translation_prompt(a: Artifact, target: str, registry: Registry) -> str:
    return (f"Translate the artifact below from {a.formalism} to {target}.\n"
            f"Target grammar: {registry.grammar_hint(target)}\n"
            f"{wrap_artifact_block(a.formalism, target, a.content)}\n"
            f"Reply with only the {target} text.")


def translate_llm_direct(a: Artifact, spec: TranslatorSpec,
                         backend: CompletionBackend, registry: Registry,
                         *, params: float = 0.0, seed: int = 0) -> TranslationOutcome:
    """One completion, no retries; the repair loop owns retrying."""
    if spec.kind != LLM_DIRECT:
        raise ValueError(f"spec kind is {spec.kind}, not {LLM_DIRECT}")
    prompt = build_translation_prompt(a, spec.target, registry)
    content = backend.complete(prompt, params, seed)
    artifact = Artifact(spec.target, content,
                        Translated(f"{spec.source}->{spec.target} {spec.kind} "
                                   f"via {backend.name}", 1))
    return TranslationOutcome(artifact, registry.validate(artifact), 1, spec)


# ---------------------------------------------------------------------------
# Scripted translation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ConversionScript:
    source: str
    target: str
    body: str
    synthesized_by: str
    content_digest: str = ""

    def __post_init__(self) -> None:
        digest = script_digest(self.body)
        if self.content_digest == "":
            object.__setattr__(self, "content_digest", digest)
        elif self.content_digest != digest:
            raise ValueError("content_digest does not match body")

    def ops(self) -> list[Op]:
        return parse_script(self.body)


def script_digest(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class ScriptCache:
    """Directory of synthesized scripts, one file per (source, target,
    backend) key. File format: header line ``ftg-script v1 <source> <target>
    <digest>``, then the script body verbatim."""

    HEADER_PREFIX = "ftg-script v1"

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, source: str, target: str, backend_name: str) -> Path:
        return self.root / f"{source}__{target}__{backend_name}.ftgs"

    def load(self, source: str, target: str, backend_name: str) -> ConversionScript | None:
        path = self._path(source, target, backend_name)
        if not path.exists():
            return None
        text = path.read_text(encoding="utf-8")
        header, _, body = text.partition("\n")
        parts = header.split()
        if parts[:2] != ["ftg-script", "v1"] or len(parts) != 5:
            raise ScriptCacheError(f"{path}: malformed header {header!r}")
        _, _, src, tgt, digest = parts
        if (src, tgt) != (source, target):
            raise ScriptCacheError(f"{path}: header names {src}->{tgt}, "
                                   f"expected {source}->{target}")
        if script_digest(body) != digest:
            raise ScriptCacheError(f"{path}: body does not match digest")
        return ConversionScript(source, target, body, backend_name, digest)

    def store(self, script: ConversionScript) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self._path(script.source, script.target, script.synthesized_by)
        header = f"{self.HEADER_PREFIX} {script.source} {script.target} " \
                 f"{script.content_digest}"
        path.write_text(f"{header}\n{script.body}", encoding="utf-8")
        return path


def build_script_prompt(source: str, target: str, registry: Registry) -> str:
    return (f"Write a conversion script that maps {source} element sets to "
            f"{target} element sets.\n"
            f"Script language: {SCRIPT_GRAMMAR_HINT}\n"
            f"Source grammar: {registry.grammar_hint(source)}\n"
            f"Target grammar: {registry.grammar_hint(target)}\n"
            "Reply with only the script.")


def _probe_check(ops: list[Op], source: str, target: str,
                 registry: Registry) -> bool:
    """A candidate script is certified by one probe round trip: run it on
    the source probe, render into the target formalism, and require the
    rendering to validate and re-parse to the script's own output."""
    probe = PROBES.get(source)
    if probe is None:
        return True
    parsed = registry.get(source).codec.parse(probe)
    if not parsed.ok:
        return False
    try:
        result = execute(ops, parsed.elements)
        rendered = registry.render(result, target)
    except (ScriptRuntimeError, UnrepresentableElement):
        return False
    reparsed = registry.get(target).codec.parse(rendered)
    if not reparsed.ok or reparsed.elements != result:
        return False
    return not registry.get(target).codec.structural_diagnostics(reparsed.elements)


def synthesize_conversion_script(source: str, target: str,
                                 backend: CompletionBackend,
                                 registry: Registry, *,
                                 cache: ScriptCache | None = None,
                                 budget: int = 3, params: float = 0.0,
                                 seed: int = 0) -> ConversionScript:
    """Ask the backend for a conversion script, certify it on the probe
    fixture, and cache it. A warm cache answers without any backend call."""
    if cache is not None:
        cached = cache.load(source, target, backend.name)
        if cached is not None:
            return cached
    prompt = build_script_prompt(source, target, registry)
    failures: list[str] = []
    for _ in range(budget):
        body = backend.complete(prompt, params, seed)
        try:
            ops = parse_script(body)
        except ScriptSyntaxError as exc:
            failures.append(str(exc))
            continue
        if not _probe_check(ops, source, target, registry):
            failures.append("probe round-trip check failed")
            continue
        script = ConversionScript(source, target, body, backend.name)
        if cache is not None:
            cache.store(script)
        return script
    raise ScriptSynthesisFailed(
        f"no usable {source}->{target} script within {budget} attempts: "
        + "; ".join(failures))


def translate_via_script(a: Artifact, script: ConversionScript,
                         registry: Registry) -> TranslationOutcome:
    """Pure function of (artifact, script): bit-identical output across runs."""
    if a.formalism != script.source:
        raise ValueError(f"artifact is {a.formalism}, script expects {script.source}")
    spec = make_spec(script.source, script.target, LLM_SCRIPTED)
    provenance = Translated(
        f"{script.source}->{script.target} script {script.content_digest[:12]}", 1)
    source_diags = registry.validate(a)
    if any(d.is_error for d in source_diags):
        return TranslationOutcome(Artifact(script.target, "", provenance),
                                  source_diags, 1, spec)
    elements = registry.parse(a).elements
    result = execute(script.ops(), elements)
    try:
        content = registry.render(result, script.target)
    except UnrepresentableElement as exc:
        diag = error("translate.unrepresentable", str(exc))
        return TranslationOutcome(Artifact(script.target, "", provenance),
                                  [diag], 1, spec)
    artifact = Artifact(script.target, content, provenance)
    return TranslationOutcome(artifact, registry.validate(artifact), 1, spec)
