"""Validate-and-feedback repair loop around a completion backend.

One session: ask for a translation, validate the candidate with the target
codec, and if anything is wrong, ask again with every diagnostic (and the
failed candidate) embedded in the next prompt. The loop stops at the first
blocking-free candidate or when the attempt budget runs out; it never makes
more backend calls than attempts recorded in the trace.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .backends import BackendTimeout, BackendUnavailable, CompletionBackend, \
    wrap_artifact_block
from .core import Artifact, Diagnostic, FormbridgeError, Registry, Translated
from .translate import LLM_DIRECT, TranslationOutcome, make_spec

VALID = "valid"
BUDGET_EXHAUSTED = "budget-exhausted"
BACKEND_ERROR = "backend-error"

# Placeholders are hyphenated, so substitution happens by plain replacement
# rather than str.format.
DEFAULT_PROMPT_TEMPLATE = (
    "Translate the artifact below into the target formalism.\n"
    "Target grammar: {target-grammar}\n"
    "{source-content}\n"
    "{diagnostics}"
    "Reply with only the target text.")


@dataclass(frozen=True, slots=True)
class RepairPolicy:
    max_attempts: int = 3
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    stop_on_warning: bool = False

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")


@dataclass(slots=True)
class RepairTrace:
    """Attempts are (candidate content, diagnostics) pairs in order."""

    attempts: list[tuple[str, list[Diagnostic]]] = field(default_factory=list)
    outcome: str = BUDGET_EXHAUSTED

    def __len__(self) -> int:
        return len(self.attempts)

    def export_log(self) -> str:
        """One record per attempt: index, candidate digest, diagnostic codes."""
        lines = []
        for index, (candidate, diagnostics) in enumerate(self.attempts, start=1):
            digest = hashlib.sha256(candidate.encode("utf-8")).hexdigest()[:12]
            codes = ",".join(d.code for d in diagnostics) or "-"
            lines.append(f"attempt={index} digest={digest} codes={codes}")
        lines.append(f"outcome={self.outcome}")
        return "\n".join(lines) + "\n"


class RepairBackendError(FormbridgeError):
    """Backend died mid-session; the partial trace rides along."""

    def __init__(self, message: str, trace: RepairTrace):
        self.trace = trace
        super().__init__(message)


def _fill(template: str, source_block: str, grammar: str, diagnostics: str) -> str:
    return (template
            .replace("{source-content}", source_block)
            .replace("{target-grammar}", grammar)
            .replace("{diagnostics}", diagnostics))


def _feedback(candidate: str, diagnostics: list[Diagnostic]) -> str:
    lines = [d.render_line() for d in diagnostics]
    return ("Your previous attempt was:\n"
            f"{candidate}\n"
            "It failed validation with:\n"
            + "\n".join(lines) + "\nFix every issue listed above.\n")


def repair_translate(a: Artifact, target: str, backend: CompletionBackend,
                     policy: RepairPolicy, registry: Registry, *,
                     params: float = 0.0,
                     seed: int = 0) -> tuple[TranslationOutcome, RepairTrace]:
    """Run one repair session. Returns the outcome (valid or not) and the
    full trace; raises RepairBackendError if the backend fails mid-session."""
    spec = make_spec(a.formalism, target, LLM_DIRECT)
    grammar = registry.grammar_hint(target)
    source_block = wrap_artifact_block(a.formalism, target, a.content)
    trace = RepairTrace()
    prompt = _fill(policy.prompt_template, source_block, grammar, "")
    for attempt in range(1, policy.max_attempts + 1):
        try:
            candidate = backend.complete(prompt, params, seed)
        except (BackendUnavailable, BackendTimeout) as exc:
            trace.outcome = BACKEND_ERROR
            raise RepairBackendError(str(exc), trace) from exc
        diagnostics = registry.validate(Artifact(target, candidate))
        trace.attempts.append((candidate, diagnostics))
        blocking = any(d.is_error for d in diagnostics) \
            or (policy.stop_on_warning and diagnostics)
        if not blocking:
            trace.outcome = VALID
            artifact = Artifact(
                target, candidate,
                Translated(f"{a.formalism}->{target} repair via {backend.name}",
                           attempt))
            return TranslationOutcome(artifact, diagnostics, attempt, spec), trace
        prompt = _fill(policy.prompt_template, source_block, grammar,
                       _feedback(candidate, diagnostics))
    trace.outcome = BUDGET_EXHAUSTED
    last_candidate, last_diags = trace.attempts[-1]
    artifact = Artifact(
        target, last_candidate,
        Translated(f"{a.formalism}->{target} repair via {backend.name}",
                   policy.max_attempts))
    outcome = TranslationOutcome(artifact, last_diags, policy.max_attempts, spec)
    return outcome, trace
