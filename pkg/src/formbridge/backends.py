"""Completion backends: the only non-deterministic seam in the toolkit.

Everything else is pure, so tests pin behavior here. MockBackend covers
three deterministic behaviors (fixture table, scripted schedule, seeded
Bernoulli success); CorruptingTranslatorBackend acts like a competent but
lossy translator for fidelity benchmarks; RemoteBackend posts to a plain
text-completion HTTP endpoint and is never required by tests.
"""

from __future__ import annotations

import hashlib
import threading
import urllib.error
import urllib.request
from typing import Protocol, runtime_checkable

from .core import FormbridgeError

# Upper end of the observed direct-translation success range; the seeded
# Bernoulli mock defaults to it.
DEFAULT_SUCCESS_PROBABILITY = 0.473


class BackendUnavailable(FormbridgeError):
    pass


class BackendTimeout(FormbridgeError):
    pass


@runtime_checkable
class CompletionBackend(Protocol):
    name: str

    def complete(self, prompt: str, params: float, seed: int) -> str: ...


def seeded_uniform(*parts: object) -> float:
    """Deterministic uniform draw in [0, 1) from hashed parts."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2 ** 64


# ---------------------------------------------------------------------------
# Prompt artifact blocks
# ---------------------------------------------------------------------------
# Source artifacts are embedded in prompts inside a marked block, so backends
# that need the payload (the corrupting mock, a future remote model) can
# recover it regardless of how the surrounding template was customized.

_BLOCK_OPEN = "<<<artifact"
_BLOCK_CLOSE = ">>>artifact"


def wrap_artifact_block(source: str, target: str, content: str) -> str:
    return (f"{_BLOCK_OPEN} source={source} target={target}\n"
            f"{content}\n{_BLOCK_CLOSE}")


def extract_artifact_block(prompt: str) -> tuple[str, str, str]:
    """Recover (source, target, content) from a prompt; raises ValueError
    when no block is present."""
    start = prompt.find(_BLOCK_OPEN)
    end = prompt.find(_BLOCK_CLOSE)
    if start < 0 or end < 0 or end <= start:
        raise ValueError("prompt carries no artifact block")
    header_end = prompt.index("\n", start)
    header = prompt[start + len(_BLOCK_OPEN):header_end].split()
    fields = dict(part.split("=", 1) for part in header if "=" in part)
    if "source" not in fields or "target" not in fields:
        raise ValueError("artifact block header lacks source/target")
    content = prompt[header_end + 1:end]
    if content.endswith("\n"):
        content = content[:-1]
    return fields["source"], fields["target"], content


# ---------------------------------------------------------------------------
# Mock backend
# ---------------------------------------------------------------------------


class MockBackend:
    """Deterministic stand-in for a hosted model.

    Reply resolution order per call: scripted ``schedule`` entries (the last
    entry repeats once exhausted), then exact-match ``table`` lookup, then
    seeded Bernoulli success when ``success_probability`` is set, then
    ``default``. With nothing applicable the call raises BackendUnavailable.
    """

    def __init__(self, *, table: dict[str, str] | None = None,
                 schedule: list[str] | None = None,
                 success_probability: float | None = None,
                 success_text: str = "", failure_text: str = "???",
                 default: str | None = None, name: str = "mock"):
        self.name = name
        self.table = dict(table or {})
        self.schedule = list(schedule or [])
        self.success_probability = success_probability
        self.success_text = success_text
        self.failure_text = failure_text
        self.default = default
        self.calls: list[tuple[str, int]] = []
        self._lock = threading.Lock()
        self._schedule_pos = 0

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, prompt: str, params: float, seed: int) -> str:
        with self._lock:
            self.calls.append((prompt, seed))
            if self.schedule:
                entry = self.schedule[min(self._schedule_pos, len(self.schedule) - 1)]
                self._schedule_pos += 1
                return entry
        if prompt in self.table:
            return self.table[prompt]
        if self.success_probability is not None:
            if seeded_uniform(seed, prompt) < self.success_probability:
                return self.success_text
            return self.failure_text
        if self.default is not None:
            return self.default
        raise BackendUnavailable(f"no fixture for prompt ({self.name})")


# ---------------------------------------------------------------------------
# Corrupting translator backend
# ---------------------------------------------------------------------------


class CorruptingTranslatorBackend:
    """A mock that really translates (via the deterministic element maps)
    and then corrupts the result: droppable elements vanish with the given
    probability and record values mutate with it. Draws are keyed by (seed,
    source content, element), never by the probability itself, so a run at
    p=0.1 loses a subset of what the same seed loses at p=0.5; mean
    distortion is ordered in p by construction, not by luck.

    Corruption keeps output renderable: entities and key attributes are
    never dropped (schema validity), record mutations preserve row shape.
    """

    def __init__(self, *, corruption_probability: float = 0.0,
                 always_drop: frozenset[str] = frozenset(),
                 registry=None, name: str = "corrupting-mock"):
        from .formalisms import builtin_registry
        self.name = name
        self.corruption_probability = corruption_probability
        self.always_drop = frozenset(always_drop)
        self.registry = registry or builtin_registry()
        self.calls: list[tuple[str, int]] = []
        self._lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, prompt: str, params: float, seed: int) -> str:
        from .core import AttributeDef, RecordField, RelationDef, RuleDef, element_sort_key
        from .translate import rule_based_element_map

        with self._lock:
            self.calls.append((prompt, seed))
        try:
            source, target, content = extract_artifact_block(prompt)
        except ValueError as exc:
            raise BackendUnavailable(str(exc)) from None
        parsed = self.registry.get(source).codec.parse(content)
        if not parsed.ok:
            raise BackendUnavailable(f"source artifact does not parse as {source}")
        mapped = rule_based_element_map(parsed.elements, source, target)
        fixture_key = hashlib.sha256(content.encode()).hexdigest()[:12]

        out = set(mapped)
        for el in sorted(mapped, key=element_sort_key):
            name = getattr(el, "field", None) or getattr(el, "name", "")
            forced = name in self.always_drop
            draw = seeded_uniform(seed, fixture_key, element_sort_key(el))
            hit = forced or draw < self.corruption_probability
            if not hit:
                continue
            if isinstance(el, (RelationDef, RuleDef)) \
                    or (isinstance(el, AttributeDef) and not el.is_key):
                out.discard(el)
            elif isinstance(el, RecordField):
                out.discard(el)
                out.add(RecordField(el.row, el.field, _mutate_token(el.value)))
        return self.registry.render(frozenset(out), target)


def _mutate_token(token: str) -> str:
    from .formalisms.tabular import canonical_token, token_value

    value = token_value(token)
    if isinstance(value, str):
        return canonical_token(value + "~")
    if value is True:
        return "false"
    if value is False:
        return "true"
    if value is None:
        return "0"
    return canonical_token(value + 1)


# ---------------------------------------------------------------------------
# Remote backend (optional, never used by tests)
# ---------------------------------------------------------------------------


class RemoteBackend:
    """POSTs the prompt to a text-completion endpoint and returns the body."""

    def __init__(self, url: str, *, timeout_s: float = 30.0, name: str = "remote"):
        self.name = name
        self.url = url
        self.timeout_s = timeout_s

    def complete(self, prompt: str, params: float, seed: int) -> str:
        request = urllib.request.Request(
            self.url, data=prompt.encode("utf-8"),
            headers={"Content-Type": "text/plain; charset=utf-8",
                     "X-Params": str(params), "X-Seed": str(seed)})
        try:
            with urllib.request.urlopen(request, timeout=self.timeout_s) as response:
                return response.read().decode("utf-8")
        except TimeoutError as exc:
            raise BackendTimeout(str(exc)) from None
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, TimeoutError):
                raise BackendTimeout(str(exc.reason)) from None
            raise BackendUnavailable(str(exc)) from None
