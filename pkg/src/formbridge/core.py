"""Core domain types: formalisms, artifacts, canonical element sets, diagnostics.

Every other module consults the ``Registry`` defined here. Artifacts carry raw
text in exactly one registered formalism; codecs map that text to and from a
canonical *element set*, which is the order-insensitive representation used by
the fidelity metrics and by the conversion-script language.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Union

FORMALISM_ID_RE = re.compile(r"^[a-z][a-z0-9-]*$")


class FormbridgeError(Exception):
    """Base class for hard faults (misuse of the toolkit, not bad input text)."""


class DuplicateFormalism(FormbridgeError):
    pass


class UnknownFormalism(FormbridgeError):
    pass


class UnrepresentableElement(FormbridgeError):
    """An element cannot be expressed in the target formalism's grammar."""

    def __init__(self, element: "Element", target: str, reason: str = ""):
        self.element = element
        self.target = target
        self.reason = reason
        detail = f" ({reason})" if reason else ""
        super().__init__(f"{element!r} not representable in {target}{detail}")


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """A structured validator finding.

    Diagnostics are values, never exceptions: the repair loop consumes them as
    data. ``code`` is stable across releases (see README for the documented
    list); ``location`` is a 1-based (line, column) pair when known.
    """

    severity: str
    code: str
    message: str
    location: tuple[int, int] | None = None
    hint: str | None = None

    def __post_init__(self) -> None:
        if self.severity not in (ERROR, WARNING):
            raise ValueError(f"bad severity {self.severity!r}")

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def render_line(self) -> str:
        """Serialize as ``code @ line: message`` for prompt feedback."""
        line = self.location[0] if self.location else 0
        return f"{self.code} @ {line}: {self.message}"


def error(code: str, message: str, location: tuple[int, int] | None = None,
          hint: str | None = None) -> Diagnostic:
    return Diagnostic(ERROR, code, message, location, hint)


def warning(code: str, message: str, location: tuple[int, int] | None = None,
            hint: str | None = None) -> Diagnostic:
    return Diagnostic(WARNING, code, message, location, hint)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


# ---------------------------------------------------------------------------
# Canonical elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EntityDef:
    name: str


@dataclass(frozen=True, slots=True)
class AttributeDef:
    owner: str
    name: str
    type_name: str
    is_key: bool = False


@dataclass(frozen=True, slots=True)
class RelationDef:
    name: str
    endpoints: tuple[str, ...]
    cardinality: str | None = None


@dataclass(frozen=True, slots=True)
class RuleDef:
    """A Horn rule. Atom strings are canonical: variables carry a ``$`` prefix
    (``"man($x)"``), constants are bare (``"man(socrates)"``)."""

    name: str
    antecedents: tuple[str, ...]
    consequents: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.antecedents or not self.consequents:
            raise ValueError("rule atom lists must be nonempty")


@dataclass(frozen=True, slots=True)
class RecordField:
    """One cell of a tabular artifact. ``value`` is the canonical JSON literal
    token: ``1`` is a number, ``"1"`` (with quote characters) is a string."""

    row: int
    field: str
    value: str


Element = Union[EntityDef, AttributeDef, RelationDef, RuleDef, RecordField]

# Canonical element sets are plain frozensets; order never carries meaning.
ElementSet = frozenset

_KIND_ORDER = {EntityDef: 0, AttributeDef: 1, RelationDef: 2, RuleDef: 3, RecordField: 4}


def element_sort_key(el: Element) -> tuple:
    """Total order used everywhere a deterministic listing of a set is needed
    (canonical rendering, report listings, seeded corruption picks)."""
    if isinstance(el, EntityDef):
        return (0, el.name)
    if isinstance(el, AttributeDef):
        return (1, el.owner, el.name, el.type_name, el.is_key)
    if isinstance(el, RelationDef):
        return (2, el.name, el.endpoints, el.cardinality or "")
    if isinstance(el, RuleDef):
        return (3, el.name, el.antecedents, el.consequents)
    if isinstance(el, RecordField):
        return (4, el.row, el.field, el.value)
    raise TypeError(f"not an element: {el!r}")


def sorted_elements(elements: Iterable[Element]) -> list[Element]:
    return sorted(elements, key=element_sort_key)


def identity_key(el: Element) -> tuple:
    """Matching key for mutation detection: (kind, owner, name). Two elements
    with the same identity key but different payload are one mutated element,
    not a missing/fabricated pair."""
    if isinstance(el, EntityDef):
        return ("entity", "", el.name)
    if isinstance(el, AttributeDef):
        return ("attribute", el.owner, el.name)
    if isinstance(el, RelationDef):
        return ("relation", "", el.name)
    if isinstance(el, RuleDef):
        return ("rule", "", el.name)
    if isinstance(el, RecordField):
        return ("record", str(el.row), el.field)
    raise TypeError(f"not an element: {el!r}")


# ---------------------------------------------------------------------------
# Artifacts and provenance
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Authored:
    """Provenance of content written by a person (or shipped as a fixture)."""


@dataclass(frozen=True, slots=True)
class Translated:
    plan_summary: str
    attempts: int = 1

    def __post_init__(self) -> None:
        if self.attempts < 0:
            raise ValueError("attempt count must be non-negative")


Provenance = Union[Authored, Translated]


@dataclass(frozen=True, slots=True)
class Artifact:
    """A piece of content in exactly one formalism. Content is raw text; it is
    never pre-parsed, so an Artifact may well be invalid."""

    formalism: str
    content: str
    provenance: Provenance = field(default_factory=Authored)


# ---------------------------------------------------------------------------
# Codecs and the registry
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class ParseResult:
    """Outcome of a parse: an element set on success, diagnostics on failure.
    ``elements`` is None iff at least one error diagnostic is present."""

    elements: ElementSet | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.elements is not None


class Codec(Protocol):
    def parse(self, text: str) -> ParseResult: ...

    def render(self, elements: ElementSet) -> str: ...

    def structural_diagnostics(self, elements: ElementSet) -> list[Diagnostic]: ...

    def grammar_hint(self) -> str: ...


@dataclass(frozen=True, slots=True)
class Formalism:
    id: str
    display_name: str
    description: str
    codec: Codec

    def __post_init__(self) -> None:
        if not FORMALISM_ID_RE.match(self.id):
            raise ValueError(f"bad formalism id {self.id!r}")


class Registry:
    """Write-once registry of formalisms. Entries are never overwritten, so a
    configured registry is immutable and safe to share across sessions."""

    def __init__(self) -> None:
        self._formalisms: dict[str, Formalism] = {}

    def register(self, spec: Formalism) -> str:
        if spec.id in self._formalisms:
            raise DuplicateFormalism(spec.id)
        self._formalisms[spec.id] = spec
        return spec.id

    def get(self, formalism_id: str) -> Formalism:
        try:
            return self._formalisms[formalism_id]
        except KeyError:
            raise UnknownFormalism(formalism_id) from None

    def __contains__(self, formalism_id: str) -> bool:
        return formalism_id in self._formalisms

    def __len__(self) -> int:
        return len(self._formalisms)

    def ids(self) -> list[str]:
        return sorted(self._formalisms)

    # -- operations over artifacts ------------------------------------------

    def parse(self, artifact: Artifact) -> ParseResult:
        codec = self.get(artifact.formalism).codec
        return codec.parse(artifact.content)

    def validate(self, artifact: Artifact) -> list[Diagnostic]:
        """Empty iff the artifact parses and its structural rules hold."""
        codec = self.get(artifact.formalism).codec
        result = codec.parse(artifact.content)
        if not result.ok:
            return result.diagnostics
        return result.diagnostics + codec.structural_diagnostics(result.elements)

    def render(self, elements: ElementSet, target: str) -> str:
        return self.get(target).codec.render(elements)

    def grammar_hint(self, formalism_id: str) -> str:
        return self.get(formalism_id).codec.grammar_hint()
