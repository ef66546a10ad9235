"""er-mini: a minimal entity-relationship notation.

Grammar::

    schema := {entity | rel}
    entity := "entity" IDENT "{" {["key"] IDENT ":" TYPE ";"} "}"
    rel := "rel" IDENT "(" IDENT "," IDENT ")" ";"

Structural rule: every entity has exactly one ``key`` attribute. Rendering
refuses sets that would not validate (a keyless entity is unrepresentable),
so render output always parses and validates cleanly.
"""

from __future__ import annotations

from ..core import (
    AttributeDef,
    Diagnostic,
    ElementSet,
    EntityDef,
    ParseResult,
    RelationDef,
    UnrepresentableElement,
    element_sort_key,
    error,
)
from ._scan import EOF, IDENT, PUNCT, ScanError, TokenStream, scan

RESERVED = frozenset({"entity", "rel"})

GRAMMAR_HINT = (
    'schema := {entity | rel}; entity := "entity" IDENT "{" {["key"] IDENT ":" TYPE ";"} "}"; '
    'rel := "rel" IDENT "(" IDENT "," IDENT ")" ";"; every entity needs exactly one key attribute'
)


class ErMiniCodec:
    def grammar_hint(self) -> str:
        return GRAMMAR_HINT

    def parse(self, text: str) -> ParseResult:
        if not text.strip():
            return ParseResult(frozenset(), [])
        try:
            stream = TokenStream(scan(text))
            elements = _parse_schema(stream)
        except ScanError as exc:
            return ParseResult(None, [exc.diagnostic])
        return ParseResult(frozenset(elements), [])

    def structural_diagnostics(self, elements: ElementSet) -> list[Diagnostic]:
        diags: list[Diagnostic] = []
        entities = sorted(e.name for e in elements if isinstance(e, EntityDef))
        entity_set = set(entities)
        for name in entities:
            keys = [e for e in elements
                    if isinstance(e, AttributeDef) and e.owner == name and e.is_key]
            if not keys:
                diags.append(error("er.missing-key",
                                   f"entity {name!r} has no key attribute",
                                   hint="mark exactly one attribute with 'key'"))
            elif len(keys) > 1:
                diags.append(error("er.multiple-keys",
                                   f"entity {name!r} has {len(keys)} key attributes"))
        for el in sorted(elements, key=element_sort_key):
            if isinstance(el, RelationDef):
                for endpoint in el.endpoints:
                    if endpoint not in entity_set:
                        diags.append(error(
                            "er.unknown-entity",
                            f"rel {el.name!r} references undeclared entity {endpoint!r}"))
        return diags

    def render(self, elements: ElementSet) -> str:
        entities: dict[str, list[AttributeDef]] = {}
        relations: list[RelationDef] = []
        for el in sorted(elements, key=element_sort_key):
            if isinstance(el, EntityDef):
                entities.setdefault(el.name, [])
            elif isinstance(el, RelationDef):
                if len(el.endpoints) != 2:
                    raise UnrepresentableElement(el, "er-mini", "rels are binary")
                if el.cardinality is not None:
                    raise UnrepresentableElement(el, "er-mini", "rels carry no cardinality")
                relations.append(el)
            elif not isinstance(el, AttributeDef):
                raise UnrepresentableElement(el, "er-mini")
        entity_names = set(entities)
        for el in sorted(elements, key=element_sort_key):
            if isinstance(el, AttributeDef):
                if el.owner not in entity_names:
                    raise UnrepresentableElement(el, "er-mini", f"no entity {el.owner!r}")
                entities[el.owner].append(el)
        for name, attrs in entities.items():
            _check_ident(name)
            key_count = sum(1 for a in attrs if a.is_key)
            if key_count != 1:
                raise UnrepresentableElement(
                    EntityDef(name), "er-mini",
                    f"entity needs exactly one key attribute, has {key_count}")
            for attr in attrs:
                _check_ident(attr.name)
                _check_ident(attr.type_name)
        for rel in relations:
            _check_ident(rel.name)
            for endpoint in rel.endpoints:
                if endpoint not in entity_names:
                    raise UnrepresentableElement(rel, "er-mini", f"no entity {endpoint!r}")
        lines = []
        for name in sorted(entities):
            decls = " ".join(
                f"key {a.name}: {a.type_name};" if a.is_key else f"{a.name}: {a.type_name};"
                for a in entities[name])
            lines.append(f"entity {name} {{ {decls} }}" if decls else f"entity {name} {{ }}")
        for rel in relations:
            left, right = rel.endpoints
            lines.append(f"rel {rel.name} ({left}, {right});")
        return "\n".join(lines) + "\n" if lines else ""


def _check_ident(name: str) -> None:
    if not name or name in RESERVED or not (name[0].isalpha() or name[0] == "_") \
            or not all(c.isalnum() or c == "_" for c in name):
        raise UnrepresentableElement(EntityDef(name), "er-mini", f"bad identifier {name!r}")


def _parse_schema(stream: TokenStream) -> list:
    elements = []
    while not stream.at(EOF):
        if stream.at(IDENT, "entity"):
            elements.extend(_parse_entity(stream))
        elif stream.at(IDENT, "rel"):
            elements.append(_parse_rel(stream))
        else:
            tok = stream.current
            raise ScanError(error("syntax.unexpected-token",
                                  f"expected 'entity' or 'rel', found {tok.text!r}",
                                  (tok.line, tok.col)))
    return elements


def _parse_entity(stream: TokenStream) -> list:
    stream.advance()  # 'entity'
    name = stream.expect_ident(RESERVED).text
    stream.expect_punct("{")
    elements: list = [EntityDef(name)]
    while not stream.at(PUNCT, "}"):
        # 'key' is a marker only when another identifier follows; this keeps
        # plain attributes named 'key' parseable.
        is_key = False
        if stream.at(IDENT, "key") and stream.lookahead.kind == IDENT:
            stream.advance()
            is_key = True
        attr = stream.expect_ident(RESERVED).text
        stream.expect_punct(":")
        type_name = stream.expect_ident(RESERVED).text
        stream.expect_punct(";")
        elements.append(AttributeDef(name, attr, type_name, is_key=is_key))
    stream.expect_punct("}")
    return elements


def _parse_rel(stream: TokenStream) -> RelationDef:
    stream.advance()  # 'rel'
    name = stream.expect_ident(RESERVED).text
    stream.expect_punct("(")
    left = stream.expect_ident(RESERVED).text
    stream.expect_punct(",")
    right = stream.expect_ident(RESERVED).text
    stream.expect_punct(")")
    stream.expect_punct(";")
    return RelationDef(name, (left, right), None)
