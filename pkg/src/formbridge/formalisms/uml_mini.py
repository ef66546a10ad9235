"""uml-mini: a minimal class-model notation.

Grammar::

    model := {class | assoc}
    class := "class" IDENT "{" {IDENT ":" TYPE ";"} "}"
    assoc := IDENT "--" IDENT ":" IDENT ["[" INT ".." (INT | "*") "]"] ";"

Classes have no key attributes; that asymmetry with er-mini is what makes
schema translation measurably lossy. Canonical rendering puts one declaration
per line, single-spaced, classes before associations, both sorted by name.
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
from ._scan import EOF, IDENT, INT, PUNCT, ScanError, TokenStream, scan

RESERVED = frozenset({"class"})

GRAMMAR_HINT = (
    'model := {class | assoc}; class := "class" IDENT "{" {IDENT ":" TYPE ";"} "}"; '
    'assoc := IDENT "--" IDENT ":" IDENT ["[" INT ".." (INT | "*") "]"] ";"'
)


class UmlMiniCodec:
    def grammar_hint(self) -> str:
        return GRAMMAR_HINT

    def parse(self, text: str) -> ParseResult:
        if not text.strip():
            return ParseResult(frozenset(), [])
        try:
            stream = TokenStream(scan(text))
            elements = _parse_model(stream)
        except ScanError as exc:
            return ParseResult(None, [exc.diagnostic])
        return ParseResult(frozenset(elements), [])

    def structural_diagnostics(self, elements: ElementSet) -> list[Diagnostic]:
        diags: list[Diagnostic] = []
        classes = {e.name for e in elements if isinstance(e, EntityDef)}
        for el in sorted(elements, key=element_sort_key):
            if isinstance(el, RelationDef):
                for endpoint in el.endpoints:
                    if endpoint not in classes:
                        diags.append(error(
                            "uml.unknown-class",
                            f"association {el.name!r} references undeclared class {endpoint!r}",
                            hint=f"declare 'class {endpoint} {{ }}'"))
        return diags

    def render(self, elements: ElementSet) -> str:
        classes: dict[str, list[AttributeDef]] = {}
        relations: list[RelationDef] = []
        for el in sorted(elements, key=element_sort_key):
            if isinstance(el, EntityDef):
                classes.setdefault(el.name, [])
            elif isinstance(el, AttributeDef):
                if el.is_key:
                    raise UnrepresentableElement(el, "uml-mini", "classes have no key attributes")
            elif isinstance(el, RelationDef):
                if len(el.endpoints) != 2:
                    raise UnrepresentableElement(el, "uml-mini", "associations are binary")
                relations.append(el)
            else:
                raise UnrepresentableElement(el, "uml-mini")
        class_names = {e.name for e in elements if isinstance(e, EntityDef)}
        for el in sorted(elements, key=element_sort_key):
            if isinstance(el, AttributeDef):
                if el.owner not in class_names:
                    raise UnrepresentableElement(el, "uml-mini", f"no class {el.owner!r}")
                classes[el.owner].append(el)
        for rel in relations:
            for endpoint in rel.endpoints:
                if endpoint not in class_names:
                    raise UnrepresentableElement(rel, "uml-mini", f"no class {endpoint!r}")
            if rel.cardinality is not None and not _valid_cardinality(rel.cardinality):
                raise UnrepresentableElement(rel, "uml-mini",
                                             f"bad cardinality {rel.cardinality!r}")
        for name, attrs in classes.items():
            _check_ident(name)
            for attr in attrs:
                _check_ident(attr.name)
                _check_ident(attr.type_name)
        lines = []
        for name in sorted(classes):
            body = " ".join(f"{a.name}: {a.type_name};" for a in classes[name])
            lines.append(f"class {name} {{ {body} }}" if body else f"class {name} {{ }}")
        for rel in relations:
            _check_ident(rel.name)
            left, right = rel.endpoints
            card = f" [{rel.cardinality}]" if rel.cardinality is not None else ""
            lines.append(f"{left} -- {right} : {rel.name}{card};")
        return "\n".join(lines) + "\n" if lines else ""


def _check_ident(name: str) -> None:
    if not name or name in RESERVED or not (name[0].isalpha() or name[0] == "_") \
            or not all(c.isalnum() or c == "_" for c in name):
        raise UnrepresentableElement(EntityDef(name), "uml-mini", f"bad identifier {name!r}")


def _valid_cardinality(card: str) -> bool:
    lo, sep, hi = card.partition("..")
    return bool(sep) and lo.isdigit() and (hi.isdigit() or hi == "*")


def _parse_model(stream: TokenStream) -> list:
    elements = []
    while not stream.at(EOF):
        if stream.at(IDENT, "class"):
            elements.extend(_parse_class(stream))
        elif stream.at(IDENT):
            elements.append(_parse_assoc(stream))
        else:
            tok = stream.current
            raise ScanError(error("syntax.unexpected-token",
                                  f"expected 'class' or an association, found {tok.text!r}",
                                  (tok.line, tok.col)))
    return elements


def _parse_class(stream: TokenStream) -> list:
    stream.advance()  # 'class'
    name = stream.expect_ident(RESERVED).text
    stream.expect_punct("{")
    elements: list = [EntityDef(name)]
    while not stream.at(PUNCT, "}"):
        attr = stream.expect_ident(RESERVED).text
        stream.expect_punct(":")
        type_name = stream.expect_ident(RESERVED).text
        stream.expect_punct(";")
        elements.append(AttributeDef(name, attr, type_name, is_key=False))
    stream.expect_punct("}")
    return elements


def _parse_assoc(stream: TokenStream) -> RelationDef:
    left = stream.expect_ident(RESERVED).text
    stream.expect_punct("--")
    right = stream.expect_ident(RESERVED).text
    stream.expect_punct(":")
    name = stream.expect_ident(RESERVED).text
    cardinality = None
    if stream.at(PUNCT, "["):
        stream.advance()
        lo = stream.current
        if lo.kind != INT:
            raise ScanError(error("syntax.unexpected-token",
                                  f"expected a lower bound, found {lo.text!r}",
                                  (lo.line, lo.col)))
        stream.advance()
        stream.expect_punct("..")
        hi = stream.current
        if hi.kind == INT or (hi.kind == PUNCT and hi.text == "*"):
            stream.advance()
        else:
            raise ScanError(error("syntax.unexpected-token",
                                  f"expected an upper bound or '*', found {hi.text!r}",
                                  (hi.line, hi.col)))
        stream.expect_punct("]")
        cardinality = f"{lo.text}..{hi.text}"
    stream.expect_punct(";")
    return RelationDef(name, (left, right), cardinality)
