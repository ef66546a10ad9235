import pytest

from formbridge.core import (
    Artifact,
    AttributeDef,
    EntityDef,
    RecordField,
    RelationDef,
    RuleDef,
    UnrepresentableElement,
)
from formbridge.formalisms import PROBES
from formbridge.formalisms.tabular import canonical_token, token_value

UML_TEXT = "class Line { }\nclass Order { total: real; }\nOrder -- Line : has;\n"
ER_TEXT = "entity Line { key id: int; }\nentity Order { key id: int; }\nrel has (Order, Line);\n"
P9_TEXT = "# label(r1)\nperson(X) -> mortal(X).\n"
PK_TEXT = "rule r1: if person(X) then mortal(X)\n"
JSON_TEXT = '[\n  {"name": "Order", "rows": 2},\n  {"name": "Line", "rows": 5}\n]\n'
CSV_TEXT = 'name,rows\nOrder,2\nLine,5\n'

UML_ELEMENTS = frozenset({
    EntityDef("Line"),
    EntityDef("Order"),
    AttributeDef("Order", "total", "real"),
    RelationDef("has", ("Order", "Line")),
})
ER_ELEMENTS = frozenset({
    EntityDef("Line"),
    EntityDef("Order"),
    AttributeDef("Line", "id", "int", is_key=True),
    AttributeDef("Order", "id", "int", is_key=True),
    RelationDef("has", ("Order", "Line")),
})
RULE_ELEMENTS = frozenset({RuleDef("r1", ("person(X)",), ("mortal(X)",))})
RECORD_ELEMENTS = frozenset({
    RecordField(0, "name", '"Order"'),
    RecordField(0, "rows", "2"),
    RecordField(1, "name", '"Line"'),
    RecordField(1, "rows", "5"),
})

CANONICAL = [
    ("uml-mini", UML_ELEMENTS, UML_TEXT),
    ("er-mini", ER_ELEMENTS, ER_TEXT),
    ("fol-p9", RULE_ELEMENTS, P9_TEXT),
    ("fol-pk", RULE_ELEMENTS, PK_TEXT),
    ("tab-json", RECORD_ELEMENTS, JSON_TEXT),
    ("tab-csv", RECORD_ELEMENTS, CSV_TEXT),
]


@pytest.mark.parametrize("formalism,elements,text", CANONICAL, ids=lambda v: str(v)[:12])
def test_canonical_render(registry, formalism, elements, text):
    assert registry.render(elements, formalism) == text


@pytest.mark.parametrize("formalism,elements,text", CANONICAL, ids=lambda v: str(v)[:12])
def test_parse_recovers_canonical_elements(registry, formalism, elements, text):
    result = registry.parse(Artifact(formalism, text))
    assert result.ok and result.elements == elements
    assert registry.validate(Artifact(formalism, text)) == []


def test_probes_cover_every_formalism_and_validate_clean(registry):
    assert sorted(PROBES) == list(registry.ids())
    for formalism, text in PROBES.items():
        art = Artifact(formalism, text)
        assert registry.parse(art).elements
        assert registry.validate(art) == []


@pytest.mark.parametrize("formalism", ["uml-mini", "er-mini", "fol-p9", "fol-pk", "tab-csv"])
def test_empty_text_parses_to_empty_set(registry, formalism):
    result = registry.parse(Artifact(formalism, ""))
    assert result.ok and result.elements == frozenset()


def test_empty_json_needs_an_array(registry):
    result = registry.parse(Artifact("tab-json", ""))
    assert [d.code for d in result.diagnostics] == ["syntax.invalid-json"]
    assert registry.parse(Artifact("tab-json", "[]")).elements == frozenset()
    assert registry.render(frozenset(), "tab-json") == "[]\n"


PARSE_ERRORS = [
    ("uml-mini", "class Order\nclass Line\n", "syntax.unexpected-token", (2, 1)),
    ("uml-mini", "class A { x }\n", "syntax.unexpected-token", (1, 13)),
    ("er-mini", "bogus\n", "syntax.unexpected-token", (1, 1)),
    ("fol-p9", "p(x) -> q(x)", "syntax.unexpected-token", (1, 13)),
    ("fol-p9", "p(a).", "fol.non-horn", (1, 1)),
    ("fol-p9", "exists y (p(y) -> q(y)).", "fol.non-horn", (1, 1)),
    ("fol-p9", "p(x) -> q(x) -> r(x).", "fol.non-horn", (1, 1)),
    ("fol-p9", "all all (p(x) -> q(x)).", "syntax.reserved-word", (1, 5)),
    ("fol-p9", "p(x -> q(x).", "syntax.unbalanced-paren", (1, 5)),
    ("fol-pk", "rule r1: if p($x)\n", "syntax.unexpected-eof", (1, 18)),
    ("fol-pk", "rule r1: if p($all) then q($all)\n", "syntax.reserved-word", (1, 19)),
    ("fol-pk", "rule r1: if p(x) then q(x) extra\n", "syntax.unexpected-token", (1, 28)),
    ("tab-json", "{}", "tab.not-an-array", (1, 1)),
    ("tab-json", "[1]", "tab.not-an-object", (1, 1)),
    ("tab-json", '[{"a": 1, "a": 2}]', "tab.duplicate-field", (1, 1)),
    ("tab-json", "[{}]", "tab.empty-record", (1, 1)),
    ("tab-json", '[{"a": NaN}]', "syntax.invalid-json", (1, 1)),
    ("tab-json", '[{"a": [1]}]', "tab.nested-unsupported", (1, 1)),
    ("tab-csv", 'a,b\n"x,1\n', "syntax.unclosed-quote", (2, 1)),
    ("tab-csv", 'a\nx"y\n', "syntax.stray-quote", (2, 1)),
    ("tab-csv", "a,b\n1\n", "tab.ragged-row", (2, 1)),
    ("tab-csv", "a,a\n1,2\n", "tab.duplicate-field", (1, 1)),
]


@pytest.mark.parametrize("formalism,text,code,location", PARSE_ERRORS,
                         ids=lambda v: str(v)[:24])
def test_parse_error_codes_and_locations(registry, formalism, text, code, location):
    result = registry.parse(Artifact(formalism, text))
    assert not result.ok
    assert result.diagnostics[0].code == code
    assert result.diagnostics[0].location == location


STRUCTURAL = [
    ("er-mini", "entity A { key x: int; key y: int; }\n", "er.multiple-keys"),
    ("er-mini", "entity A { key x: int; }\nrel r (A, B);\n", "er.unknown-entity"),
    ("er-mini", "entity A { }\n", "er.missing-key"),
    ("uml-mini", "class A { }\nA -- B : r;\n", "uml.unknown-class"),
    ("tab-json", '[{"a": 1}, {"b": 2}]', "tab.key-mismatch"),
]


@pytest.mark.parametrize("formalism,text,code", STRUCTURAL, ids=lambda v: str(v)[:24])
def test_structural_checks_fire_after_a_clean_parse(registry, formalism, text, code):
    art = Artifact(formalism, text)
    assert registry.parse(art).ok
    assert [d.code for d in registry.validate(art)] == [code]


UNRENDERABLE = [
    ("uml-mini", frozenset({EntityDef("A"), AttributeDef("A", "id", "int", is_key=True)})),
    ("uml-mini", frozenset({EntityDef("class")})),
    ("uml-mini", frozenset({EntityDef("A"), RelationDef("r", ("A", "A", "A"))})),
    ("uml-mini", frozenset({EntityDef("A"), RelationDef("r", ("A", "B"))})),
    ("uml-mini", frozenset({EntityDef("A"), RelationDef("r", ("A", "A"), "x..y")})),
    ("er-mini", frozenset({EntityDef("A")})),
    ("er-mini", frozenset({EntityDef("A"), AttributeDef("A", "x", "int", True),
                           AttributeDef("A", "y", "int", True)})),
    ("er-mini", frozenset({EntityDef("A"), AttributeDef("A", "x", "int", True),
                           RelationDef("r", ("A", "A"), "1..2")})),
    ("fol-p9", frozenset({RuleDef("r", ("p($x)",), ("q($x)", "s($x)"))})),
    ("fol-p9", frozenset({RuleDef("r", ("p(x y)",), ("q(x)",))})),
    ("fol-pk", frozenset({RuleDef("r", ("then($x)",), ("q($x)",))})),
    ("tab-json", frozenset({RecordField(0, "a", "1"), RecordField(1, "a", "1"),
                            RecordField(1, "a", "2")})),
    ("tab-json", frozenset({RecordField(1, "a", "1")})),
    ("tab-json", frozenset({RecordField(0, "a", "Order")})),
    ("tab-json", frozenset({RecordField(0, "a", "1"), RecordField(1, "b", "1")})),
    ("tab-csv", frozenset({EntityDef("A")})),
]


@pytest.mark.parametrize("formalism,elements", UNRENDERABLE, ids=lambda v: str(v)[:20])
def test_render_rejects_out_of_scope_elements(registry, formalism, elements):
    with pytest.raises(UnrepresentableElement, match="not representable in " + formalism):
        registry.render(elements, formalism)


def test_pk_reserves_then_but_renders_other_keywordish_predicates(registry):
    # 'rule'/'if' are fine as predicates: position disambiguates them on re-parse
    els = frozenset({RuleDef("r", ("rule($x)", "if($x)"), ("q($x)",))})
    text = registry.render(els, "fol-pk")
    assert registry.parse(Artifact("fol-pk", text)).elements == els


def test_p9_clause_and_quantifier_forms(registry):
    clause = registry.parse(Artifact("fol-p9", "-man(x) | mortal(x)."))
    assert clause.elements == frozenset({RuleDef("r1", ("man(x)",), ("mortal(x)",))})
    quant = registry.parse(Artifact("fol-p9", "# label(z)\nall x (p(x) & q(x) -> r(x))."))
    assert quant.elements == frozenset({RuleDef("z", ("p($x)", "q($x)"), ("r($x)",))})
    nested = registry.parse(Artifact("fol-p9", "all y all x (p(x) -> q(x,y))."))
    assert nested.ok and len(nested.elements) == 1


def test_csv_quoting_corners(registry):
    cells = frozenset({
        RecordField(0, "a", '"1"'), RecordField(0, "b", "1"),
        RecordField(0, "c", '"true"'), RecordField(0, "d", "true"),
        RecordField(0, "e", "null"), RecordField(0, "f", '""'),
        RecordField(0, "g", '"x,y"'), RecordField(0, "h", '"he said \\"hi\\""'),
    })
    text = registry.render(cells, "tab-csv")
    assert text == 'a,b,c,d,e,f,g,h\n"1",1,"true",true,null,"","x,y","he said ""hi"""\n'
    assert registry.parse(Artifact("tab-csv", text)).elements == cells


def test_canonical_token_and_token_value_agree():
    for value in (None, True, False, 0, -3, 2.5, "", "x", "1", "true", 'say "hi"'):
        token = canonical_token(value)
        assert token_value(token) == value
    assert canonical_token("1") == '"1"'
    assert canonical_token(1) == "1"
    with pytest.raises(ValueError, match="not a scalar"):
        token_value("[1]")
