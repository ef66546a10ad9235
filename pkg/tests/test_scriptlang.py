import pytest

from formbridge.core import AttributeDef, EntityDef, RecordField, RelationDef, RuleDef
from formbridge.scriptlang import (
    CastAttribute,
    CastField,
    Drop,
    MapField,
    Rename,
    ScriptRuntimeError,
    ScriptSyntaxError,
    SynthAttribute,
    SynthField,
    execute,
    parse_script,
)

SCHEMA = frozenset({
    EntityDef("Order"),
    AttributeDef("Order", "total", "real"),
    RelationDef("has", ("Order", "Order"), "1..*"),
    RuleDef("Order", ("p($x)",), ("q($x)",)),
})

RECORDS = frozenset({
    RecordField(0, "qty", "2"),
    RecordField(0, "name", '"ok"'),
    RecordField(1, "qty", "5"),
    RecordField(1, "name", '"no"'),
})


def test_parse_all_operation_forms():
    body = """\
# comment then a blank line

rename Order to Invoice
drop has
synthesize attribute Invoice.id : int key
synthesize attribute Invoice.note : string
synthesize field src = "legacy"
cast Invoice.total to decimal
cast qty to string
map-field name to label
"""
    assert parse_script(body) == [
        Rename("Order", "Invoice"),
        Drop("has"),
        SynthAttribute("Invoice", "id", "int", True),
        SynthAttribute("Invoice", "note", "string", False),
        SynthField("src", '"legacy"'),
        CastAttribute("Invoice", "total", "decimal"),
        CastField("qty", "string"),
        MapField("name", "label"),
    ]


def test_parse_rejects_unknown_op_with_line_number():
    with pytest.raises(ScriptSyntaxError, match="line 3: unrecognized operation"):
        parse_script("drop a\n\nfrobnicate all\n")


def test_parse_rejects_non_canonical_synth_token():
    with pytest.raises(ScriptSyntaxError, match="line 1:"):
        parse_script("synthesize field a = Order\n")


def test_rename_touches_owners_endpoints_and_rules():
    out = execute([Rename("Order", "Invoice")], SCHEMA)
    assert out == frozenset({
        EntityDef("Invoice"),
        AttributeDef("Invoice", "total", "real"),
        RelationDef("has", ("Invoice", "Invoice"), "1..*"),
        RuleDef("Invoice", ("p($x)",), ("q($x)",)),
    })
    with pytest.raises(ScriptRuntimeError, match="step 1: nothing named 'Ghost' to rename"):
        execute([Rename("Ghost", "G")], SCHEMA)


def test_drop_removes_by_name_without_cascading():
    out = execute([Drop("has")], SCHEMA)
    assert out == SCHEMA - {RelationDef("has", ("Order", "Order"), "1..*")}
    # dropping the entity leaves its attribute behind
    out = execute([Drop("Order")], SCHEMA)
    assert AttributeDef("Order", "total", "real") in out
    assert EntityDef("Order") not in out
    with pytest.raises(ScriptRuntimeError, match="step 1: nothing named 'zz' to drop"):
        execute([Drop("zz")], SCHEMA)


def test_synthesize_attribute():
    out = execute([SynthAttribute("Order", "id", "int", True)], SCHEMA)
    assert AttributeDef("Order", "id", "int", is_key=True) in out
    with pytest.raises(ScriptRuntimeError, match="no entity 'Ghost'"):
        execute([SynthAttribute("Ghost", "id", "int", False)], SCHEMA)
    with pytest.raises(ScriptRuntimeError, match="attribute Order.total already exists"):
        execute([SynthAttribute("Order", "total", "text", False)], SCHEMA)


def test_synthesize_field_covers_every_row():
    out = execute([SynthField("src", '"legacy"')], RECORDS)
    assert RecordField(0, "src", '"legacy"') in out
    assert RecordField(1, "src", '"legacy"') in out
    with pytest.raises(ScriptRuntimeError, match="field 'qty' already exists"):
        execute([SynthField("qty", "0")], RECORDS)


def test_cast_attribute():
    out = execute([CastAttribute("Order", "total", "decimal")], SCHEMA)
    assert AttributeDef("Order", "total", "decimal") in out
    assert AttributeDef("Order", "total", "real") not in out
    with pytest.raises(ScriptRuntimeError, match="no attribute Order.nope"):
        execute([CastAttribute("Order", "nope", "int")], SCHEMA)


def test_cast_field_to_string_quotes_the_token_text():
    out = execute([CastField("qty", "string")], RECORDS)
    assert RecordField(0, "qty", '"2"') in out
    assert RecordField(1, "qty", '"5"') in out
    # already-string cells are untouched
    out = execute([CastField("name", "string")], RECORDS)
    assert RecordField(0, "name", '"ok"') in out


def test_cast_field_to_number():
    cells = frozenset({RecordField(0, "n", '"2.5"'), RecordField(1, "n", "7")})
    out = execute([CastField("n", "number")], cells)
    assert out == frozenset({RecordField(0, "n", "2.5"), RecordField(1, "n", "7")})
    with pytest.raises(ScriptRuntimeError, match="is not numeric"):
        execute([CastField("name", "number")], RECORDS)
    with pytest.raises(ScriptRuntimeError, match="cannot cast"):
        execute([CastField("b", "number")], frozenset({RecordField(0, "b", "true")}))
    with pytest.raises(ScriptRuntimeError, match="no field 'zz' to cast"):
        execute([CastField("zz", "number")], RECORDS)


def test_map_field():
    out = execute([MapField("name", "label")], RECORDS)
    assert RecordField(0, "label", '"ok"') in out
    assert not any(f.field == "name" for f in out)
    with pytest.raises(ScriptRuntimeError, match="no field 'zz' to map"):
        execute([MapField("zz", "w")], RECORDS)
    with pytest.raises(ScriptRuntimeError, match="field 'qty' already exists"):
        execute([MapField("name", "qty")], RECORDS)


def test_step_numbers_are_one_based_over_parsed_ops():
    ops = parse_script("drop has\ndrop has\n")
    with pytest.raises(ScriptRuntimeError, match="step 2: nothing named 'has' to drop"):
        execute(ops, SCHEMA)


def test_execute_is_pure_and_repeatable():
    ops = parse_script("rename Order to Invoice\nsynthesize attribute Invoice.id : int key\n")
    first = execute(ops, SCHEMA)
    second = execute(ops, SCHEMA)
    assert first == second
    assert EntityDef("Order") in SCHEMA
