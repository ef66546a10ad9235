"""Embedded mapping language for conversion scripts.

A script is a line-oriented program over canonical element sets. One
operation per line; blank lines and ``#`` comments are ignored::

    rename OLD to NEW                   # entities, attributes, relations, rules
    drop NAME                           # every schema/logic element named NAME
    synthesize attribute OWNER.NAME : TYPE [key]
    synthesize field NAME = TOKEN       # TOKEN is a canonical JSON literal
    cast OWNER.NAME to TYPE             # retype an attribute
    cast NAME to string|number          # convert record-field values
    map-field OLD to NEW                # rename a record field across rows

Execution is a pure function of the input set: no IO, no randomness, no
host-language escape hatch. Operations that reference names absent from the
set fail with ScriptRuntimeError rather than silently doing nothing, so a
bad script is observable on its first run.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import (
    AttributeDef,
    ElementSet,
    EntityDef,
    FormbridgeError,
    RecordField,
    RelationDef,
    RuleDef,
)
from .formalisms.tabular import canonical_token, token_value

GRAMMAR_HINT = (
    "one operation per line: 'rename OLD to NEW', 'drop NAME', "
    "'synthesize attribute OWNER.NAME : TYPE [key]', "
    "'synthesize field NAME = TOKEN', 'cast OWNER.NAME to TYPE', "
    "'cast NAME to string|number', 'map-field OLD to NEW'; "
    "'#' starts a comment")

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"


class ScriptSyntaxError(FormbridgeError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ScriptRuntimeError(FormbridgeError):
    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")


@dataclass(frozen=True, slots=True)
class Rename:
    old: str
    new: str


@dataclass(frozen=True, slots=True)
class Drop:
    name: str


@dataclass(frozen=True, slots=True)
class SynthAttribute:
    owner: str
    name: str
    type_name: str
    is_key: bool


@dataclass(frozen=True, slots=True)
class SynthField:
    name: str
    token: str


@dataclass(frozen=True, slots=True)
class CastAttribute:
    owner: str
    name: str
    type_name: str


@dataclass(frozen=True, slots=True)
class CastField:
    name: str
    target_type: str


@dataclass(frozen=True, slots=True)
class MapField:
    old: str
    new: str


Op = Rename | Drop | SynthAttribute | SynthField | CastAttribute | CastField | MapField

_PATTERNS = [
    (re.compile(rf"rename\s+({_IDENT})\s+to\s+({_IDENT})$"),
     lambda m: Rename(m.group(1), m.group(2))),
    (re.compile(rf"drop\s+({_IDENT})$"),
     lambda m: Drop(m.group(1))),
    (re.compile(rf"synthesize\s+attribute\s+({_IDENT})\.({_IDENT})\s*:\s*({_IDENT})"
                r"(\s+key)?$"),
     lambda m: SynthAttribute(m.group(1), m.group(2), m.group(3), bool(m.group(4)))),
    (re.compile(rf"synthesize\s+field\s+({_IDENT})\s*=\s*(\S.*)$"),
     lambda m: SynthField(m.group(1), m.group(2).strip())),
    (re.compile(rf"cast\s+({_IDENT})\.({_IDENT})\s+to\s+({_IDENT})$"),
     lambda m: CastAttribute(m.group(1), m.group(2), m.group(3))),
    (re.compile(rf"cast\s+({_IDENT})\s+to\s+(string|number)$"),
     lambda m: CastField(m.group(1), m.group(2))),
    (re.compile(rf"map-field\s+({_IDENT})\s+to\s+({_IDENT})$"),
     lambda m: MapField(m.group(1), m.group(2))),
]


def parse_script(body: str) -> list[Op]:
    """Parse a script body; raises ScriptSyntaxError on the first bad line."""
    ops: list[Op] = []
    for lineno, raw in enumerate(body.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        for pattern, build in _PATTERNS:
            m = pattern.match(line)
            if m:
                op = build(m)
                if isinstance(op, SynthField):
                    try:
                        token_value(op.token)
                    except ValueError as exc:
                        raise ScriptSyntaxError(lineno, str(exc)) from None
                ops.append(op)
                break
        else:
            raise ScriptSyntaxError(lineno, f"unrecognized operation {line!r}")
    return ops


def _rename_element(el, old: str, new: str):
    if isinstance(el, EntityDef):
        if el.name == old:
            return EntityDef(new)
        return el
    if isinstance(el, AttributeDef):
        owner = new if el.owner == old else el.owner
        name = new if el.name == old else el.name
        return AttributeDef(owner, name, el.type_name, el.is_key)
    if isinstance(el, RelationDef):
        name = new if el.name == old else el.name
        endpoints = tuple(new if e == old else e for e in el.endpoints)
        return RelationDef(name, endpoints, el.cardinality)
    if isinstance(el, RuleDef) and el.name == old:
        return RuleDef(new, el.antecedents, el.consequents)
    return el


def _named(el) -> str | None:
    if isinstance(el, (EntityDef, RelationDef, RuleDef)):
        return el.name
    if isinstance(el, AttributeDef):
        return el.name
    return None


def _apply(op: Op, step: int, elements: frozenset) -> frozenset:
    if isinstance(op, Rename):
        if not any(_named(el) == op.old or
                   (isinstance(el, AttributeDef) and el.owner == op.old)
                   for el in elements):
            raise ScriptRuntimeError(step, f"nothing named {op.old!r} to rename")
        return frozenset(_rename_element(el, op.old, op.new) for el in elements)
    if isinstance(op, Drop):
        keep = frozenset(el for el in elements if _named(el) != op.name)
        if keep == elements:
            raise ScriptRuntimeError(step, f"nothing named {op.name!r} to drop")
        return keep
    if isinstance(op, SynthAttribute):
        if not any(isinstance(el, EntityDef) and el.name == op.owner
                   for el in elements):
            raise ScriptRuntimeError(step, f"no entity {op.owner!r} to attach to")
        if any(isinstance(el, AttributeDef) and el.owner == op.owner
               and el.name == op.name for el in elements):
            raise ScriptRuntimeError(
                step, f"attribute {op.owner}.{op.name} already exists")
        return elements | {AttributeDef(op.owner, op.name, op.type_name, op.is_key)}
    if isinstance(op, SynthField):
        rows = {el.row for el in elements if isinstance(el, RecordField)}
        if any(isinstance(el, RecordField) and el.field == op.name
               for el in elements):
            raise ScriptRuntimeError(step, f"field {op.name!r} already exists")
        return elements | {RecordField(row, op.name, op.token) for row in rows}
    if isinstance(op, CastAttribute):
        target = next((el for el in elements if isinstance(el, AttributeDef)
                       and el.owner == op.owner and el.name == op.name), None)
        if target is None:
            raise ScriptRuntimeError(step, f"no attribute {op.owner}.{op.name}")
        replacement = AttributeDef(target.owner, target.name, op.type_name,
                                   target.is_key)
        return (elements - {target}) | {replacement}
    if isinstance(op, CastField):
        return _cast_field(op, step, elements)
    if isinstance(op, MapField):
        matches = {el for el in elements
                   if isinstance(el, RecordField) and el.field == op.old}
        if not matches:
            raise ScriptRuntimeError(step, f"no field {op.old!r} to map")
        if any(isinstance(el, RecordField) and el.field == op.new
               for el in elements):
            raise ScriptRuntimeError(step, f"field {op.new!r} already exists")
        renamed = {RecordField(el.row, op.new, el.value) for el in matches}
        return (elements - matches) | renamed
    raise ScriptRuntimeError(step, f"unknown operation {op!r}")


def _cast_field(op: CastField, step: int, elements: frozenset) -> frozenset:
    matches = {el for el in elements
               if isinstance(el, RecordField) and el.field == op.name}
    if not matches:
        raise ScriptRuntimeError(step, f"no field {op.name!r} to cast")
    out = set(elements) - matches
    for el in matches:
        value = token_value(el.value)
        if op.target_type == "string":
            token = el.value if isinstance(value, str) else canonical_token(el.value)
        else:
            if isinstance(value, bool) or value is None:
                raise ScriptRuntimeError(
                    step, f"cannot cast {el.value} in row {el.row} to number")
            if isinstance(value, str):
                try:
                    number = token_value(value)
                except ValueError:
                    raise ScriptRuntimeError(
                        step,
                        f"value {el.value} in row {el.row} is not numeric") from None
                if isinstance(number, bool) or not isinstance(number, (int, float)):
                    raise ScriptRuntimeError(
                        step, f"value {el.value} in row {el.row} is not numeric")
                token = canonical_token(number)
            else:
                token = el.value
        out.add(RecordField(el.row, op.name, token))
    return frozenset(out)


def execute(ops: list[Op], elements: ElementSet) -> ElementSet:
    """Run a parsed script; pure, deterministic, raises ScriptRuntimeError
    with the 1-based failing step."""
    current = frozenset(elements)
    for step, op in enumerate(ops, start=1):
        current = _apply(op, step, current)
    return current
