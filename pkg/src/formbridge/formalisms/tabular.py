"""tab-json and tab-csv: flat record tables over one canonical form.

Cells canonicalize to JSON literal tokens, so ``1`` (number) and ``"1"``
(string) stay distinct in both surfaces: JSON carries the distinction
natively, CSV carries it through quoting. A bare CSV cell that reads as a
number, boolean, or null is that literal; a quoted cell is always a string.
Rendering quotes exactly the strings that would otherwise be misread, which
is what makes the pair a bijection on flat homogeneous records.

tab-json is an array of flat objects with identical key sets; tab-csv is a
header line plus data rows with RFC-style double-quote escaping. The CSV
scanner is hand-rolled because the stdlib reader hides whether a cell was
quoted, and quoted-ness is load-bearing here.
"""

from __future__ import annotations

import json
import re

from ..core import (
    Diagnostic,
    ElementSet,
    ParseResult,
    RecordField,
    UnrepresentableElement,
    error,
)

JSON_GRAMMAR_HINT = (
    "UTF-8 JSON array of flat objects; every object has the same key set; "
    'values are scalars (string, number, true, false, null). '
    'Example: [{"a": 1, "b": "x"}]')

CSV_GRAMMAR_HINT = (
    "first line: comma-separated header; then one row per line, same cell "
    "count as the header; double quotes wrap cells containing commas, "
    "quotes, or newlines (embedded quotes doubled). Bare cells that read as "
    "a number, true, false, or null are those literals; quoted cells are "
    'strings. Example: a,b\\n1,"x"')

_NUMBER_RE = re.compile(r"-?(0|[1-9][0-9]*)(\.[0-9]+)?([eE][+-]?[0-9]+)?")
_WORD_LITERALS = ("true", "false", "null")


class _RejectedConstant(Exception):
    def __init__(self, text: str):
        self.text = text
        super().__init__(text)


def _reject_constant(text: str) -> object:
    raise _RejectedConstant(text)


class _JsonObj(list):
    """Marker for decoded JSON objects (as key/value pair lists), so empty
    objects stay distinguishable from empty arrays."""


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def canonical_token(value: object) -> str:
    """Canonical JSON literal token for a scalar value."""
    return json.dumps(value, ensure_ascii=False)


def token_value(token: str) -> object:
    """Decode a canonical token back to its scalar. Raises ValueError when
    the token is not the canonical spelling of a scalar."""
    try:
        value = json.loads(token, parse_constant=_reject_constant)
    except (json.JSONDecodeError, _RejectedConstant):
        raise ValueError(f"not a canonical scalar token: {token!r}") from None
    if not isinstance(value, (str, int, float, bool)) and value is not None:
        raise ValueError(f"not a scalar: {token!r}")
    if canonical_token(value) != token:
        raise ValueError(f"token {token!r} is not canonical "
                         f"(expected {canonical_token(value)!r})")
    return value


def _fields_from_records(records: list[tuple[int, dict[str, str]]]) -> frozenset:
    return frozenset(
        RecordField(row, field, token)
        for row, cells in records
        for field, token in cells.items())


def _rows_for_render(elements: ElementSet, target: str) \
        -> tuple[list[str], list[dict[str, str]]]:
    """Validate an ElementSet for tabular rendering; returns (sorted field
    names, per-row token dicts in row order)."""
    by_row: dict[int, dict[str, str]] = {}
    for el in elements:
        if not isinstance(el, RecordField):
            raise UnrepresentableElement(el, target, "only flat records are expressible")
        cells = by_row.setdefault(el.row, {})
        if el.field in cells:
            raise UnrepresentableElement(
                el, target, f"conflicting values for field {el.field!r} in row {el.row}")
        try:
            token_value(el.value)
        except ValueError as exc:
            raise UnrepresentableElement(el, target, str(exc)) from None
        cells[el.field] = el.value
    if not by_row:
        return [], []
    if sorted(by_row) != list(range(len(by_row))):
        missing = next(i for i in range(len(by_row)) if i not in by_row)
        raise UnrepresentableElement(
            sorted(elements, key=lambda e: e.row)[0], target,
            f"row indices must be contiguous from 0; row {missing} is missing")
    fields = sorted(by_row[0])
    for row in range(len(by_row)):
        if sorted(by_row[row]) != fields:
            raise UnrepresentableElement(
                sorted(elements, key=lambda e: (e.row, e.field))[0], target,
                f"row {row} has fields {sorted(by_row[row])}, expected {fields}")
    return fields, [by_row[row] for row in range(len(by_row))]


def _structural(elements: ElementSet) -> list[Diagnostic]:
    by_row: dict[int, set[str]] = {}
    for el in elements:
        if isinstance(el, RecordField):
            by_row.setdefault(el.row, set()).add(el.field)
    diags: list[Diagnostic] = []
    if not by_row:
        return diags
    first = by_row.get(0, set())
    for row in sorted(by_row):
        if by_row[row] != first:
            diags.append(error(
                "tab.key-mismatch",
                f"row {row} has fields {sorted(by_row[row])}, "
                f"row 0 has {sorted(first)}"))
    gaps = [i for i in range(len(by_row)) if i not in by_row]
    if gaps:
        diags.append(error(
            "tab.row-gap", f"row indices skip {gaps[0]}; rows must be contiguous from 0"))
    return diags


# ---------------------------------------------------------------------------
# tab-json
# ---------------------------------------------------------------------------


def _record_offsets(text: str) -> list[int]:
    """Start offset of each top-level array element, for error line numbers.
    Tracks string state so braces inside strings do not confuse depth."""
    offsets: list[int] = []
    depth = 0
    in_string = False
    escaped = False
    expecting = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        if expecting and not ch.isspace() and ch != "]":
            offsets.append(i)
            expecting = False
        if ch in "[{":
            if depth == 0 and ch == "[":
                expecting = True
            depth += 1
        elif ch in "]}":
            depth -= 1
        elif ch == "," and depth == 1:
            expecting = True
    return offsets


def _find_bad_constant_line(text: str) -> int:
    for m in re.finditer(r"NaN|Infinity", text):
        # Recompute string state up to the match; desk-scale inputs keep
        # this cheap.
        in_string = False
        escaped = False
        for ch in text[:m.start()]:
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
        if not in_string:
            return _line_of(text, m.start())
    return 1


class TabJsonCodec:
    def grammar_hint(self) -> str:
        return JSON_GRAMMAR_HINT

    def parse(self, text: str) -> ParseResult:
        try:
            doc = json.loads(text, object_pairs_hook=_JsonObj,
                             parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            return ParseResult(None, [error(
                "syntax.invalid-json", exc.msg, (exc.lineno, exc.colno))])
        except _RejectedConstant as exc:
            line = _find_bad_constant_line(text)
            return ParseResult(None, [error(
                "syntax.invalid-json",
                f"{exc.text} is not valid JSON", (line, 1))])
        if not isinstance(doc, list) or isinstance(doc, _JsonObj):
            return ParseResult(None, [error(
                "tab.not-an-array", "top level must be an array of objects", (1, 1))])
        offsets = _record_offsets(text)
        records: list[tuple[int, dict[str, str]]] = []
        for index, record in enumerate(doc):
            line = _line_of(text, offsets[index]) if index < len(offsets) else 1
            if not isinstance(record, _JsonObj):
                return ParseResult(None, [error(
                    "tab.not-an-object",
                    f"array item {index} is not an object", (line, 1))])
            if not record:
                return ParseResult(None, [error(
                    "tab.empty-record",
                    f"record {index} has no fields", (line, 1))])
            cells: dict[str, str] = {}
            for key, value in record:
                if key in cells:
                    return ParseResult(None, [error(
                        "tab.duplicate-field",
                        f"record {index} repeats field {key!r}", (line, 1))])
                if isinstance(value, (list, _JsonObj)):
                    return ParseResult(None, [error(
                        "tab.nested-unsupported",
                        f"field {key!r} in record {index} holds a nested "
                        "value; only scalars are supported", (line, 1))])
                cells[key] = canonical_token(value)
            records.append((index, cells))
        return ParseResult(_fields_from_records(records), [])

    def structural_diagnostics(self, elements: ElementSet) -> list[Diagnostic]:
        return _structural(elements)

    def render(self, elements: ElementSet) -> str:
        fields, rows = _rows_for_render(elements, "tab-json")
        if not rows:
            return "[]\n"
        lines = []
        for cells in rows:
            record = {field: token_value(cells[field]) for field in fields}
            lines.append("  " + json.dumps(record, ensure_ascii=False,
                                           sort_keys=True,
                                           separators=(", ", ": ")))
        return "[\n" + ",\n".join(lines) + "\n]\n"


# ---------------------------------------------------------------------------
# tab-csv
# ---------------------------------------------------------------------------


class _CsvScanError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.message)


def _scan_csv(text: str) -> list[tuple[int, list[tuple[str, bool]]]]:
    """Rows of (cell text, was_quoted) pairs, each row tagged with its
    starting line. Hand-rolled to preserve quoted-ness."""
    rows: list[tuple[int, list[tuple[str, bool]]]] = []
    line = 1
    row_line = 1
    cells: list[tuple[str, bool]] = []
    i = 0
    n = len(text)
    while i < n:
        # One cell per iteration; cells end at ',', rows at newline.
        if text[i] == '"':
            quote_line = line
            i += 1
            chars: list[str] = []
            while True:
                if i >= n:
                    raise _CsvScanError(error(
                        "syntax.unclosed-quote", "unterminated quoted cell",
                        (quote_line, 1)))
                ch = text[i]
                if ch == '"':
                    if text[i + 1:i + 2] == '"':
                        chars.append('"')
                        i += 2
                        continue
                    i += 1
                    break
                if ch == "\n":
                    line += 1
                chars.append(ch)
                i += 1
            cell = ("".join(chars), True)
        else:
            end = i
            while end < n and text[end] not in ",\n":
                if text[end] == '"':
                    raise _CsvScanError(error(
                        "syntax.stray-quote",
                        "quote inside an unquoted cell; quote the whole cell",
                        (line, 1)))
                end += 1
            raw = text[i:end]
            if end < n and text[end] == "\n" and raw.endswith("\r"):
                raw = raw[:-1]
            cell = (raw, False)
            i = end
        cells.append(cell)
        if i >= n:
            break
        if text[i] == ",":
            i += 1
            continue
        if text[i] == "\n":
            rows.append((row_line, cells))
            cells = []
            i += 1
            line += 1
            row_line = line
            continue
        raise _CsvScanError(error(
            "syntax.stray-quote",
            "quoted cell must be followed by a comma or end of line", (line, 1)))
    if cells:
        rows.append((row_line, cells))
    return rows


def _cell_token(cell: str, quoted: bool) -> str:
    if quoted:
        return canonical_token(cell)
    if cell in _WORD_LITERALS:
        return cell
    if _NUMBER_RE.fullmatch(cell):
        return canonical_token(json.loads(cell))
    return canonical_token(cell)


def _render_cell_text(text_value: str) -> str:
    needs_quoting = (
        text_value == ""
        or any(ch in text_value for ch in ',"\n\r')
        or text_value in _WORD_LITERALS
        or _NUMBER_RE.fullmatch(text_value) is not None)
    if needs_quoting:
        return '"' + text_value.replace('"', '""') + '"'
    return text_value


def _render_token(token: str) -> str:
    value = token_value(token)
    if isinstance(value, str):
        return _render_cell_text(value)
    return token


class TabCsvCodec:
    def grammar_hint(self) -> str:
        return CSV_GRAMMAR_HINT

    def parse(self, text: str) -> ParseResult:
        if not text.strip():
            return ParseResult(frozenset(), [])
        try:
            rows = _scan_csv(text)
        except _CsvScanError as exc:
            return ParseResult(None, [exc.diagnostic])
        header_line, header_cells = rows[0]
        fields = [cell for cell, _ in header_cells]
        seen: set[str] = set()
        for field in fields:
            if field in seen:
                return ParseResult(None, [error(
                    "tab.duplicate-field",
                    f"header repeats column {field!r}", (header_line, 1))])
            seen.add(field)
        records: list[tuple[int, dict[str, str]]] = []
        for index, (row_line, cells) in enumerate(rows[1:]):
            if len(cells) != len(fields):
                return ParseResult(None, [error(
                    "tab.ragged-row",
                    f"row {index} has {len(cells)} cells, header has "
                    f"{len(fields)}", (row_line, 1))])
            records.append((index, {
                field: _cell_token(cell, quoted)
                for field, (cell, quoted) in zip(fields, cells)}))
        return ParseResult(_fields_from_records(records), [])

    def structural_diagnostics(self, elements: ElementSet) -> list[Diagnostic]:
        return _structural(elements)

    def render(self, elements: ElementSet) -> str:
        fields, rows = _rows_for_render(elements, "tab-csv")
        if not rows:
            return ""
        lines = [",".join(_render_cell_text(f) for f in fields)]
        for cells in rows:
            lines.append(",".join(_render_token(cells[field]) for field in fields))
        return "\n".join(lines) + "\n"
