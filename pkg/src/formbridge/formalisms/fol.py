"""fol-p9 and fol-pk: two Horn-rule surfaces over one canonical form.

fol-p9 is Prover9-flavoured: period-terminated formulas, an optional
``all``-quantifier prefix, ``->`` implications, or clause form with ``|``
and ``-`` negation. An optional ``# label(NAME)`` comment names the next
formula; unlabeled formulas get positional names r1, r2, ...

fol-pk is Pyke-flavoured: one ``rule NAME: if ATOM {& ATOM} then ATOM``
per line with ``$``-prefixed variables.

Both parse to RuleDef elements with canonical atom strings
(``pred($var,const)``), so transliterating between them is set identity.
Anything outside the shared Horn fragment (facts, existentials, negated
or disjunctive heads) is rejected with ``fol.non-horn``.
"""

from __future__ import annotations

import re

from ..core import (
    Diagnostic,
    ElementSet,
    ParseResult,
    RuleDef,
    UnrepresentableElement,
    element_sort_key,
    error,
)
from ._scan import EOF, IDENT, PUNCT, ScanError, Token

# Binding a variable with one of these names would make the rendered text
# ambiguous with the quantifier keywords, so both codecs reserve them.
RESERVED_VARS = frozenset({"all", "exists"})

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_LABEL_RE = re.compile(r"^#\s*label\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)\s*$")
_ATOM_RE = re.compile(
    r"^([A-Za-z_][A-Za-z0-9_]*)"
    r"\((\$?[A-Za-z_][A-Za-z0-9_]*(?:,\$?[A-Za-z_][A-Za-z0-9_]*)*)\)$")

P9_GRAMMAR_HINT = (
    'theory := {["# label(" NAME ")"] formula}; '
    'formula := {"all" VAR} [ "(" ] body [ ")" ] "."; '
    'body := ATOM {"&" ATOM} "->" ATOM | ["-"] ATOM {"|" ["-"] ATOM}; '
    'ATOM := IDENT "(" TERM {"," TERM} ")". '
    "Horn only: clauses need exactly one positive literal and at least one "
    "negative; bare facts are out. Identifiers are constants unless bound by "
    '"all". Example: all x (man(x) -> mortal(x)).')

PK_GRAMMAR_HINT = (
    'rules := {rule LF}; rule := "rule" NAME ":" "if" ATOM {"&" ATOM} '
    '"then" ATOM; ATOM := IDENT "(" TERM {"," TERM} ")"; '
    'TERM := "$" VAR | CONST. One rule per line. '
    "Example: rule r1: if man($x) then mortal($x)")


def split_atom(atom: str) -> tuple[str, tuple[str, ...]]:
    """Split a canonical atom string into (predicate, terms). Terms keep
    their ``$`` prefix. Raises ValueError on anything non-canonical."""
    m = _ATOM_RE.match(atom)
    if not m:
        raise ValueError(f"not a canonical atom: {atom!r}")
    return m.group(1), tuple(m.group(2).split(","))


def _rule_terms(rule: RuleDef) -> tuple[set[str], set[str]]:
    """All (variable-names-without-$, constant-names) used in a rule."""
    variables: set[str] = set()
    constants: set[str] = set()
    for atom in rule.antecedents + rule.consequents:
        for term in split_atom(atom)[1]:
            if term.startswith("$"):
                variables.add(term[1:])
            else:
                constants.add(term)
    return variables, constants


def _check_rule_renderable(rule: RuleDef, target: str) -> None:
    if not _IDENT_RE.fullmatch(rule.name):
        raise UnrepresentableElement(rule, target, f"bad rule name {rule.name!r}")
    if len(rule.consequents) != 1:
        raise UnrepresentableElement(rule, target, "Horn rules have exactly one head")
    try:
        variables, constants = _rule_terms(rule)
    except ValueError as exc:
        raise UnrepresentableElement(rule, target, str(exc)) from None
    reserved = variables & RESERVED_VARS
    if reserved:
        raise UnrepresentableElement(
            rule, target, f"variable name {sorted(reserved)[0]!r} is reserved")
    clash = variables & constants
    if clash:
        # Rendering would emit the constant bare while binding a variable of
        # the same name, silently turning it into that variable on re-parse.
        raise UnrepresentableElement(
            rule, target,
            f"{sorted(clash)[0]!r} is used both as variable and constant")


def _sorted_rules(elements: ElementSet, target: str) -> list[RuleDef]:
    rules: list[RuleDef] = []
    for el in sorted(elements, key=element_sort_key):
        if not isinstance(el, RuleDef):
            raise UnrepresentableElement(el, target, "only Horn rules are expressible")
        _check_rule_renderable(el, target)
        rules.append(el)
    return rules


# ---------------------------------------------------------------------------
# fol-p9
# ---------------------------------------------------------------------------

LABEL = "label"
_P9_PUNCT = ("->", "(", ")", ",", ".", "&", "|", "-")


def _scan_p9(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            end = text.find("\n", i)
            end = n if end < 0 else end
            m = _LABEL_RE.match(text[i:end])
            if m:
                tokens.append(Token(LABEL, m.group(1), line, col))
            # Non-label # lines are plain comments.
            col += end - i
            i = end
            continue
        if text[i:i + 2] == "->":
            tokens.append(Token(PUNCT, "->", line, col))
            i, col = i + 2, col + 2
            continue
        if ch in "(),.&|-":
            tokens.append(Token(PUNCT, ch, line, col))
            i, col = i + 1, col + 1
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token(IDENT, m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        raise ScanError(error(
            "syntax.unexpected-char", f"unexpected character {ch!r}", (line, col)))
    tokens.append(Token(EOF, "", line, col))
    return tokens


class _P9Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    @property
    def lookahead(self) -> Token:
        return self.tokens[min(self.pos + 1, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.current
        return tok.kind == kind and (text is None or tok.text == text)

    def fail(self, code: str, message: str) -> ScanError:
        tok = self.current
        return ScanError(error(code, message, (tok.line, tok.col)))

    def parse_theory(self) -> list[RuleDef]:
        rules: list[RuleDef] = []
        index = 0
        label: str | None = None
        while not self.at(EOF):
            if self.at(LABEL):
                label = self.advance().text
                continue
            index += 1
            rules.append(self.parse_formula(label or f"r{index}"))
            label = None
        return rules

    def parse_formula(self, name: str) -> RuleDef:
        start = self.current
        bound = self.parse_quantifiers()
        parenthesized = False
        if self.at(PUNCT, "("):
            self.advance()
            parenthesized = True
        literals, separators = self.parse_literals(bound)
        if parenthesized:
            if not self.at(PUNCT, ")"):
                raise self.fail("syntax.unbalanced-paren", "unclosed '(' in formula")
            self.advance()
        elif self.at(PUNCT, ")"):
            raise self.fail("syntax.unbalanced-paren", "unmatched ')'")
        if not self.at(PUNCT, "."):
            raise self.fail(
                "syntax.unexpected-token",
                f"expected '.' after formula, found {self.current.text!r}")
        self.advance()
        return self.classify(name, start, literals, separators)

    def parse_quantifiers(self) -> set[str]:
        bound: set[str] = set()
        # 'all x' is a quantifier only when an identifier follows; 'all(...)'
        # is an ordinary atom named 'all'.
        while self.at(IDENT) and self.current.text in ("all", "exists") \
                and self.lookahead.kind == IDENT:
            keyword = self.advance()
            if keyword.text == "exists":
                raise ScanError(error(
                    "fol.non-horn",
                    "existential quantifiers are outside the Horn fragment",
                    (keyword.line, keyword.col)))
            var = self.advance()
            if var.text in RESERVED_VARS:
                raise ScanError(error(
                    "syntax.reserved-word",
                    f"{var.text!r} cannot be used as a variable name",
                    (var.line, var.col)))
            bound.add(var.text)
        return bound

    def parse_literals(self, bound: set[str]) -> tuple[list[tuple[bool, str]], list[str]]:
        """Flat list of (negated, canonical-atom) plus the separators between
        them; classification into implication or clause form happens after."""
        literals: list[tuple[bool, str]] = []
        separators: list[str] = []
        while True:
            negated = False
            if self.at(PUNCT, "-"):
                self.advance()
                negated = True
            literals.append((negated, self.parse_atom(bound)))
            if self.at(PUNCT) and self.current.text in ("&", "|", "->"):
                separators.append(self.advance().text)
                continue
            return literals, separators

    def parse_atom(self, bound: set[str]) -> str:
        if not self.at(IDENT):
            raise self.fail(
                "syntax.unexpected-token",
                f"expected an atom, found {self.current.text or 'end of input'!r}")
        pred = self.advance().text
        if not self.at(PUNCT, "("):
            raise self.fail(
                "syntax.unexpected-token", f"atom {pred!r} needs a '(term,...)' argument list")
        self.advance()
        terms: list[str] = []
        while True:
            if not self.at(IDENT):
                raise self.fail("syntax.unbalanced-paren", f"unclosed '(' in atom {pred!r}")
            term = self.advance().text
            terms.append(f"${term}" if term in bound else term)
            if self.at(PUNCT, ","):
                self.advance()
                continue
            if self.at(PUNCT, ")"):
                self.advance()
                return f"{pred}({','.join(terms)})"
            raise self.fail("syntax.unbalanced-paren", f"unclosed '(' in atom {pred!r}")

    def classify(self, name: str, start: Token, literals: list[tuple[bool, str]],
                 separators: list[str]) -> RuleDef:
        non_horn = ScanError(error(
            "fol.non-horn",
            "only Horn implications (atoms -> atom) or clauses with exactly "
            "one positive literal are supported",
            (start.line, start.col)))
        if "->" in separators:
            arrow = separators.index("->")
            if any(sep != "&" for sep in separators[:arrow]) \
                    or separators[arrow + 1:] \
                    or any(negated for negated, _ in literals):
                raise non_horn
            antecedents = tuple(atom for _, atom in literals[:arrow + 1])
            return RuleDef(name, antecedents, (literals[arrow + 1][1],))
        if separators and all(sep == "|" for sep in separators):
            positive = [atom for negated, atom in literals if not negated]
            negative = [atom for negated, atom in literals if negated]
            if len(positive) != 1 or not negative:
                raise non_horn
            return RuleDef(name, tuple(negative), tuple(positive))
        # Bare facts, conjunction-only bodies, and mixed separators all fall
        # outside the fragment.
        raise non_horn


class FolP9Codec:
    def grammar_hint(self) -> str:
        return P9_GRAMMAR_HINT

    def parse(self, text: str) -> ParseResult:
        try:
            parser = _P9Parser(_scan_p9(text))
            rules = parser.parse_theory()
        except ScanError as exc:
            return ParseResult(None, [exc.diagnostic])
        return ParseResult(frozenset(rules), [])

    def structural_diagnostics(self, elements: ElementSet) -> list[Diagnostic]:
        return []

    def render(self, elements: ElementSet) -> str:
        lines: list[str] = []
        for rule in _sorted_rules(elements, "fol-p9"):
            variables = sorted(_rule_terms(rule)[0])
            body = " & ".join(_strip(a) for a in rule.antecedents)
            body += f" -> {_strip(rule.consequents[0])}"
            prefix = "".join(f"all {v} " for v in variables)
            formula = f"{prefix}({body})." if variables else f"{body}."
            lines.append(f"# label({rule.name})")
            lines.append(formula)
        return "\n".join(lines) + ("\n" if lines else "")


def _strip(atom: str) -> str:
    """Canonical atom to p9 surface: drop the $ variable markers."""
    pred, terms = split_atom(atom)
    return f"{pred}({','.join(t.lstrip('$') for t in terms)})"


# ---------------------------------------------------------------------------
# fol-pk
# ---------------------------------------------------------------------------


class _PkLineParser:
    def __init__(self, line: str, lineno: int):
        self.line = line
        self.lineno = lineno
        self.pos = 0

    def fail(self, code: str, message: str) -> ScanError:
        return ScanError(error(code, message, (self.lineno, self.pos + 1)))

    def skip_spaces(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_spaces()
        return self.pos >= len(self.line)

    def take_ident(self, what: str) -> str:
        self.skip_spaces()
        m = _IDENT_RE.match(self.line, self.pos)
        if not m:
            code = "syntax.unexpected-eof" if self.pos >= len(self.line) \
                else "syntax.missing-ident"
            raise self.fail(code, f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def take_keyword(self, word: str) -> None:
        self.skip_spaces()
        m = _IDENT_RE.match(self.line, self.pos)
        if not m or m.group(0) != word:
            code = "syntax.unexpected-eof" if self.pos >= len(self.line) \
                else "syntax.unexpected-token"
            raise self.fail(code, f"expected {word!r}")
        self.pos = m.end()

    def take_char(self, ch: str, code: str = "syntax.unexpected-token") -> None:
        self.skip_spaces()
        if self.pos >= len(self.line):
            eof_code = code if code == "syntax.unbalanced-paren" else "syntax.unexpected-eof"
            raise self.fail(eof_code, f"expected {ch!r}, found end of line")
        if self.line[self.pos] != ch:
            raise self.fail(code, f"expected {ch!r}")
        self.pos += 1

    def at_char(self, ch: str) -> bool:
        self.skip_spaces()
        return self.pos < len(self.line) and self.line[self.pos] == ch

    def at_keyword(self, word: str) -> bool:
        self.skip_spaces()
        m = _IDENT_RE.match(self.line, self.pos)
        return bool(m) and m.group(0) == word

    def parse_rule(self) -> RuleDef:
        self.take_keyword("rule")
        name = self.take_ident("a rule name")
        self.take_char(":")
        self.take_keyword("if")
        antecedents = [self.parse_atom()]
        while not self.at_keyword("then"):
            self.take_char("&")
            antecedents.append(self.parse_atom())
        self.take_keyword("then")
        consequent = self.parse_atom()
        if not self.at_end():
            raise self.fail("syntax.unexpected-token", "trailing text after rule head")
        return RuleDef(name, tuple(antecedents), (consequent,))

    def parse_atom(self) -> str:
        pred = self.take_ident("an atom")
        self.take_char("(")
        terms = [self.parse_term()]
        while self.at_char(","):
            self.pos += 1
            terms.append(self.parse_term())
        self.take_char(")", code="syntax.unbalanced-paren")
        return f"{pred}({','.join(terms)})"

    def parse_term(self) -> str:
        self.skip_spaces()
        if self.at_char("$"):
            self.pos += 1
            name = self.take_ident("a variable name")
            if name in RESERVED_VARS:
                raise self.fail(
                    "syntax.reserved-word", f"{name!r} cannot be used as a variable name")
            return f"${name}"
        return self.take_ident("a term")


class FolPkCodec:
    def grammar_hint(self) -> str:
        return PK_GRAMMAR_HINT

    def parse(self, text: str) -> ParseResult:
        rules: list[RuleDef] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rules.append(_PkLineParser(raw, lineno).parse_rule())
            except ScanError as exc:
                return ParseResult(None, [exc.diagnostic])
        return ParseResult(frozenset(rules), [])

    def structural_diagnostics(self, elements: ElementSet) -> list[Diagnostic]:
        return []

    def render(self, elements: ElementSet) -> str:
        lines = []
        for rule in _sorted_rules(elements, "fol-pk"):
            for atom in rule.antecedents + rule.consequents:
                # 'then' would terminate the antecedent chain early on
                # re-parse, so it cannot name a predicate here.
                if split_atom(atom)[0] == "then":
                    raise UnrepresentableElement(
                        rule, "fol-pk", "'then' cannot name a predicate")
            body = " & ".join(rule.antecedents)
            lines.append(f"rule {rule.name}: if {body} then {rule.consequents[0]}")
        return "\n".join(lines) + ("\n" if lines else "")
