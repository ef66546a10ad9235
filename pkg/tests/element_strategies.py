"""Hypothesis strategies that build representable element sets per formalism.

Each strategy stays inside the subset of element space that the matching
codec can render, so render/parse round-trip properties can run without
filtering out UnrepresentableElement noise.
"""

from hypothesis import strategies as st

from formbridge.core import AttributeDef, EntityDef, RecordField, RelationDef, RuleDef
from formbridge.formalisms.tabular import canonical_token

_FIRST = "ABCDEFGHIJKLMNOPQRSTUVWXYZ_abcdefghijklmnopqrstuvwxyz"
_REST = _FIRST + "0123456789"

IDENT = st.builds(lambda head, tail: head + tail,
                  st.sampled_from(_FIRST),
                  st.text(alphabet=_REST, max_size=7))


def ident_except(*reserved):
    blocked = set(reserved)
    return IDENT.filter(lambda s: s not in blocked)


def cardinalities():
    lo = st.integers(min_value=0, max_value=9).map(str)
    hi = st.one_of(st.integers(min_value=0, max_value=99).map(str), st.just("*"))
    return st.builds(lambda a, b: a + ".." + b, lo, hi)


@st.composite
def uml_element_sets(draw):
    names = draw(st.lists(ident_except("class"), max_size=4, unique=True))
    elements = [EntityDef(n) for n in names]
    for owner in names:
        pairs = draw(st.lists(st.tuples(ident_except("class"), ident_except("class")),
                              max_size=2, unique=True))
        elements.extend(AttributeDef(owner, a, t) for a, t in pairs)
    if names:
        for _ in range(draw(st.integers(min_value=0, max_value=2))):
            elements.append(RelationDef(
                draw(ident_except("class")),
                (draw(st.sampled_from(names)), draw(st.sampled_from(names))),
                draw(st.none() | cardinalities())))
    return frozenset(elements)


@st.composite
def er_element_sets(draw):
    names = draw(st.lists(ident_except("entity", "rel"), max_size=4, unique=True))
    elements = [EntityDef(n) for n in names]
    for owner in names:
        # exactly one key attribute per entity
        elements.append(AttributeDef(owner, draw(ident_except("entity", "rel")),
                                     draw(ident_except("entity", "rel")), is_key=True))
        pairs = draw(st.lists(st.tuples(ident_except("entity", "rel"),
                                        ident_except("entity", "rel")),
                              max_size=2, unique=True))
        elements.extend(AttributeDef(owner, a, t) for a, t in pairs)
    if names:
        for _ in range(draw(st.integers(min_value=0, max_value=2))):
            elements.append(RelationDef(
                draw(ident_except("entity", "rel")),
                (draw(st.sampled_from(names)), draw(st.sampled_from(names)))))
    return frozenset(elements)


@st.composite
def rule_sets(draw, pk_safe=False):
    predicates = ident_except("then") if pk_safe else IDENT
    rules = []
    for _ in range(draw(st.integers(min_value=0, max_value=3))):
        name = draw(IDENT)
        variables = draw(st.lists(ident_except("all", "exists"), max_size=2, unique=True))
        constants = draw(st.lists(IDENT.filter(lambda s, v=tuple(variables): s not in v),
                                  max_size=2, unique=True))
        terms = ["$" + v for v in variables] + constants
        if not terms:
            terms = ["kkkkkkkkk"]  # 9 chars, longer than IDENT can produce

        def atom():
            args = draw(st.lists(st.sampled_from(terms), min_size=1, max_size=3))
            return draw(predicates) + "(" + ",".join(args) + ")"

        antecedents = tuple(atom() for _ in range(draw(st.integers(min_value=1, max_value=2))))
        rules.append(RuleDef(name, antecedents, (atom(),)))
    return frozenset(rules)


SCALARS = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-10 ** 9, max_value=10 ** 9),
    st.floats(allow_nan=False, allow_infinity=False, width=64),
    st.text(max_size=8),
)


@st.composite
def record_sets(draw):
    n_rows = draw(st.integers(min_value=0, max_value=3))
    if not n_rows:
        return frozenset()
    fields = draw(st.lists(st.text(max_size=6), min_size=1, max_size=3, unique=True))
    return frozenset(RecordField(row, field, canonical_token(draw(SCALARS)))
                     for row in range(n_rows) for field in fields)


STRATEGIES = {
    "uml-mini": uml_element_sets(),
    "er-mini": er_element_sets(),
    "fol-p9": rule_sets(),
    "fol-pk": rule_sets(pk_safe=True),
    "tab-json": record_sets(),
    "tab-csv": record_sets(),
}
