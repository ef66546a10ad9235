"""Built-in desk-scale formalisms: two schema notations (uml-mini, er-mini),
two Horn-rule notations (fol-p9, fol-pk), and two tabular notations
(tab-json, tab-csv). Each ships a codec satisfying the round-trip law
parse(render(S)) == S on representable element sets."""

from __future__ import annotations

from ..core import Formalism, Registry
from .er_mini import ErMiniCodec
from .fol import FolP9Codec, FolPkCodec
from .tabular import TabCsvCodec, TabJsonCodec
from .uml_mini import UmlMiniCodec


def builtin_codecs() -> list[Formalism]:
    """The fixed six-entry catalog."""
    return [
        Formalism("uml-mini", "UML-mini", "minimal class models", UmlMiniCodec()),
        Formalism("er-mini", "ER-mini", "entity-relationship schemas with keys",
                  ErMiniCodec()),
        Formalism("fol-p9", "FOL (Prover9 style)",
                  "Horn rules as period-terminated formulas", FolP9Codec()),
        Formalism("fol-pk", "FOL (Pyke style)",
                  "Horn rules as one-line if/then clauses", FolPkCodec()),
        Formalism("tab-json", "Tables (JSON)",
                  "flat record tables as JSON arrays", TabJsonCodec()),
        Formalism("tab-csv", "Tables (CSV)",
                  "flat record tables as header + rows", TabCsvCodec()),
    ]


def builtin_registry() -> Registry:
    registry = Registry()
    for formalism in builtin_codecs():
        registry.register(formalism)
    return registry


# One small known-good artifact per formalism. Scripted translators run
# these through freshly synthesized scripts before caching them, and the
# fol/tab probes describe the same model so cross-formalism checks line up.
PROBES: dict[str, str] = {
    "uml-mini": "class Vehicle { wheels: int; }\n",
    "er-mini": "entity Vehicle { key vin: string; wheels: int; }\n",
    "fol-p9": "# label(wheeled)\nall x (vehicle(x) -> wheeled(x)).\n",
    "fol-pk": "rule wheeled: if vehicle($x) then wheeled($x)\n",
    "tab-json": '[\n  {"vin": "v1", "wheels": 4}\n]\n',
    "tab-csv": 'vin,wheels\nv1,4\n',
}
