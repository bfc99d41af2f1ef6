"""Cobordism calculus: exact genera and formal group laws, numerical Chern-Weil."""

from cobord.algebra import (
    GradedRingSpec,
    GradedElement,
    TruncatedSeries,
    RingError,
    SeriesError,
    parse_element,
    rational_ring,
)
from cobord.genera import (
    CharacteristicSeries,
    GenusTable,
    MultiplicativeSequence,
    builtin_genus,
    eval_sequence,
    genus_cpn,
    genus_cpn_via_chern,
    genus_extend,
    genus_table,
    identity_genus_table,
    k_phi,
)
from cobord.fgl import (
    FormalGroupLaw,
    ModulePresentation,
    RingMap,
    fgl_from_log,
    fgl_log,
    fgl_validate,
    landweber_check,
    named_fgl,
    n_series,
    p_series,
    quillen_classify,
    tor1,
    universal_fgl_rational,
)

__version__ = "0.1.0"

__all__ = [
    "GradedRingSpec",
    "GradedElement",
    "TruncatedSeries",
    "RingError",
    "SeriesError",
    "parse_element",
    "rational_ring",
    "CharacteristicSeries",
    "GenusTable",
    "MultiplicativeSequence",
    "builtin_genus",
    "eval_sequence",
    "genus_cpn",
    "genus_cpn_via_chern",
    "genus_extend",
    "genus_table",
    "identity_genus_table",
    "k_phi",
    "FormalGroupLaw",
    "ModulePresentation",
    "RingMap",
    "fgl_from_log",
    "fgl_log",
    "fgl_validate",
    "landweber_check",
    "named_fgl",
    "n_series",
    "p_series",
    "quillen_classify",
    "tor1",
    "universal_fgl_rational",
    "__version__",
]
