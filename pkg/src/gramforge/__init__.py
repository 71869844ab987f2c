"""gramforge: black-box context-free grammar inference.

Infers a readable CFG from example strings plus an accept/reject oracle:
examples are tokenized, decomposed into minimal oracle-valid units, and
generalized incrementally; the result can be sampled and scored against
held-out programs.
"""

__version__ = "0.1.0"

from .grammar import (
    CharClass,
    Grammar,
    GrammarError,
    GrammarMetrics,
    Lit,
    NT,
    PreT,
    Production,
    TokenEntry,
    TokenTable,
    add_sequence,
    empty_grammar,
    membership,
    metrics,
    shortest_yield,
    simplify,
)
from .grammar_io import GrammarFormatError, parse_grammar, serialize_grammar
from .oracle import Oracle, OracleError, OracleStats, builtin_from_grammar

__all__ = [
    "CharClass",
    "Grammar",
    "GrammarError",
    "GrammarFormatError",
    "GrammarMetrics",
    "Lit",
    "NT",
    "Oracle",
    "OracleError",
    "OracleStats",
    "PreT",
    "Production",
    "TokenEntry",
    "TokenTable",
    "add_sequence",
    "builtin_from_grammar",
    "empty_grammar",
    "membership",
    "metrics",
    "parse_grammar",
    "serialize_grammar",
    "shortest_yield",
    "simplify",
    "__version__",
]
