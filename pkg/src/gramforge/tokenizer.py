"""Lexical layer inference: from raw example strings to token sequences.

Four stages, all oracle-driven:

1. pre-tokenization with fixed rules (identifiers, numbers, quoted
   strings, whitespace runs, single-character punctuation),
2. whitespace-sensitivity probing (doubled runs, added padding),
3. token merging: two values become one token when swapping them in all
   their occurrences keeps every affected example oracle-accepted;
   merging is the connected components of that swappability relation,
4. character-level generalization: class-representative and repetition
   probes widen a token's definition to character ranges.

Merging only pairs values of the same lexical shape (identifiers with
identifiers, numbers with numbers, quoted strings with quoted strings),
except that identifier/number merges are allowed; punctuation is never
merged here -- distinctions like "+" vs "<" belong to the syntactic layer,
where over-generalization checks can see them.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .grammar import TokenEntry, TokenTable
from .oracle import Oracle

log = logging.getLogger(__name__)


class TokenizerError(Exception):
    pass


# ---------------------------------------------------------------------------
# pre-tokenization

IDENT = "ident"
NUMBER = "number"
STRING = "string"
WS = "ws"
PUNCT = "punct"

_MERGEABLE = (IDENT, NUMBER, STRING)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"[0-9]+")
_WS_RE = re.compile(r"[ \t\r\n]+")
_STRING_RES = {
    '"': re.compile(r'"(?:\\.|[^"\\\n])*"'),
    "'": re.compile(r"'(?:\\.|[^'\\\n])*'"),
}


@dataclass(frozen=True)
class Pretoken:
    kind: str
    text: str


def pretokenize(example: str) -> list[Pretoken]:
    """Maximal-munch segmentation with fixed lexical rules.

    An unterminated quote is emitted as punctuation and scanning resumes
    after it; the oracle remains the arbiter of validity.
    """
    out: list[Pretoken] = []
    i, n = 0, len(example)
    while i < n:
        c = example[i]
        if c in " \t\r\n":
            m = _WS_RE.match(example, i)
            out.append(Pretoken(WS, m.group()))
            i = m.end()
        elif c.isalpha() or c == "_":
            m = _IDENT_RE.match(example, i)
            out.append(Pretoken(IDENT, m.group()))
            i = m.end()
        elif c.isdigit():
            m = _NUMBER_RE.match(example, i)
            out.append(Pretoken(NUMBER, m.group()))
            i = m.end()
        elif c in _STRING_RES:
            m = _STRING_RES[c].match(example, i)
            if m:
                out.append(Pretoken(STRING, m.group()))
                i = m.end()
            else:
                out.append(Pretoken(PUNCT, c))
                i += 1
        else:
            out.append(Pretoken(PUNCT, c))
            i += 1
    return out


# ---------------------------------------------------------------------------
# rendering

_WORD_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
)


def join_pieces(pieces, whitespace_sensitive: bool) -> str:
    """Concatenate, separating word-adjacent pieces by one space.

    In whitespace-sensitive mode nothing is inserted: original whitespace
    tokens are expected to be present verbatim.
    """
    out: list[str] = []
    for piece in pieces:
        if (
            out
            and not whitespace_sensitive
            and out[-1]
            and piece
            and out[-1][-1] in _WORD_CHARS
            and piece[0] in _WORD_CHARS
        ):
            out.append(" ")
        out.append(piece)
    return "".join(out)


def render(seq, table: TokenTable) -> str:
    """Token sequence back to an oracle-queryable string."""
    return render_with(seq, table, {})


def render_with(seq, table: TokenTable, overrides: dict[int, str]) -> str:
    """Render with some positions forced to literal text (probe splicing)."""
    pieces = []
    for i, el in enumerate(seq):
        if i in overrides:
            pieces.append(overrides[i])
        elif el in table.entries:
            pieces.append(table.entries[el].render_value())
        else:
            pieces.append(el)
    return join_pieces(pieces, table.whitespace_sensitive)


# ---------------------------------------------------------------------------
# whitespace sensitivity


def detect_whitespace_sensitivity(examples, oracle: Oracle) -> bool:
    """Probe up to three accepted examples with perturbed whitespace."""
    accepted = [e for e in examples if oracle.check(e)][:3]
    if not accepted:
        raise TokenizerError("no oracle-accepted example to probe")
    for e in accepted:
        pres = pretokenize(e)
        probes = []
        if any(p.kind == WS for p in pres):
            probes.append("".join(p.text * 2 if p.kind == WS else p.text for p in pres))
        probes.append(f" {e} ")
        if not any(p.kind == WS for p in pres) and len(pres) >= 2:
            probes.append(pres[0].text + " " + "".join(p.text for p in pres[1:]))
        if any(not oracle.check(p) for p in probes):
            return True
    return False


# ---------------------------------------------------------------------------
# token merging

_SWAP_SAMPLE_CAP = 5  # per value: test only this many shortest hosts


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != x:
            self.parent[x] = p = self.parent.setdefault(p, p)
            x, p = p, self.parent.setdefault(p, p)
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _swap_eligible(kind_a: str, kind_b: str) -> bool:
    if kind_a == kind_b:
        return kind_a in _MERGEABLE
    return {kind_a, kind_b} == {IDENT, NUMBER}


def merge_tokens(pre_corpus: list[list[Pretoken]], oracle: Oracle, whitespace_sensitive: bool):
    """Merge swappable values into tokens; returns (sequences, table).

    For each eligible value pair, every occurrence of one value is
    replaced by the other simultaneously across the hosting examples; the
    pair is swappable iff all substituted examples are accepted.  Values
    hosted by more than five examples are tested on the five shortest.
    """
    occurrences: dict[str, dict] = {}  # value -> {kind, first, hosts}
    for ei, pres in enumerate(pre_corpus):
        for ti, p in enumerate(pres):
            if p.kind not in _MERGEABLE:
                continue
            info = occurrences.setdefault(
                p.text, {"kind": p.kind, "first": (ei, ti), "hosts": []}
            )
            if info["hosts"] and info["hosts"][-1] == ei:
                continue
            info["hosts"].append(ei)

    values = sorted(occurrences, key=lambda v: occurrences[v]["first"])
    texts = ["".join(p.text for p in pres) for pres in pre_corpus]

    def host_sample(value):
        hosts = occurrences[value]["hosts"]
        ordered = sorted(hosts, key=lambda ei: (len(texts[ei]), ei))
        return ordered[:_SWAP_SAMPLE_CAP]

    def swapped_text(ei, u, v):
        pieces = []
        for p in pre_corpus[ei]:
            if p.kind in _MERGEABLE and p.text == u:
                pieces.append(v)
            elif p.kind in _MERGEABLE and p.text == v:
                pieces.append(u)
            else:
                pieces.append(p.text)
        return "".join(pieces)

    uf = _UnionFind()
    for i, u in enumerate(values):
        for v in values[i + 1 :]:
            if not _swap_eligible(occurrences[u]["kind"], occurrences[v]["kind"]):
                continue
            if uf.find(u) == uf.find(v):
                continue  # already merged transitively
            hosts = sorted(set(host_sample(u)) | set(host_sample(v)))
            if all(oracle.check(swapped_text(ei, u, v)) for ei in hosts):
                uf.union(u, v)

    components: dict[str, list[str]] = {}
    for v in values:
        components.setdefault(uf.find(v), []).append(v)
    ordered = sorted(components.values(), key=lambda c: min(occurrences[v]["first"] for v in c))

    ids: dict[str, str] = {}
    entries: dict[str, TokenEntry] = {}
    for k, comp in enumerate(ordered, start=1):
        tid = f"t{k}"
        entries[tid] = TokenEntry(values=tuple(sorted(comp)))
        for v in comp:
            ids[v] = tid

    sequences = []
    for pres in pre_corpus:
        seq = []
        for p in pres:
            if p.kind == WS:
                if whitespace_sensitive:
                    seq.append(p.text)
                continue
            if p.kind in _MERGEABLE:
                seq.append(ids[p.text])
            else:
                seq.append(p.text)
        sequences.append(tuple(seq))

    table = TokenTable(entries=entries, whitespace_sensitive=whitespace_sensitive)
    return sequences, table


# ---------------------------------------------------------------------------
# character-level generalization

_CLASS_RANGES = {
    "lowercase": ("a", "z"),
    "uppercase": ("A", "Z"),
    "digit": ("0", "9"),
    "underscore": ("_", "_"),
}
# representatives differ from typical observed values so probes are not
# vacuously the training string
_CLASS_REPR = {"lowercase": "q", "uppercase": "Z", "digit": "7", "underscore": "_"}

_REP_COUNTS = (2, 4)


def _witnessed_classes(values) -> list[str]:
    seen = []
    for name, (lo, hi) in _CLASS_RANGES.items():
        if any(lo <= c <= hi for v in values for c in v) and name not in seen:
            seen.append(name)
    return seen


def generalize_characters(table: TokenTable, sequences, oracle: Oracle):
    """Widen token definitions via class and repetition probes.

    One occurrence context per token (first sequence containing it).
    Returns the new table plus a log of accepted probes, so merge
    decisions stay re-checkable.
    """
    new_entries: dict[str, TokenEntry] = {}
    probe_log: dict[str, dict] = {}
    for tid, entry in table.entries.items():
        ctx = None
        for seq in sequences:
            if tid in seq:
                ctx = (seq, seq.index(tid))
                break
        if ctx is None:
            new_entries[tid] = entry
            continue
        seq, pos = ctx
        accepted: list[str] = []
        witnesses: dict[str, str] = {}
        for cls in _witnessed_classes(entry.values):
            probe = render_with(seq, table, {pos: _CLASS_REPR[cls]})
            if oracle.check(probe):
                accepted.append(cls)
                witnesses[cls] = probe
        first_value = min(entry.values)
        rep_probes = [
            render_with(seq, table, {pos: first_value * k}) for k in _REP_COUNTS
        ]
        repeatable = all(oracle.check(p) for p in rep_probes)
        ranges = tuple(_CLASS_RANGES[c] for c in accepted)
        new_entries[tid] = TokenEntry(
            values=entry.values,
            ranges=ranges,
            repeatable=repeatable,
            classes=tuple(accepted),
        )
        probe_log[tid] = {
            "classes": witnesses,
            "repeat": rep_probes if repeatable else None,
        }
    return (
        TokenTable(entries=new_entries, whitespace_sensitive=table.whitespace_sensitive),
        probe_log,
    )


# ---------------------------------------------------------------------------
# corpus orchestration


@dataclass
class TokenizedCorpus:
    sources: tuple[str, ...]
    sequences: tuple[tuple[str, ...], ...]
    table: TokenTable
    probe_log: dict


def tokenize_corpus(examples: list[tuple[str, str]], oracle: Oracle) -> TokenizedCorpus:
    """Full lexical pipeline over (name, text) examples.

    Examples the oracle rejects are dropped with a warning; rendering any
    surviving sequence reproduces an accepted string.
    """
    kept = []
    for name, text in examples:
        if oracle.check(text):
            kept.append((name, text))
        else:
            log.warning("dropping oracle-rejected training example %s", name)
    if not kept:
        raise TokenizerError("no oracle-accepted training example")
    sensitive = detect_whitespace_sensitivity([t for _, t in kept], oracle)
    pre_corpus = [pretokenize(t) for _, t in kept]
    sequences, table = merge_tokens(pre_corpus, oracle, sensitive)
    table, probe_log = generalize_characters(table, sequences, oracle)
    return TokenizedCorpus(
        sources=tuple(n for n, _ in kept),
        sequences=tuple(sequences),
        table=table,
        probe_log=probe_log,
    )
