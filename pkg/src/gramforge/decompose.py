"""Break tokenized examples into minimal oracle-valid sequences.

Every token position of every example becomes one anchor; the sequence is
reduced around that anchor by deleting runs of tokens (halving run length
from |d|/2 down to 1, left-to-right, keeping a deletion only when the
rendered remainder stays oracle-accepted) until a full pass removes
nothing.  The anchor itself is never deleted, so the union of results
covers every token of every example.

The per-anchor results are de-duplicated globally and sorted by (length,
element order), which also makes the output independent of example file
ordering.  One big sequence therefore costs inference once no matter how
many examples share it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .oracle import Oracle
from .tokenizer import TokenizedCorpus, render


@dataclass
class DecomposedCorpus:
    sequences: tuple[tuple[str, ...], ...]
    # reduced sequence -> (example index, anchor index in the example)
    provenance: dict[tuple[str, ...], tuple[tuple[int, int], ...]]
    # reduced sequence -> anchor positions within the reduced sequence
    anchors: dict[tuple[str, ...], tuple[int, ...]] = field(default_factory=dict)
    table: object = None  # TokenTable


_EXHAUSTIVE_LIMIT = 25  # below this, try every run length


def _run_ladder(n: int) -> list[int]:
    """Run lengths to attempt, largest first.

    Halving alone (n/2, n/4, ..., 1) misses chunk sizes that are not on
    the ladder -- a two-token statement tail inside a six-token sequence
    is only removable with run length exactly 2 -- so small lengths are
    always included, and short sequences get every length.
    """
    if n <= _EXHAUSTIVE_LIMIT:
        return list(range(n - 1, 0, -1))
    ladder = set()
    run = n // 2
    while run >= 1:
        ladder.add(run)
        run //= 2
    ladder.update((1, 2, 3, 4))
    return sorted(ladder, reverse=True)


def _reduce_anchor(seq: tuple[str, ...], anchor: int, accept) -> tuple[tuple[str, ...], int]:
    """Delete token runs around `anchor` while the oracle keeps accepting.

    Each pass greedily strips the largest valid prefix and suffix (fast
    exit from long flanking context), then scans left-to-right deleting
    runs.  Returns the reduced sequence and the anchor's position in it.
    """
    seq = list(seq)
    changed = True
    while changed:
        changed = False
        # prefix descent
        k = anchor
        while k >= 1:
            candidate = seq[k:]
            if accept(tuple(candidate)):
                seq = candidate
                anchor -= k
                changed = True
                k = anchor
            else:
                k //= 2
        # suffix descent
        k = len(seq) - 1 - anchor
        while k >= 1:
            candidate = seq[: len(seq) - k]
            if accept(tuple(candidate)):
                seq = candidate
                changed = True
                k = len(seq) - 1 - anchor
            else:
                k //= 2
        for run in _run_ladder(len(seq)):
            if run >= len(seq):
                continue
            pos = 0
            while pos < len(seq):
                end = min(pos + run, len(seq))
                if pos <= anchor < end:
                    pos = anchor + 1
                    continue
                candidate = seq[:pos] + seq[end:]
                if candidate and accept(tuple(candidate)):
                    removed = end - pos
                    seq = candidate
                    if pos < anchor:
                        anchor -= removed
                    changed = True
                    # same position now holds fresh content; retry it
                else:
                    pos = end
    return tuple(seq), anchor


def decompose(corpus: TokenizedCorpus, oracle: Oracle) -> DecomposedCorpus:
    table = corpus.table

    def accept(seq: tuple[str, ...]) -> bool:
        return oracle.check(render(seq, table))

    memo: dict[tuple[tuple[str, ...], int], tuple[tuple[str, ...], int]] = {}
    provenance: dict[tuple[str, ...], set[tuple[int, int]]] = {}
    anchors: dict[tuple[str, ...], set[int]] = {}
    for ei, seq in enumerate(corpus.sequences):
        for anchor in range(len(seq)):
            key = (seq, anchor)
            if key not in memo:
                memo[key] = _reduce_anchor(seq, anchor, accept)
            reduced, inner = memo[key]
            provenance.setdefault(reduced, set()).add((ei, anchor))
            anchors.setdefault(reduced, set()).add(inner)

    ordered = sorted(provenance, key=lambda s: (len(s), s))
    return DecomposedCorpus(
        sequences=tuple(ordered),
        provenance={s: tuple(sorted(provenance[s])) for s in ordered},
        anchors={s: tuple(sorted(anchors[s])) for s in ordered},
        table=table,
    )


def reduction_pass_is_stable(dec: DecomposedCorpus, oracle: Oracle) -> bool:
    """True iff one more reduction pass removes nothing (1-minimality)."""

    def accept(seq: tuple[str, ...]) -> bool:
        return oracle.check(render(seq, dec.table))

    for seq in dec.sequences:
        for anchor in dec.anchors.get(seq, range(len(seq))):
            reduced, _ = _reduce_anchor(seq, anchor, accept)
            if reduced != seq:
                return False
    return True
