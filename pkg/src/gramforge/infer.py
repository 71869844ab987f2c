"""Incremental grammar inference over a decomposed corpus.

Sequences are consumed shortest-first.  Each one that the hypothesis
cannot already derive is added as a start alternative and generalized:

* bubbling enumerates contiguous, bracket-balanced subsequences of the new
  production and pairs each with every grammar bubble it can be swapped
  with (both cross-substituted sentence contexts stay oracle-accepted),
* the bubble set whose swaps produce the most novel oracle-accepted
  sentences wins (zero novelty means nothing to generalize),
* over-generalization elimination prunes that set: samples drawn from the
  fully merged grammar pin down what the merge ought to add, then the
  subset with the highest retained generalization that draws no
  oracle-rejected samples is kept,
* the surviving bubbles are united under a fresh nonterminal and the
  grammar simplified; new productions queue up for their own turn.

After the outer loop, repetition generalization wraps bubbles whose
repeated yields the oracle accepts (this is where recursion enters the
grammar), and token definitions widen to their accepted character
classes.

All sampling draws its seed from (config seed, step counter), so runs are
reproducible; ties anywhere break by registry/enumeration order.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction

from .decompose import DecomposedCorpus
from .grammar import (
    Grammar,
    Lit,
    NT,
    Production,
    TokenEntry,
    TokenTable,
    add_sequence,
    empty_grammar,
    frames_for_span,
    membership,
    shortest_yield_tokens,
    simplify as simplify_grammar,
    span_yield_tokens,
)
from .grammar_io import normalize
from .oracle import Oracle
from .rng import Rng, derive_seed
from .sampler import LPP10, sample_pair
from .tokenizer import render

log = logging.getLogger(__name__)


class InferError(Exception):
    pass


@dataclass(frozen=True)
class InferConfig:
    seed: int = 0
    samples_for_overgen: int = 50
    overgen_subset_cap: int = 10
    swap_contexts: int = 1
    rep_repeat_counts: tuple[int, ...] = (2, 3)
    max_bubble_len: int | None = None
    simplify_enabled: bool = True

    def __post_init__(self):
        for name in ("samples_for_overgen", "overgen_subset_cap", "swap_contexts"):
            if getattr(self, name) < 1:
                raise InferError(f"{name} must be >= 1")


def replace_seed(cfg: InferConfig, seed: int) -> InferConfig:
    return replace(cfg, seed=seed)


def config_from_dict(d: dict) -> InferConfig:
    known = {
        "seed",
        "samples_for_overgen",
        "overgen_subset_cap",
        "swap_contexts",
        "rep_repeat_counts",
        "max_bubble_len",
        "simplify_enabled",
    }
    unknown = set(d) - known
    if unknown:
        raise InferError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "rep_repeat_counts" in d:
        d = dict(d)
        d["rep_repeat_counts"] = tuple(d["rep_repeat_counts"])
    return InferConfig(**d)


# ---------------------------------------------------------------------------
# bubbles

_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {v: k for k, v in _OPENERS.items()}


def bracket_balanced(symbols) -> bool:
    stack: list[str] = []
    for s in symbols:
        if isinstance(s, Lit) and s.text in _OPENERS:
            stack.append(s.text)
        elif isinstance(s, Lit) and s.text in _CLOSERS:
            if not stack or stack.pop() != _CLOSERS[s.text]:
                return False
    return not stack


@dataclass(frozen=True)
class Bubble:
    prod_idx: int
    span: tuple[int, int]
    origin: str = "grammar"  # "new" for bubbles of the production in hand

    def content(self, g: Grammar):
        return g.productions[self.prod_idx].rhs[self.span[0] : self.span[1]]


@dataclass
class BubbleSet:
    first: Bubble
    rest: list[Bubble]


def _spans(rhs, max_len):
    n = len(rhs)
    cap = max_len if max_len is not None else n
    for i in range(n):
        for j in range(i + 1, min(i + cap, n) + 1):
            if bracket_balanced(rhs[i:j]):
                yield (i, j)


def enumerate_pool(g: Grammar, max_len) -> list[Bubble]:
    pool = []
    for pi in range(len(g.productions)):
        for span in _spans(g.productions[pi].rhs, max_len):
            pool.append(Bubble(pi, span))
    return pool


def check_swap(g: Grammar, b1: Bubble, b2: Bubble, oracle: Oracle, cfg: InferConfig) -> bool:
    """Both cross-substituted sentence contexts stay oracle-accepted.

    A bubble swapped with itself, or with one of identical content, is an
    identity swap: the rendered strings are plain sentences of the current
    (sound) grammar, so no query is spent on them.
    """
    if b1 == b2:
        return True
    c1, c2 = b1.content(g), b2.content(g)
    if c1 == c2:
        return True
    y1 = span_yield_tokens(g, c1)
    y2 = span_yield_tokens(g, c2)
    strings = []
    for (l, r) in frames_for_span(g, b1.prod_idx, b1.span, cfg.swap_contexts):
        strings.append(render(l + y2 + r, g.table))
    for (l, r) in frames_for_span(g, b2.prod_idx, b2.span, cfg.swap_contexts):
        strings.append(render(l + y1 + r, g.table))
    return all(oracle.check(s) for s in strings)


def bubbling(g: Grammar, prod_idx: int, oracle: Oracle, cfg: InferConfig) -> list[BubbleSet]:
    """One candidate set per subsequence of the production under work."""
    rhs = g.productions[prod_idx].rhs
    pool = enumerate_pool(g, cfg.max_bubble_len)
    sets = []
    for span in _spans(rhs, cfg.max_bubble_len):
        first = Bubble(prod_idx, span, origin="new")
        rest = [
            b
            for b in pool
            if (b.prod_idx, b.span) != (prod_idx, span)
            and check_swap(g, first, b, oracle, cfg)
        ]
        sets.append(BubbleSet(first, rest))
    return sets


def swap_samples(g: Grammar, s: BubbleSet) -> list[tuple[str, ...]]:
    """Token sequences produced by swapping the first bubble with the rest."""
    out: list[tuple[str, ...]] = []
    seen = set()
    fl, fr = frames_for_span(g, s.first.prod_idx, s.first.span, 1)[0]
    fy = span_yield_tokens(g, s.first.content(g))
    for b in s.rest:
        bl, br = frames_for_span(g, b.prod_idx, b.span, 1)[0]
        by = span_yield_tokens(g, b.content(g))
        for t in (fl + by + fr, bl + fy + br):
            if t not in seen:
                seen.add(t)
                out.append(t)
    return out


def score_bubble_set(g: Grammar, s: BubbleSet, oracle: Oracle, cfg: InferConfig) -> int:
    """Count swap samples that are novel (underivable) yet oracle-accepted."""
    score = 0
    for t in swap_samples(g, s):
        if not membership(g, t) and oracle.check(render(t, g.table)):
            score += 1
    return score


# ---------------------------------------------------------------------------
# merging


def merge_bubbles(g: Grammar, bubbles, cfg: InferConfig | None = None) -> Grammar:
    """Unite the bubbles under one fresh nonterminal.

    Every bubble's span is replaced in its host production; the fresh
    nonterminal gets one alternative per distinct bubble content.  Bubbles
    overlapping an earlier-registered span of the same production still
    contribute their content but keep their text in place.  A singleton
    set is a no-op.
    """
    bubbles = list(bubbles)
    if len(bubbles) <= 1:
        return g
    g2, name = g.fresh()

    contents = []
    for b in bubbles:
        c = b.content(g)
        if c not in contents:
            contents.append(c)

    by_prod: dict[int, list[tuple[int, int]]] = {}
    for b in bubbles:
        spans = by_prod.setdefault(b.prod_idx, [])
        if any(not (b.span[1] <= s0 or s1 <= b.span[0]) for s0, s1 in spans):
            log.debug("skipping overlapping bubble %s", b)
            continue
        spans.append(b.span)

    prods = []
    for pi, p in enumerate(g.productions):
        spans = sorted(by_prod.get(pi, ()), reverse=True)
        if not spans:
            prods.append(p)
            continue
        rhs = list(p.rhs)
        for (i, j) in spans:
            rhs[i:j] = [NT(name)]
        prods.append(Production(p.lhs, tuple(rhs)))
    for c in contents:
        prods.append(Production(name, c))

    if cfg is None or cfg.simplify_enabled:
        seen = set()
        deduped = []
        for p in prods:
            if p not in seen:
                seen.add(p)
                deduped.append(p)
        out = simplify_grammar(g2.with_productions(deduped))
    else:
        out = g2.with_productions(prods)
    return out


# ---------------------------------------------------------------------------
# over-generalization elimination


class _SeedStream:
    """Per-call sub-seeds derived from (seed, running counter)."""

    def __init__(self, seed: int, tag: int):
        self.seed = seed
        self.tag = tag
        self.counter = 0

    def next_rng(self) -> Rng:
        self.counter += 1
        return Rng(derive_seed(self.seed, self.tag, self.counter))


def _draw_lpp(g: Grammar, n: int, rng: Rng):
    return [sample_pair(g, LPP10, rng) for _ in range(n)]


def eliminate_overgen(
    g: Grammar, s: BubbleSet, oracle: Oracle, cfg: InferConfig, seeds: _SeedStream
) -> list[Bubble]:
    """Largest safely-mergeable subset of a winning bubble set.

    Samples from the full merge that are novel and oracle-accepted define
    the generalization target; bubbles whose removal keeps the target
    fully derivable are pruned; then the best subset (containing the
    first bubble) that never samples an oracle-rejected string wins.
    Ties prefer fewer bubbles, then registration order.  If nothing
    passes, the singleton first bubble is returned (its merge is a no-op).
    """
    bubbles = [s.first] + list(s.rest)
    g_full = merge_bubbles(g, bubbles, cfg)
    samples: list[tuple[str, ...]] = []
    seen = set()
    for toks, rendered in _draw_lpp(g_full, cfg.samples_for_overgen, seeds.next_rng()):
        if toks in seen:
            continue
        seen.add(toks)
        if not membership(g, toks) and oracle.check(rendered):
            samples.append(toks)

    merged_cache: dict[tuple, Grammar] = {}

    def merged(subset: tuple[Bubble, ...]) -> Grammar:
        if subset not in merged_cache:
            merged_cache[subset] = merge_bubbles(g, subset, cfg)
        return merged_cache[subset]

    def genscore(subset) -> Fraction:
        if not samples:
            return Fraction(1)
        gm = merged(tuple(subset))
        hits = sum(1 for t in samples if membership(gm, t))
        return Fraction(hits, len(samples))

    def passes_overgen(subset) -> bool:
        gm = merged(tuple(subset))
        for _, rendered in _draw_lpp(gm, cfg.samples_for_overgen, seeds.next_rng()):
            if not oracle.check(rendered):
                return False
        return True

    # prune: drop rest bubbles whose removal keeps full generalization
    s_min = bubbles[:]
    for b in list(s.rest):
        if len(s_min) > 1 and b in s_min:
            without = [x for x in s_min if x is not b]
            if genscore(without) == 1:
                s_min = without

    rest_min = [b for b in s_min if b != s.first]
    order = {id(b): i for i, b in enumerate(rest_min)}

    def key(subset_rest):
        return (
            -genscore([s.first] + subset_rest),
            len(subset_rest),
            tuple(order[id(b)] for b in subset_rest),
        )

    if len(s_min) <= cfg.overgen_subset_cap:
        passing = []
        for mask in range(1 << len(rest_min)):
            subset_rest = [b for i, b in enumerate(rest_min) if mask >> i & 1]
            if passes_overgen([s.first] + subset_rest):
                passing.append(subset_rest)
        if not passing:
            return [s.first]
        best = min(passing, key=key)
        return [s.first] + best
    # greedy forward selection under the same tests
    current: list[Bubble] = []
    if not passes_overgen([s.first]):
        return [s.first]
    cur_score = genscore([s.first])
    remaining = rest_min[:]
    while remaining:
        best_b = None
        best_sc = cur_score
        for b in remaining:
            cand = [s.first] + current + [b]
            if passes_overgen(cand):
                sc = genscore(cand)
                if sc > best_sc:
                    best_sc = sc
                    best_b = b
        if best_b is None:
            break
        current.append(best_b)
        remaining.remove(best_b)
        cur_score = best_sc
    return [s.first] + current


# ---------------------------------------------------------------------------
# repetition generalization

# Recursion enters the grammar here.  A bubble is repeatable when, in up
# to three sentence contexts, its witness yield repeated 2x and 3x stays
# oracle-accepted -- including variants where each nonterminal inside the
# bubble is expanded through each of its alternatives, which catches
# chains that mix a safe and an unsafe alternative.  An accepted span is
# wrapped occurrence-wise (host span becomes a fresh nonterminal with
# `content | self self`), so repetition valid in one position is not
# granted to others.  Each applied wrap is validated by sampling and
# rolled back if any draw is rejected.


def _rep_probes(g: Grammar, frames, content, counts) -> list[str] | None:
    """Probe strings for repeating `content`; None if unbuildable."""
    base = span_yield_tokens(g, content)
    if not base:
        return None
    probes = []
    for (l, r) in frames:
        for k in counts:
            probes.append(render(l + base * k + r, g.table))
    l0, r0 = frames[0]
    nt_names = []
    for s in content:
        if isinstance(s, NT) and s.name not in nt_names:
            nt_names.append(s.name)
    for name in nt_names:
        for pi in g.prods_of(name):
            alt_rhs = g.productions[pi].rhs
            variant: list[str] = []
            for s in content:
                if isinstance(s, NT) and s.name == name:
                    variant.extend(span_yield_tokens(g, alt_rhs))
                else:
                    variant.extend(shortest_yield_tokens(g, s))
            probes.append(render(l0 + tuple(variant) * 2 + r0, g.table))
    return probes


def _sampling_clean(g: Grammar, oracle: Oracle, cfg: InferConfig, seeds: _SeedStream) -> bool:
    for _, rendered in _draw_lpp(g, cfg.samples_for_overgen, seeds.next_rng()):
        if not oracle.check(rendered):
            return False
    return True


def _apply_group_rep(g: Grammar, lhs: str, prod_keys, cfg) -> Grammar:
    """Replace the given alternatives of lhs by one repeatable nonterminal."""
    g2, name = g.fresh()
    prods = []
    replaced = False
    for p in g.productions:
        if (p.lhs, p.rhs) in prod_keys:
            if not replaced:
                prods.append(Production(lhs, (NT(name),)))
                replaced = True
            # the other grouped alternatives collapse into the same rule
        else:
            prods.append(p)
    for key in prod_keys:
        prods.append(Production(name, key[1]))
    prods.append(Production(name, (NT(name), NT(name))))
    return g2.with_productions(prods)


def _apply_span_rep(g: Grammar, prod_idx: int, span, cfg) -> Grammar:
    g2, name = g.fresh()
    p = g.productions[prod_idx]
    i, j = span
    new_rhs = p.rhs[:i] + (NT(name),) + p.rhs[j:]
    prods = list(g.productions)
    prods[prod_idx] = Production(p.lhs, new_rhs)
    prods.append(Production(name, p.rhs[i:j]))
    prods.append(Production(name, (NT(name), NT(name))))
    return g2.with_productions(prods)


def generalize_rep(g: Grammar, oracle: Oracle, cfg: InferConfig, seeds: _SeedStream):
    rep_log: list[dict] = []
    counts = tuple(cfg.rep_repeat_counts)

    # phase 1: whole alternatives of one nonterminal, grouped when their
    # concatenations are also accepted (statement lists, sibling items)
    for lhs in list(g.nonterminals):
        prod_keys = [
            (p.lhs, p.rhs) for p in g.productions if p.lhs == lhs and len(p.rhs) > 0
        ]
        if not prod_keys:
            continue
        idx0 = next(i for i, p in enumerate(g.productions) if (p.lhs, p.rhs) == prod_keys[0])
        try:
            frames = frames_for_span(g, idx0, (0, len(prod_keys[0][1])), 3)
        except Exception:
            continue
        accepted = []
        for key in prod_keys:
            rhs = key[1]
            base = span_yield_tokens(g, rhs)
            if membership(g, frames[0][0] + base * 2 + frames[0][1]):
                continue  # repetition already derivable here
            probes = _rep_probes(g, frames, rhs, counts)
            if probes and all(oracle.check(p) for p in probes):
                accepted.append(key)
        if not accepted:
            continue
        group = accepted
        if len(accepted) > 1:
            l0, r0 = frames[0]
            cross_ok = True
            for ka in accepted:
                for kb in accepted:
                    if ka == kb:
                        continue
                    t = l0 + span_yield_tokens(g, ka[1]) + span_yield_tokens(g, kb[1]) + r0
                    if not oracle.check(render(t, g.table)):
                        cross_ok = False
                        break
                if not cross_ok:
                    break
            if not cross_ok:
                group = None
        if group:
            g_new = _apply_group_rep(g, lhs, group, cfg)
            if _sampling_clean(g_new, oracle, cfg, seeds):
                g = g_new
                rep_log.append({"kind": "group", "lhs": lhs, "alternatives": len(group)})
                continue
        # fall back to wrapping each accepted alternative on its own
        for key in accepted:
            g_new = _apply_group_rep(g, lhs, [key], cfg)
            if _sampling_clean(g_new, oracle, cfg, seeds):
                g = g_new
                rep_log.append({"kind": "alt", "lhs": lhs, "alternatives": 1})

    # phase 2: proper subspans of every production
    prod_keys = [(p.lhs, p.rhs) for p in g.productions]
    for key in prod_keys:
        attempts = 0
        while True:
            try:
                prod_idx = next(
                    i for i, p in enumerate(g.productions) if (p.lhs, p.rhs) == key
                )
            except StopIteration:
                break
            rhs = g.productions[prod_idx].rhs
            applied = False
            for span in _spans(rhs, cfg.max_bubble_len):
                if span == (0, len(rhs)):
                    continue
                content = rhs[span[0] : span[1]]
                try:
                    frames = frames_for_span(g, prod_idx, span, 3)
                except Exception:
                    continue
                base = span_yield_tokens(g, content)
                if membership(g, frames[0][0] + base * 2 + frames[0][1]):
                    continue
                probes = _rep_probes(g, frames, content, counts)
                if not probes or not all(oracle.check(p) for p in probes):
                    continue
                g_new = _apply_span_rep(g, prod_idx, span, cfg)
                if not _sampling_clean(g_new, oracle, cfg, seeds):
                    continue
                g = g_new
                rep_log.append(
                    {"kind": "span", "lhs": key[0], "span": list(span), "len": span[1] - span[0]}
                )
                key = (key[0], g.productions[prod_idx].rhs)
                applied = True
                break
            attempts += 1
            if not applied or attempts > 50:
                break

    if cfg.simplify_enabled:
        g = simplify_grammar(g)
    return g, rep_log


# ---------------------------------------------------------------------------
# terminal expansion


def expand_terminals(g: Grammar) -> Grammar:
    """Fold accepted character classes into the token definitions.

    Literal values wholly covered by a token's class are dropped; the
    class carries them.  Tokens without accepted classes are unchanged.
    The syntactic layer is untouched.
    """
    if g.table is None:
        return g
    from .grammar import CharClass

    entries = {}
    for tid, e in g.table.entries.items():
        if not e.ranges:
            entries[tid] = e
            continue
        cc = CharClass(e.ranges, e.repeatable)
        kept = tuple(
            v
            for v in e.values
            if not (all(cc.contains_char(c) for c in v) and (len(v) == 1 or e.repeatable))
        )
        entries[tid] = TokenEntry(
            values=kept, ranges=e.ranges, repeatable=e.repeatable, classes=e.classes
        )
    table = TokenTable(entries=entries, whitespace_sensitive=g.table.whitespace_sensitive)
    return replace(g, table=table, _cache={})


# ---------------------------------------------------------------------------
# the incremental loop


class PendingQueue:
    """FIFO of productions awaiting generalization (dedup on push)."""

    def __init__(self):
        self._q: deque = deque()
        self._members: set = set()

    def push(self, key) -> None:
        if key not in self._members:
            self._members.add(key)
            self._q.append(key)

    def pop(self):
        if not self._q:
            return None
        key = self._q.popleft()
        self._members.discard(key)
        return key

    def __len__(self):
        return len(self._q)


def choose_production(g: Grammar, queue: PendingQueue):
    """Next queued production still present in the grammar, or None."""
    while True:
        key = queue.pop()
        if key is None:
            return None
        for i, p in enumerate(g.productions):
            if (p.lhs, p.rhs) == key:
                return i


def infer_grammar(
    dec: DecomposedCorpus, table: TokenTable, oracle: Oracle, cfg: InferConfig
) -> tuple[Grammar, dict]:
    if not dec.sequences:
        raise InferError("decomposed corpus is empty")

    g = empty_grammar(table=table)
    queue = PendingQueue()
    seeds = _SeedStream(cfg.seed, tag=0x5EED)
    steps: list[dict] = []
    skipped = processed = accepted = rejected = 0

    def enqueue_new(old: Grammar, new: Grammar) -> None:
        old_keys = {(p.lhs, p.rhs) for p in old.productions}
        for p in new.productions:
            if (p.lhs, p.rhs) not in old_keys:
                queue.push((p.lhs, p.rhs))

    for seq in dec.sequences:  # already sorted shortest-first
        if membership(g, seq):
            skipped += 1
            steps.append({"event": "skip", "seq": list(seq)})
            continue
        g_new = add_sequence(g, seq)
        enqueue_new(g, g_new)
        g = g_new
        steps.append({"event": "add", "seq": list(seq)})

        while True:
            prod_idx = choose_production(g, queue)
            if prod_idx is None:
                break
            processed += 1
            sets = bubbling(g, prod_idx, oracle, cfg)
            best = None
            best_score = 0
            for s in sets:
                sc = score_bubble_set(g, s, oracle, cfg)
                if sc > best_score:
                    best, best_score = s, sc
            if best is None:
                continue
            chosen = eliminate_overgen(g, best, oracle, cfg, seeds)
            g_new = merge_bubbles(g, chosen, cfg)
            if g_new == g:
                rejected += 1
                steps.append(
                    {"event": "merge_rejected", "lhs": g.productions[prod_idx].lhs, "score": best_score}
                )
                continue
            enqueue_new(g, g_new)
            accepted += 1
            steps.append(
                {
                    "event": "merge",
                    "score": best_score,
                    "bubbles": 1 + len(best.rest),
                    "kept": len(chosen),
                }
            )
            g = g_new

    g, rep_log = generalize_rep(g, oracle, cfg, seeds)
    g = expand_terminals(g)
    g = normalize(g)

    st = oracle.stats()
    run_report = {
        "seed": cfg.seed,
        "config": {
            "samples_for_overgen": cfg.samples_for_overgen,
            "overgen_subset_cap": cfg.overgen_subset_cap,
            "swap_contexts": cfg.swap_contexts,
            "rep_repeat_counts": list(cfg.rep_repeat_counts),
            "max_bubble_len": cfg.max_bubble_len,
            "simplify_enabled": cfg.simplify_enabled,
        },
        "sequences_total": len(dec.sequences),
        "sequences_skipped": skipped,
        "productions_processed": processed,
        "merges_accepted": accepted,
        "merges_rejected": rejected,
        "rep_rules": rep_log,
        "steps": steps,
        "oracle": {
            "queries": st.queries,
            "oracle_time": st.oracle_time,
            "cache_hits": st.cache_hits,
        },
    }
    return g, run_report
