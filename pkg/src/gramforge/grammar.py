"""Grammar model and the operations every other module builds on.

A grammar is the usual quadruple (nonterminals, terminals, productions,
start) plus an optional lexical layer: a token table mapping pre-terminal
ids to the literal values and character classes they stand for.  Symbols on
a right-hand side are literals, character classes, nonterminals or
pre-terminals; pre-terminals are opaque here, the syntactic layer never
looks inside them.

Grammars are immutable: every operation returns a new value, so versions
can be shared freely (the inference loop keeps many hypothetical grammars
alive at once).  Derived data (nullable sets, shortest yields, derivation
contexts) is cached per instance.

Token-level strings are represented as sequences of *elements*: plain
strings that are either a token id from the table or literal text.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction


class GrammarError(Exception):
    pass


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class Lit:
    """Terminal literal (non-empty string)."""

    text: str

    def __post_init__(self):
        if not self.text:
            raise GrammarError("empty literal terminal")


@dataclass(frozen=True)
class CharClass:
    """Set of character ranges, optionally repeatable (one-or-more)."""

    ranges: tuple[tuple[str, str], ...]
    repeatable: bool = False

    def __post_init__(self):
        if not self.ranges:
            raise GrammarError("empty character class")
        object.__setattr__(self, "ranges", _normalize_ranges(self.ranges))

    def contains_char(self, c: str) -> bool:
        return any(lo <= c <= hi for lo, hi in self.ranges)

    def matches(self, s: str) -> bool:
        if not s:
            return False
        if len(s) > 1 and not self.repeatable:
            return False
        return all(self.contains_char(c) for c in s)

    def min_char(self) -> str:
        return self.ranges[0][0]

    def chars(self) -> str:
        return "".join(
            chr(o) for lo, hi in self.ranges for o in range(ord(lo), ord(hi) + 1)
        )


def _normalize_ranges(ranges):
    """Sort ranges and merge overlapping or adjacent ones."""
    pairs = sorted((ord(lo), ord(hi)) for lo, hi in ranges)
    for lo, hi in pairs:
        if lo > hi:
            raise GrammarError("inverted character range")
    merged: list[list[int]] = []
    for lo, hi in pairs:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((chr(lo), chr(hi)) for lo, hi in merged)


@dataclass(frozen=True)
class NT:
    """Reference to a nonterminal of the syntactic layer."""

    name: str


@dataclass(frozen=True)
class PreT:
    """Reference to a token-table entry (pre-terminal)."""

    token: str


Symbol = Lit | CharClass | NT | PreT


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[Symbol, ...]


# ---------------------------------------------------------------------------
# lexical layer


@dataclass(frozen=True)
class TokenEntry:
    """One pre-terminal: observed literal values plus generalized classes.

    `ranges` is the merged character-class alternative ((), if none was
    accepted), `classes` records which named classes the probes accepted.
    The class names are informational (the ranges are authoritative) and
    do not take part in equality.  `repeatable` applies to the class
    alternative.
    """

    values: tuple[str, ...] = ()
    ranges: tuple[tuple[str, str], ...] = ()
    repeatable: bool = False
    classes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.ranges:
            object.__setattr__(self, "ranges", _normalize_ranges(self.ranges))

    def render_value(self) -> str:
        """The value used when a sequence is rendered: lexicographically least."""
        if self.values:
            return min(self.values)
        if self.ranges:
            return self.ranges[0][0]
        raise GrammarError("token entry with neither values nor ranges")

    def matches(self, s: str) -> bool:
        if s in self.values:
            return True
        if self.ranges:
            return CharClass(self.ranges, self.repeatable).matches(s)
        return False


@dataclass
class TokenTable:
    entries: dict[str, TokenEntry] = field(default_factory=dict)
    whitespace_sensitive: bool = False

    def signature(self):
        return (
            tuple((k, v) for k, v in self.entries.items()),
            self.whitespace_sensitive,
        )

    def __eq__(self, other):
        if not isinstance(other, TokenTable):
            return NotImplemented
        return self.signature() == other.signature()


# ---------------------------------------------------------------------------
# grammar


_ID_SHAPED = None  # compiled lazily (avoids importing re at module load for nothing)


def _looks_like_token_id(name: str) -> bool:
    global _ID_SHAPED
    if _ID_SHAPED is None:
        import re

        _ID_SHAPED = re.compile(r"t\d+\Z")
    return bool(_ID_SHAPED.match(name))


@dataclass
class Grammar:
    """Immutable grammar value.  Mutating operations return new instances.

    `nonterminals` is the insertion-ordered registry; fresh ids come from
    the monotone `next_id` counter (n0, n1, ...) so equal-seed runs build
    byte-identical grammars.
    """

    start: str
    productions: tuple[Production, ...] = ()
    nonterminals: tuple[str, ...] = ()
    next_id: int = 0
    table: TokenTable | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start!r} not in registry")

    def signature(self):
        tbl = self.table.signature() if self.table is not None else None
        return (self.start, self.productions, self.nonterminals, tbl)

    def __eq__(self, other):
        if not isinstance(other, Grammar):
            return NotImplemented
        return self.signature() == other.signature()

    # -- registry helpers ---------------------------------------------------

    def prods_of(self, name: str) -> tuple[int, ...]:
        idx = self._cache.get("by_lhs")
        if idx is None:
            idx = {}
            for i, p in enumerate(self.productions):
                idx.setdefault(p.lhs, []).append(i)
            idx = {k: tuple(v) for k, v in idx.items()}
            self._cache["by_lhs"] = idx
        return idx.get(name, ())

    def alternatives(self, name: str) -> tuple[tuple[Symbol, ...], ...]:
        return tuple(self.productions[i].rhs for i in self.prods_of(name))

    def fresh(self) -> tuple["Grammar", str]:
        n = self.next_id
        name = f"n{n}"
        while name in self.nonterminals:
            n += 1
            name = f"n{n}"
        g = replace(
            self,
            nonterminals=self.nonterminals + (name,),
            next_id=n + 1,
            _cache={},
        )
        return g, name

    def with_productions(self, productions, nonterminals=None) -> "Grammar":
        return replace(
            self,
            productions=tuple(productions),
            nonterminals=self.nonterminals if nonterminals is None else tuple(nonterminals),
            _cache={},
        )

    def has_token(self, element: str) -> bool:
        return self.table is not None and element in self.table.entries


def empty_grammar(table: TokenTable | None = None, start: str = "n0") -> Grammar:
    nxt = int(start[1:]) + 1 if start[:1] == "n" and start[1:].isdigit() else 0
    return Grammar(
        start=start, productions=(), nonterminals=(start,), next_id=nxt, table=table
    )


# ---------------------------------------------------------------------------
# building


def element_symbol(g: Grammar, element: str) -> Symbol:
    """Map a token-sequence element onto a grammar symbol."""
    if g.has_token(element):
        return PreT(element)
    if _looks_like_token_id(element):
        raise GrammarError(f"unknown token id {element!r}")
    return Lit(element)


def add_sequence(g: Grammar, seq) -> Grammar:
    """Add one start alternative mirroring `seq` (no-op if already present)."""
    rhs = tuple(element_symbol(g, e) for e in seq)
    prod = Production(g.start, rhs)
    if prod in g.productions:
        return g
    return g.with_productions(g.productions + (prod,))


# ---------------------------------------------------------------------------
# membership (chart recognizer)

# An Earley recognizer rather than CYK: no normal-form conversion, so the
# grammar the metrics describe is the grammar that gets parsed.  Epsilon is
# handled with the nullable-prediction fix, ambiguity and left/right
# recursion fall out of the chart construction.


def _nullable(g: Grammar) -> frozenset[str]:
    ns = g._cache.get("nullable")
    if ns is not None:
        return ns
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs in nullable:
                continue
            if all(isinstance(s, NT) and s.name in nullable for s in p.rhs):
                nullable.add(p.lhs)
                changed = True
    ns = frozenset(nullable)
    g._cache["nullable"] = ns
    return ns


_NTK, _EXACT, _CLASS = 0, 1, 2


def _compiled(g: Grammar):
    """Integer-indexed production tables for the recognizer."""
    comp = g._cache.get("compiled")
    if comp is not None:
        return comp
    nt_ids = {name: i for i, name in enumerate(g.nonterminals)}
    prods = []
    by_lhs: list[list[int]] = [[] for _ in g.nonterminals]
    for pi, p in enumerate(g.productions):
        rhs = []
        for s in p.rhs:
            if isinstance(s, NT):
                rhs.append((_NTK, nt_ids[s.name]))
            elif isinstance(s, Lit):
                rhs.append((_EXACT, s.text))
            elif isinstance(s, PreT):
                rhs.append((_EXACT, s.token))
            else:
                rhs.append((_CLASS, s))
        lhs_id = nt_ids[p.lhs]
        prods.append((lhs_id, tuple(rhs)))
        by_lhs[lhs_id].append(pi)
    nullable = frozenset(nt_ids[n] for n in _nullable(g) if n in nt_ids)
    token_ids = frozenset(g.table.entries) if g.table is not None else frozenset()
    comp = (nt_ids, tuple(prods), tuple(tuple(x) for x in by_lhs), nullable, token_ids)
    g._cache["compiled"] = comp
    return comp


def membership(g: Grammar, tokens) -> bool:
    """True iff the element sequence is derivable from the start symbol."""
    tokens = tuple(tokens)
    n = len(tokens)
    nt_ids, prods, by_lhs, nullable, token_ids = _compiled(g)
    start_id = nt_ids[g.start]

    chart: list[set[tuple[int, int, int]]] = [set() for _ in range(n + 1)]
    waiting: list[dict[int, list[tuple[int, int, int]]]] = [dict() for _ in range(n + 1)]

    for i in range(n + 1):
        seen = chart[i]
        agenda = list(seen)
        waits = waiting[i]
        predicted: set[int] = set()
        if i == 0:
            for pj in by_lhs[start_id]:
                item = (pj, 0, 0)
                if item not in seen:
                    seen.add(item)
                    agenda.append(item)
        while agenda:
            item = agenda.pop()
            pi, dot, origin = item
            rhs = prods[pi][1]
            if dot < len(rhs):
                kind, val = rhs[dot]
                if kind == _NTK:
                    waits.setdefault(val, []).append(item)
                    if val not in predicted:
                        predicted.add(val)
                        for pj in by_lhs[val]:
                            nitem = (pj, 0, i)
                            if nitem not in seen:
                                seen.add(nitem)
                                agenda.append(nitem)
                    if val in nullable:
                        nitem = (pi, dot + 1, origin)
                        if nitem not in seen:
                            seen.add(nitem)
                            agenda.append(nitem)
                elif i < n:
                    e = tokens[i]
                    if (val == e) if kind == _EXACT else (e not in token_ids and val.matches(e)):
                        chart[i + 1].add((pi, dot + 1, origin))
            else:
                lhs = prods[pi][0]
                for wpi, wdot, worigin in waiting[origin].get(lhs, ()):
                    nitem = (wpi, wdot + 1, worigin)
                    if nitem not in seen:
                        seen.add(nitem)
                        agenda.append(nitem)

    return any(
        prods[pi][0] == start_id and dot == len(prods[pi][1]) and origin == 0
        for (pi, dot, origin) in chart[n]
    )


# ---------------------------------------------------------------------------
# simplification

# Four language-preserving rewrites, run to fixpoint in order:
#   1. inline single-production nonterminals whose rhs has length 1
#   2. drop duplicate productions
#   3. drop nonterminals unreachable from the start symbol
#   4. merge nonterminals with identical alternative sets (keep earlier id)


def _substitute(prods, name: str, replacement: Symbol):
    target = NT(name)
    return [
        Production(p.lhs, tuple(replacement if s == target else s for s in p.rhs))
        for p in prods
    ]


def simplify(g: Grammar) -> Grammar:
    prods = list(g.productions)
    nts = list(g.nonterminals)
    start = g.start

    while True:
        changed = False

        # rule 1
        while True:
            by_lhs: dict[str, list[Production]] = {}
            for p in prods:
                by_lhs.setdefault(p.lhs, []).append(p)
            victim = None
            for name in nts:
                own = by_lhs.get(name, [])
                if (
                    name != start
                    and len(own) == 1
                    and len(own[0].rhs) == 1
                    and own[0].rhs[0] != NT(name)
                ):
                    victim = (name, own[0])
                    break
            if victim is None:
                break
            name, prod = victim
            prods = [p for p in prods if p is not prod]
            prods = _substitute(prods, name, prod.rhs[0])
            nts.remove(name)
            changed = True

        # rule 2
        seen: set[Production] = set()
        deduped = []
        for p in prods:
            if p not in seen:
                seen.add(p)
                deduped.append(p)
        if len(deduped) != len(prods):
            prods = deduped
            changed = True

        # rule 3
        reachable = {start}
        frontier = [start]
        while frontier:
            cur = frontier.pop()
            for p in prods:
                if p.lhs != cur:
                    continue
                for s in p.rhs:
                    if isinstance(s, NT) and s.name not in reachable:
                        reachable.add(s.name)
                        frontier.append(s.name)
        if any(n not in reachable for n in nts):
            nts = [n for n in nts if n in reachable]
            prods = [
                p
                for p in prods
                if p.lhs in reachable
                and all(not isinstance(s, NT) or s.name in reachable for s in p.rhs)
            ]
            changed = True

        # rule 4
        altsets: dict[frozenset, str] = {}
        merged = None
        for name in nts:
            alts = frozenset(p.rhs for p in prods if p.lhs == name)
            if alts in altsets:
                merged = (altsets[alts], name)
                break
            altsets[alts] = name
        if merged is not None:
            keep, drop = merged
            if drop == start:
                keep, drop = drop, keep
            prods = [p for p in prods if p.lhs != drop]
            prods = _substitute(prods, drop, NT(keep))
            nts.remove(drop)
            changed = True

        if not changed:
            break

    return g.with_productions(prods, nts)


# ---------------------------------------------------------------------------
# size metrics


@dataclass(frozen=True)
class GrammarMetrics:
    nt_count: int
    terminal_count: int
    alternatives: int
    avg_rule_len: Fraction
    size_sum: int


def metrics(g: Grammar) -> GrammarMetrics:
    """Readability metrics, counting the syntactic and lexical layers both.

    Every production (and every token-table alternative, each of length 1)
    contributes max(1, len(rhs)) to the size sum, so epsilon rules count as
    length 1.
    """
    terminals: set = set()
    alternatives = 0
    size_sum = 0
    for p in g.productions:
        alternatives += 1
        size_sum += max(1, len(p.rhs))
        for s in p.rhs:
            if isinstance(s, Lit):
                terminals.add(s.text)
            elif isinstance(s, CharClass):
                terminals.add(s)
    nt_count = len(g.nonterminals)
    if g.table is not None:
        for entry in g.table.entries.values():
            nt_count += 1
            for v in entry.values:
                alternatives += 1
                size_sum += 1
                terminals.add(v)
            if entry.ranges:
                alternatives += 1
                size_sum += 1
                terminals.add(CharClass(entry.ranges, entry.repeatable))
    avg = Fraction(size_sum, alternatives) if alternatives else Fraction(0)
    return GrammarMetrics(nt_count, len(terminals), alternatives, avg, size_sum)


# ---------------------------------------------------------------------------
# shortest yields

# Witness strings: the minimum-length terminal yield of a symbol, ties
# broken by production registry order.  Yields are computed at the token
# level (tuples of elements); the flat-string form joins the rendered
# pieces.  Used for swap contexts and as the sampler fallback.


def _piece(g: Grammar, sym: Symbol) -> tuple[str, int]:
    """Terminal element and its rendered length for a non-NT symbol."""
    if isinstance(sym, Lit):
        return sym.text, len(sym.text)
    if isinstance(sym, PreT):
        if g.table is None or sym.token not in g.table.entries:
            raise GrammarError(f"unknown token id {sym.token!r}")
        return sym.token, len(g.table.entries[sym.token].render_value())
    if isinstance(sym, CharClass):
        return sym.min_char(), 1
    raise TypeError(sym)


def _yield_table(g: Grammar) -> dict[str, tuple[int, int]]:
    """name -> (cost, production index) for every productive nonterminal."""
    tbl = g._cache.get("yields")
    if tbl is not None:
        return tbl
    cost: dict[str, tuple[int, int]] = {}

    def prod_cost(p: Production) -> int | None:
        total = 0
        for s in p.rhs:
            if isinstance(s, NT):
                if s.name not in cost:
                    return None
                total += cost[s.name][0]
            else:
                total += _piece(g, s)[1]
        return total

    changed = True
    while changed:
        changed = False
        for name in g.nonterminals:
            best = cost.get(name)
            for pi in g.prods_of(name):
                c = prod_cost(g.productions[pi])
                if c is None:
                    continue
                if best is None or c < best[0]:
                    best = (c, pi)
            if best is not None and best != cost.get(name):
                cost[name] = best
                changed = True
    g._cache["yields"] = cost
    return cost


def is_productive(g: Grammar, name: str) -> bool:
    return name in _yield_table(g)


def shortest_yield_tokens(g: Grammar, sym: Symbol) -> tuple[str, ...]:
    """Token-level witness yield of a symbol."""
    if not isinstance(sym, NT):
        return (_piece(g, sym)[0],)
    tbl = _yield_table(g)
    if sym.name not in tbl:
        raise GrammarError(f"unproductive symbol {sym.name!r}")
    memo = g._cache.setdefault("yield_tokens", {})

    def build(name: str) -> tuple[str, ...]:
        if name in memo:
            return memo[name]
        out: list[str] = []
        for s in g.productions[tbl[name][1]].rhs:
            if isinstance(s, NT):
                out.extend(build(s.name))
            else:
                out.append(_piece(g, s)[0])
        memo[name] = tuple(out)
        return memo[name]

    return build(sym.name)


def span_yield_tokens(g: Grammar, symbols) -> tuple[str, ...]:
    out: list[str] = []
    for s in symbols:
        out.extend(shortest_yield_tokens(g, s))
    return tuple(out)


def shortest_yield(g: Grammar, sym: Symbol) -> str:
    """Flat witness string (rendered pieces joined without separators)."""
    pieces = []
    for el in shortest_yield_tokens(g, sym):
        if g.has_token(el):
            pieces.append(g.table.entries[el].render_value())
        else:
            pieces.append(el)
    return "".join(pieces)


# ---------------------------------------------------------------------------
# derivation context frames

# frame(A) = token sequences L, R with start =>* L A R, minimized by
# rendered length.  Parents are fixed on first improvement only, which
# keeps reconstruction cycle-free even through unit rules.


def _frame_table(g: Grammar):
    tbl = g._cache.get("frames")
    if tbl is not None:
        return tbl
    yields = _yield_table(g)
    INF = float("inf")
    cost: dict[str, float] = {n: INF for n in g.nonterminals}
    parent: dict[str, tuple[int, int]] = {}
    cost[g.start] = 0.0

    sites = []
    for pi, p in enumerate(g.productions):
        for pos, s in enumerate(p.rhs):
            if isinstance(s, NT):
                sites.append((pi, pos, s.name))

    def side_cost(p: Production, skip: int) -> float:
        total = 0.0
        for i, s in enumerate(p.rhs):
            if i == skip:
                continue
            if isinstance(s, NT):
                if s.name not in yields:
                    return INF
                total += yields[s.name][0]
            else:
                total += _piece(g, s)[1]
        return total

    changed = True
    while changed:
        changed = False
        for pi, pos, name in sites:
            p = g.productions[pi]
            if cost.get(p.lhs, INF) == INF:
                continue
            c = cost[p.lhs] + side_cost(p, pos)
            if c < cost.get(name, INF):
                cost[name] = c
                parent[name] = (pi, pos)
                changed = True

    tbl = (cost, parent, sites)
    g._cache["frames"] = tbl
    return tbl


def _frame_of(g: Grammar, name: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    cost, parent, _ = _frame_table(g)
    if cost.get(name) == float("inf") or name not in cost:
        raise GrammarError(f"no derivation context for {name!r}")
    memo = g._cache.setdefault("frame_tokens", {})

    def build(n: str):
        if n == g.start and n not in parent:
            return (), ()
        if n in memo:
            return memo[n]
        pi, pos = parent[n]
        p = g.productions[pi]
        pl, pr = build(p.lhs)
        left = pl + span_yield_tokens(g, p.rhs[:pos])
        right = span_yield_tokens(g, p.rhs[pos + 1 :]) + pr
        memo[n] = (left, right)
        return memo[n]

    return build(name)


def frames_for_span(g: Grammar, prod_idx: int, span: tuple[int, int], k: int = 1):
    """Up to k distinct sentence contexts around rhs[span] of a production.

    Each frame is (left, right): token sequences such that
    left + <span content> + right is a sentence of the grammar.
    """
    p = g.productions[prod_idx]
    i, j = span
    inner_l = span_yield_tokens(g, p.rhs[:i])
    inner_r = span_yield_tokens(g, p.rhs[j:])

    host_frames: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
    primary = _frame_of(g, p.lhs)
    host_frames.append(primary)
    if k > 1:
        cost, _, sites = _frame_table(g)
        cands = []
        if p.lhs == g.start:
            cands.append((0.0, -1, ((), ())))
        for order, (pi, pos, name) in enumerate(sites):
            if name != p.lhs:
                continue
            host = g.productions[pi]
            if cost.get(host.lhs, float("inf")) == float("inf"):
                continue
            try:
                hl, hr = _frame_of(g, host.lhs)
            except GrammarError:
                continue
            left = hl + span_yield_tokens(g, host.rhs[:pos])
            right = span_yield_tokens(g, host.rhs[pos + 1 :]) + hr
            cands.append((float(len("".join(left)) + len("".join(right))), order, (left, right)))
        cands.sort(key=lambda t: (t[0], t[1]))
        for _, _, f in cands:
            if f not in host_frames:
                host_frames.append(f)
            if len(host_frames) >= k:
                break
    return [(hl + inner_l, inner_r + hr) for hl, hr in host_frames[:k]]
