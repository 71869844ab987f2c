"""Random sentence generation from a grammar.

Two strategies, both leftmost expansion with uniform choice among a
nonterminal's alternatives:

* production-limited ("lpp"): each production may be used at most `limit`
  times within one sample; a nonterminal whose alternatives are all
  exhausted is replaced by its precomputed shortest yield.  This bounds
  sample length without a depth cutoff, so deep parts of the grammar are
  still reachable.
* depth-limited: past `max_depth`, alternatives whose right-hand side is
  all terminals are preferred (uniformly among those, or any alternative
  if none is all-terminal); with `max_len` set, a sample rendering longer
  than the cap triggers a fresh draw, up to 100 attempts, then the start
  symbol's shortest yield is returned.

Samples exist on two levels: the token sequence (pre-terminals left
opaque, used for membership checks) and the instantiated string fed to
oracles.  Pre-terminal instantiation picks uniformly among the entry's
literal values plus, if present, one character-class draw; a class draw
picks one range uniformly and fills it with geometric length (mean 3,
capped at 16) when repeatable.  All randomness comes from the seeded
generator passed in.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import CharClass, Grammar, Lit, NT, PreT, shortest_yield_tokens
from .rng import Rng


@dataclass(frozen=True)
class SamplerSpec:
    kind: str = "lpp"  # "lpp" or "depth"
    limit: int = 10
    max_depth: int = 5
    max_len: int | None = None

    def label(self) -> str:
        if self.kind == "lpp":
            return f"lpp{self.limit}"
        cap = f",max_len={self.max_len}" if self.max_len is not None else ""
        return f"depth{self.max_depth}{cap}"


LPP10 = SamplerSpec(kind="lpp", limit=10)


def parse_sampler(name: str) -> SamplerSpec:
    """CLI sampler names: lppN, arvada, treevada, depthN."""
    name = name.strip().lower()
    if name.startswith("lpp") and name[3:].isdigit():
        return SamplerSpec(kind="lpp", limit=int(name[3:]))
    if name == "arvada":
        return SamplerSpec(kind="depth", max_depth=5, max_len=300)
    if name == "treevada":
        return SamplerSpec(kind="depth", max_depth=5, max_len=None)
    if name.startswith("depth") and name[5:].isdigit():
        return SamplerSpec(kind="depth", max_depth=int(name[5:]))
    raise ValueError(f"unknown sampler {name!r}")


def _draw_class(cc: CharClass, rng: Rng) -> str:
    lo, hi = cc.ranges[rng.randrange(len(cc.ranges))] if len(cc.ranges) > 1 else cc.ranges[0]
    n = rng.geometric() if cc.repeatable else 1
    span = ord(hi) - ord(lo) + 1
    return "".join(chr(ord(lo) + rng.randrange(span)) if span > 1 else lo for _ in range(n))


def _derive(g: Grammar, spec: SamplerSpec, rng: Rng) -> tuple[str, ...]:
    usage: dict[int, int] = {}
    out: list[str] = []
    stack: list[tuple[object, int]] = [(NT(g.start), 0)]
    while stack:
        sym, depth = stack.pop()
        if isinstance(sym, NT):
            alts = g.prods_of(sym.name)
            if spec.kind == "lpp":
                avail = [i for i in alts if usage.get(i, 0) < spec.limit]
                if not avail:
                    out.extend(shortest_yield_tokens(g, sym))
                    continue
                pi = avail[rng.randrange(len(avail))] if len(avail) > 1 else avail[0]
                usage[pi] = usage.get(pi, 0) + 1
            else:
                pool = list(alts)
                if not pool:
                    out.extend(shortest_yield_tokens(g, sym))  # raises if unproductive
                    continue
                if depth >= spec.max_depth:
                    flat = [
                        i
                        for i in pool
                        if all(not isinstance(s, NT) for s in g.productions[i].rhs)
                    ]
                    if flat:
                        pool = flat
                pi = pool[rng.randrange(len(pool))] if len(pool) > 1 else pool[0]
            for s in reversed(g.productions[pi].rhs):
                stack.append((s, depth + 1))
        elif isinstance(sym, Lit):
            out.append(sym.text)
        elif isinstance(sym, PreT):
            out.append(sym.token)
        elif isinstance(sym, CharClass):
            out.append(_draw_class(sym, rng))
        else:
            raise TypeError(sym)
    return tuple(out)


def instantiate(g: Grammar, tokens, rng: Rng) -> str:
    """Pick concrete pre-terminal values and render to a string."""
    from .tokenizer import join_pieces

    table = g.table
    pieces = []
    for el in tokens:
        if table is not None and el in table.entries:
            entry = table.entries[el]
            options = len(entry.values) + (1 if entry.ranges else 0)
            i = rng.randrange(options) if options > 1 else 0
            if i < len(entry.values):
                pieces.append(entry.values[i])
            else:
                pieces.append(_draw_class(CharClass(entry.ranges, entry.repeatable), rng))
        else:
            pieces.append(el)
    sensitive = table.whitespace_sensitive if table is not None else False
    return join_pieces(pieces, sensitive)


def sample_pair(g: Grammar, spec: SamplerSpec, rng: Rng) -> tuple[tuple[str, ...], str]:
    """One draw: (token sequence, instantiated string)."""
    for _ in range(100):
        toks = _derive(g, spec, rng)
        s = instantiate(g, toks, rng)
        if spec.max_len is None or len(s) <= spec.max_len:
            return toks, s
    toks = shortest_yield_tokens(g, NT(g.start))
    return toks, instantiate(g, toks, rng)


def sample(g: Grammar, spec: SamplerSpec, rng: Rng) -> str:
    return sample_pair(g, spec, rng)[1]


def sample_n(g: Grammar, spec: SamplerSpec, n: int, rng: Rng | int) -> list[str]:
    """n draws; duplicates are kept (precision counts per draw)."""
    if not isinstance(rng, Rng):
        rng = Rng(rng)
    return [sample(g, spec, rng) for _ in range(n)]
