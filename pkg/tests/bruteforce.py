"""Independent language enumeration used as a test oracle.

Bottom-up fixpoint over productions: for each nonterminal, grow the set of
token tuples (up to a length bound) derivable from it until nothing
changes.  Deliberately shares no code with the chart recognizer.
"""

from itertools import product

from gramforge.grammar import CharClass, Lit, NT, PreT


def _terminal_expansions(sym, rep_cap=2):
    if isinstance(sym, Lit):
        return {(sym.text,)}
    if isinstance(sym, PreT):
        return {(sym.token,)}
    if isinstance(sym, CharClass):
        chars = sym.chars()
        out = {(c,) for c in chars}
        if sym.repeatable:
            for k in range(2, rep_cap + 1):
                out |= {("".join(t),) for t in product(chars, repeat=k)}
        return out
    raise TypeError(sym)


def language_upto(g, max_len, rep_cap=2):
    """All token tuples of length <= max_len derivable from the start symbol."""
    sets = {name: set() for name in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            partials = {()}
            for sym in p.rhs:
                if isinstance(sym, NT):
                    expansions = sets.get(sym.name, set())
                else:
                    expansions = _terminal_expansions(sym, rep_cap)
                nxt = set()
                for left in partials:
                    room = max_len - len(left)
                    for ext in expansions:
                        if len(ext) <= room:
                            nxt.add(left + ext)
                partials = nxt
                if not partials:
                    break
            for t in partials:
                if t not in sets[p.lhs]:
                    sets[p.lhs].add(t)
                    changed = True
    return sets[g.start]


def vocabulary(g):
    """Terminal elements a candidate token string can be built from."""
    vocab = set()
    for p in g.productions:
        for s in p.rhs:
            if isinstance(s, Lit):
                vocab.add(s.text)
            elif isinstance(s, PreT):
                vocab.add(s.token)
            elif isinstance(s, CharClass):
                vocab.update(s.chars())
    return sorted(vocab)


def all_strings_upto(vocab, max_len):
    for n in range(max_len + 1):
        yield from product(vocab, repeat=n)
