"""Text format for grammars.

    # comment
    %start t0
    %token t1 = "a" | "3" ;        # lexical layer
    %token t5 = [a-z]+ ;           # charclass, '+' = repeatable
    t0 : t1 "+" t1 ";" | t1 ";" ;  # syntactic layer

Literals are double-quoted with escapes \\" \\\\ \\n \\t \\xHH.  Character
classes are [r1r2...] with ranges c-c, a trailing '+' marks them
repeatable.  Alternatives are separated by '|' (an empty alternative is
epsilon), rules end with ';'.  The first statement must be %start.

Serialization is canonical (productions grouped by lhs in first-occurrence
order, single spacing), so serialize(parse(serialize(g))) == serialize(g).
"""

from __future__ import annotations

from .grammar import (
    CharClass,
    Grammar,
    GrammarError,
    Lit,
    NT,
    PreT,
    Production,
    Symbol,
    TokenEntry,
    TokenTable,
)


class GrammarFormatError(GrammarError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# lexing


class _Tok:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _lex(text: str):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg, l=None, c=None):
        raise GrammarFormatError(msg, l if l is not None else line, c if c is not None else col)

    def advance(k=1):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    def read_escape(where):
        nonlocal i
        l0, c0 = line, col
        advance()  # backslash
        if i >= n:
            err(f"unterminated escape in {where}", l0, c0)
        c = text[i]
        if c == "n":
            advance()
            return "\n"
        if c == "t":
            advance()
            return "\t"
        if c == "x":
            advance()
            hexs = text[i : i + 2]
            if len(hexs) < 2 or any(h not in "0123456789abcdefABCDEF" for h in hexs):
                err("bad \\xHH escape", l0, c0)
            advance(2)
            return chr(int(hexs, 16))
        if c in ('"', "\\", "]", "-"):
            advance()
            return c
        err(f"unknown escape \\{c}", l0, c0)

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance()
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                advance()
            continue
        l0, c0 = line, col
        if c == "%":
            j = i + 1
            while j < n and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word not in ("%start", "%token", "%whitespace"):
                err(f"unknown directive {word!r}")
            advance(j - i)
            toks.append(_Tok(word, word, l0, c0))
            continue
        if c in ":=|;":
            advance()
            toks.append(_Tok(c, c, l0, c0))
            continue
        if c == '"':
            advance()
            out = []
            while True:
                if i >= n or text[i] == "\n":
                    err("unterminated string literal", l0, c0)
                if text[i] == '"':
                    advance()
                    break
                if text[i] == "\\":
                    out.append(read_escape("string literal"))
                else:
                    out.append(text[i])
                    advance()
            toks.append(_Tok("lit", "".join(out), l0, c0))
            continue
        if c == "[":
            advance()
            chars = []
            while True:
                if i >= n or text[i] == "\n":
                    err("unterminated character class", l0, c0)
                if text[i] == "]":
                    advance()
                    break
                if text[i] == "\\":
                    chars.append(("c", read_escape("character class")))
                elif text[i] == "-":
                    chars.append(("-", "-"))
                    advance()
                else:
                    chars.append(("c", text[i]))
                    advance()
            ranges = []
            k = 0
            while k < len(chars):
                if (
                    k + 2 < len(chars)
                    and chars[k][0] == "c"
                    and chars[k + 1][0] == "-"
                    and chars[k + 2][0] == "c"
                ):
                    ranges.append((chars[k][1], chars[k + 2][1]))
                    k += 3
                elif chars[k][0] == "c":
                    ranges.append((chars[k][1], chars[k][1]))
                    k += 1
                else:
                    err("dangling '-' in character class", l0, c0)
            if not ranges:
                err("empty character class", l0, c0)
            repeatable = False
            if i < n and text[i] == "+":
                repeatable = True
                advance()
            try:
                cc = CharClass(tuple(ranges), repeatable)
            except GrammarError as e:
                err(str(e), l0, c0)
            toks.append(_Tok("class", cc, l0, c0))
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            advance(j - i)
            toks.append(_Tok("name", name, l0, c0))
            continue
        err(f"unexpected character {c!r}")
    return toks


# ---------------------------------------------------------------------------
# parsing


def parse_grammar(text: str) -> Grammar:
    toks = _lex(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def err(msg, tok=None):
        t = tok or peek()
        if t is None:
            last = toks[-1] if toks else None
            raise GrammarFormatError(msg, last.line if last else 1, last.col if last else 1)
        raise GrammarFormatError(msg, t.line, t.col)

    def expect(kind):
        nonlocal pos
        t = peek()
        if t is None or t.kind != kind:
            err(f"expected {kind!r}")
        pos += 1
        return t

    if peek() is None or peek().kind != "%start":
        err("%start line must come first")
    pos += 1
    start = expect("name").value

    token_order: list[str] = []
    token_defs: dict[str, TokenEntry] = {}
    rules: list[tuple[str, list[list], _Tok]] = []  # lhs, alternatives, pos
    ws_sensitive = False

    while peek() is not None:
        t = peek()
        if t.kind == "%whitespace":
            pos += 1
            mode = expect("name").value
            if mode not in ("sensitive", "insensitive"):
                err("expected 'sensitive' or 'insensitive'", t)
            ws_sensitive = mode == "sensitive"
            continue
        if t.kind == "%token":
            pos += 1
            name_t = expect("name")
            name = name_t.value
            if name in token_defs:
                err(f"duplicate token {name!r}", name_t)
            expect("=")
            values: list[str] = []
            ranges: tuple = ()
            repeatable = False
            while True:
                a = peek()
                if a is None:
                    err("unterminated %token (missing ';')", name_t)
                if a.kind == "lit":
                    values.append(a.value)
                    pos += 1
                elif a.kind == "class":
                    if ranges:
                        err("at most one character class per token", a)
                    ranges = a.value.ranges
                    repeatable = a.value.repeatable
                    pos += 1
                else:
                    err("expected literal or character class", a)
                nxt = peek()
                if nxt is not None and nxt.kind == "|":
                    pos += 1
                    continue
                expect(";")
                break
            if not values and not ranges:
                err(f"token {name!r} has no alternatives", name_t)
            token_defs[name] = TokenEntry(
                values=tuple(sorted(values)), ranges=ranges, repeatable=repeatable
            )
            token_order.append(name)
            continue
        if t.kind == "name":
            lhs_t = expect("name")
            expect(":")
            alts: list[list] = [[]]
            while True:
                a = peek()
                if a is None:
                    err("unterminated rule (missing ';')", lhs_t)
                if a.kind == ";":
                    pos += 1
                    break
                if a.kind == "|":
                    pos += 1
                    alts.append([])
                    continue
                if a.kind in ("lit", "class"):
                    alts[-1].append(a)
                    pos += 1
                    continue
                if a.kind == "name":
                    alts[-1].append(a)
                    pos += 1
                    continue
                err("unexpected token in rule", a)
            rules.append((lhs_t.value, alts, lhs_t))
            continue
        err("expected %token or a rule")

    # resolve names: token ids become pre-terminals, rule lhs become
    # nonterminals, anything else is a dangling reference
    lhs_names = [lhs for lhs, _, _ in rules]
    registry: list[str] = [start]
    for lhs in lhs_names:
        if lhs not in registry:
            registry.append(lhs)

    ordered_entries = {name: token_defs[name] for name in token_order}
    table = (
        TokenTable(entries=ordered_entries, whitespace_sensitive=ws_sensitive)
        if token_order or ws_sensitive
        else None
    )

    productions: list[Production] = []
    for lhs, alts, _ in rules:
        for alt in alts:
            rhs: list[Symbol] = []
            for a in alt:
                if a.kind == "lit":
                    rhs.append(Lit(a.value))
                elif a.kind == "class":
                    rhs.append(a.value)
                else:
                    name = a.value
                    if name in token_defs:
                        rhs.append(PreT(name))
                    elif name in registry:
                        rhs.append(NT(name))
                    else:
                        err(f"dangling reference to {name!r}", a)
            productions.append(Production(lhs, tuple(rhs)))

    seen = set()
    deduped = []
    for p in productions:
        if p not in seen:
            seen.add(p)
            deduped.append(p)

    next_id = 0
    for name in registry:
        if name[:1] == "n" and name[1:].isdigit():
            next_id = max(next_id, int(name[1:]) + 1)

    return Grammar(
        start=start,
        productions=tuple(deduped),
        nonterminals=tuple(registry),
        next_id=next_id,
        table=table,
    )


# ---------------------------------------------------------------------------
# serialization


def _escape_lit(s: str) -> str:
    out = []
    for c in s:
        if c == '"':
            out.append('\\"')
        elif c == "\\":
            out.append("\\\\")
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        elif ord(c) < 0x20 or ord(c) == 0x7F:
            out.append(f"\\x{ord(c):02x}")
        else:
            out.append(c)
    return '"' + "".join(out) + '"'


def _escape_class_char(c: str) -> str:
    if c in ("]", "\\", "-"):
        return "\\" + c
    if c == "\n":
        return "\\n"
    if c == "\t":
        return "\\t"
    if ord(c) < 0x20 or ord(c) == 0x7F:
        return f"\\x{ord(c):02x}"
    return c


def _format_class(ranges, repeatable: bool) -> str:
    parts = []
    for lo, hi in ranges:
        if lo == hi:
            parts.append(_escape_class_char(lo))
        else:
            parts.append(f"{_escape_class_char(lo)}-{_escape_class_char(hi)}")
    return "[" + "".join(parts) + "]" + ("+" if repeatable else "")


def _format_symbol(s: Symbol) -> str:
    if isinstance(s, Lit):
        return _escape_lit(s.text)
    if isinstance(s, CharClass):
        return _format_class(s.ranges, s.repeatable)
    if isinstance(s, NT):
        return s.name
    if isinstance(s, PreT):
        return s.token
    raise TypeError(s)


def serialize_grammar(g: Grammar) -> str:
    lines = [f"%start {g.start}"]
    if g.table is not None:
        if g.table.whitespace_sensitive:
            lines.append("%whitespace sensitive")
        for name, entry in g.table.entries.items():
            alts = [_escape_lit(v) for v in entry.values]
            if entry.ranges:
                alts.append(_format_class(entry.ranges, entry.repeatable))
            lines.append(f"%token {name} = {' | '.join(alts)} ;")
    grouped: dict[str, list[str]] = {}
    order: list[str] = []
    for p in g.productions:
        if p.lhs not in grouped:
            grouped[p.lhs] = []
            order.append(p.lhs)
        grouped[p.lhs].append(" ".join(_format_symbol(s) for s in p.rhs))
    for lhs in order:
        lines.append(f"{lhs} : {' | '.join(grouped[lhs])} ;")
    return "\n".join(lines) + "\n"


def normalize(g: Grammar) -> Grammar:
    """Canonical registry and production order (what serialization emits).

    Productions are grouped by lhs in first-occurrence order; the registry
    lists the start symbol first, then rule lhs in that order.  Running a
    grammar through here makes the in-memory value agree with its file
    form, so registry-order tie-breaks survive a save/load cycle.
    """
    order = []
    for p in g.productions:
        if p.lhs not in order:
            order.append(p.lhs)
    registry = [g.start] + [n for n in order if n != g.start]
    for n in g.nonterminals:
        if n not in registry:
            registry.append(n)
    prods = []
    for lhs in registry:
        prods.extend(p for p in g.productions if p.lhs == lhs)
    return Grammar(
        start=g.start,
        productions=tuple(prods),
        nonterminals=tuple(registry),
        next_id=g.next_id,
        table=g.table,
    )


def round_trip(g: Grammar) -> Grammar:
    return parse_grammar(serialize_grammar(g))
