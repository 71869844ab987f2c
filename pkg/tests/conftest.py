import pytest

from gramforge.grammar import (
    CharClass,
    Grammar,
    Lit,
    NT,
    PreT,
    Production,
    TokenEntry,
    TokenTable,
)


def build(start, rules, table=None, registry=None):
    """Compact grammar builder for fixtures.

    rules: list of (lhs, [symbols...]); registry defaults to lhs order.
    """
    names = []
    for lhs, _ in rules:
        if lhs not in names:
            names.append(lhs)
    if registry:
        names = list(registry)
    if start not in names:
        names.insert(0, start)
    prods = tuple(Production(lhs, tuple(rhs)) for lhs, rhs in rules)
    next_id = 0
    for n in names:
        if n[:1] == "n" and n[1:].isdigit():
            next_id = max(next_id, int(n[1:]) + 1)
    return Grammar(
        start=start,
        productions=prods,
        nonterminals=tuple(names),
        next_id=next_id,
        table=table,
    )


@pytest.fixture
def motivating_grammar():
    """The worked two-statement grammar: t0 -> t1 t2 t1 ';' etc."""
    return build(
        "t0",
        [
            ("t0", [NT("t1"), NT("t2"), NT("t1"), Lit(";")]),
            ("t1", [Lit("a")]),
            ("t1", [Lit("3")]),
            ("t2", [Lit("<")]),
            ("t2", [Lit("+")]),
        ],
    )


def fixture_grammars():
    """Small grammar zoo (each <= 6 nonterminals, tiny alphabets)."""
    zoo = {}
    zoo["two_statement"] = build(
        "t0",
        [
            ("t0", [NT("t1"), NT("t2"), NT("t1"), Lit(";")]),
            ("t1", [Lit("a")]),
            ("t1", [Lit("3")]),
            ("t2", [Lit("<")]),
            ("t2", [Lit("+")]),
        ],
    )
    zoo["left_recursion"] = build(
        "e",
        [
            ("e", [NT("e"), Lit("+"), NT("n")]),
            ("e", [NT("n")]),
            ("n", [Lit("1")]),
        ],
    )
    zoo["right_recursion"] = build(
        "s",
        [("s", [Lit("a"), NT("s")]), ("s", [Lit("b")])],
    )
    zoo["epsilon_list"] = build(
        "s",
        [
            ("s", [Lit("<"), NT("c"), Lit(">")]),
            ("c", []),
            ("c", [Lit("i"), NT("c")]),
        ],
    )
    zoo["ambiguous"] = build(
        "s",
        [("s", [NT("s"), NT("s")]), ("s", [Lit("x")])],
    )
    zoo["nested_nullable"] = build(
        "s",
        [("s", [Lit("("), NT("s"), Lit(")")]), ("s", [])],
    )
    table = TokenTable(
        entries={"t1": TokenEntry(values=("3", "a"))}, whitespace_sensitive=False
    )
    zoo["with_tokens"] = build(
        "n0",
        [
            ("n0", [PreT("t1"), Lit(";")]),
            ("n0", [PreT("t1"), Lit("+"), PreT("t1"), Lit(";")]),
        ],
        table=table,
    )
    zoo["charclass_rhs"] = build(
        "s",
        [("s", [CharClass((("a", "c"),)), Lit(";")])],
    )
    return zoo


@pytest.fixture(params=sorted(fixture_grammars()), ids=lambda n: n)
def zoo_grammar(request):
    return fixture_grammars()[request.param]
