from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bruteforce
from conftest import build, fixture_grammars
from gramforge.grammar import (
    CharClass,
    GrammarError,
    Lit,
    NT,
    PreT,
    Production,
    TokenEntry,
    TokenTable,
    add_sequence,
    element_symbol,
    empty_grammar,
    membership,
    metrics,
    shortest_yield,
    shortest_yield_tokens,
    simplify,
)
from gramforge.grammar_io import serialize_grammar


# ---------------------------------------------------------------------------
# symbols


def test_literal_must_be_nonempty():
    with pytest.raises(GrammarError):
        Lit("")


def test_charclass_normalizes_ranges():
    cc = CharClass((("a", "z"), ("0", "9")))
    assert cc.ranges == (("0", "9"), ("a", "z"))
    merged = CharClass((("a", "m"), ("k", "z")))
    assert merged.ranges == (("a", "z"),)


def test_charclass_matching():
    cc = CharClass((("a", "z"),), repeatable=False)
    assert cc.matches("q")
    assert not cc.matches("qq")
    rep = CharClass((("a", "z"),), repeatable=True)
    assert rep.matches("qq")
    assert not rep.matches("q9")
    assert not rep.matches("")


# ---------------------------------------------------------------------------
# add_sequence


def table_t1():
    return TokenTable(entries={"t1": TokenEntry(values=("3", "a"))})


def test_add_sequence_first_insertion():
    g = empty_grammar(table_t1())
    g2 = add_sequence(g, ["t1", "+", "t1", ";"])
    assert g2.productions == (
        Production("n0", (PreT("t1"), Lit("+"), PreT("t1"), Lit(";"))),
    )
    # original grammar untouched
    assert g.productions == ()


def test_add_sequence_duplicate_suppressed():
    g = add_sequence(empty_grammar(table_t1()), ["t1", ";"])
    g2 = add_sequence(g, ["t1", ";"])
    assert g2 == g


def test_add_sequence_appends_alternative_in_order():
    g = add_sequence(empty_grammar(table_t1()), ["t1", ";"])
    g2 = add_sequence(g, ["t1", "+", "t1", ";"])
    # serialization shows both alternatives of the start, in insertion order
    text = serialize_grammar(g2)
    assert 'n0 : t1 ";" | t1 "+" t1 ";" ;' in text


def test_add_sequence_unknown_token_id():
    g = empty_grammar(table_t1())
    with pytest.raises(GrammarError, match="t9"):
        add_sequence(g, ["t9", ";"])


def test_element_symbol_literal_fallback():
    g = empty_grammar(table_t1())
    assert element_symbol(g, "+") == Lit("+")
    assert element_symbol(g, "t1") == PreT("t1")


# ---------------------------------------------------------------------------
# membership


def test_membership_two_statement_accepts(motivating_grammar):
    assert membership(motivating_grammar, ["a", "+", "3", ";"])


def test_membership_two_statement_rejects(motivating_grammar):
    # derived expectation: enumerate the whole language up to length 4
    lang = bruteforce.language_upto(motivating_grammar, 4)
    assert ("a", ";") not in lang
    assert not membership(motivating_grammar, ["a", ";"])


def test_membership_own_witness(zoo_grammar):
    w = shortest_yield_tokens(zoo_grammar, NT(zoo_grammar.start))
    assert membership(zoo_grammar, w)


def test_membership_unknown_token_is_false(motivating_grammar):
    assert not membership(motivating_grammar, ["zzz"])


def test_membership_epsilon():
    g = fixture_grammars()["nested_nullable"]
    assert membership(g, [])
    assert membership(g, ["(", ")"])
    assert membership(g, ["(", "(", ")", ")"])
    assert not membership(g, ["(", "("])


def test_membership_matches_bruteforce_exhaustively(zoo_grammar):
    """Chart recognizer vs independent enumeration, all strings len <= 6."""
    lang = bruteforce.language_upto(zoo_grammar, 6)
    vocab = bruteforce.vocabulary(zoo_grammar)
    mismatches = []
    for cand in bruteforce.all_strings_upto(vocab, 6):
        if membership(zoo_grammar, cand) != (cand in lang):
            mismatches.append(cand)
    assert mismatches == []


# ---------------------------------------------------------------------------
# simplify


def test_simplify_inlines_single_unit_production():
    g = build(
        "start",
        [("start", [NT("n1"), Lit(";")]), ("n1", [Lit("a")])],
        registry=["start", "n1"],
    )
    s = simplify(g)
    assert s.productions == (Production("start", (Lit("a"), Lit(";"))),)
    assert s.nonterminals == ("start",)


def test_simplify_removes_duplicates():
    g = build("start", [("start", [Lit("a")]), ("start", [Lit("a")])])
    s = simplify(g)
    assert s.productions == (Production("start", (Lit("a"),)),)


def test_simplify_drops_unreachable():
    g = build(
        "s",
        [("s", [Lit("a")]), ("dead", [Lit("b"), NT("dead")])],
        registry=["s", "dead"],
    )
    s = simplify(g)
    assert s.nonterminals == ("s",)


def test_simplify_merges_identical_alternative_sets():
    g = build(
        "s",
        [
            ("s", [NT("x"), NT("y")]),
            ("x", [Lit("a")]),
            ("x", [Lit("b")]),
            ("y", [Lit("a")]),
            ("y", [Lit("b")]),
        ],
    )
    s = simplify(g)
    assert "y" not in s.nonterminals
    assert Production("s", (NT("x"), NT("x"))) in s.productions


def test_simplify_idempotent(zoo_grammar):
    once = simplify(zoo_grammar)
    twice = simplify(once)
    assert once == twice


def test_simplify_preserves_membership(zoo_grammar):
    simplified = simplify(zoo_grammar)
    vocab = bruteforce.vocabulary(zoo_grammar)
    for cand in bruteforce.all_strings_upto(vocab, 5):
        assert membership(zoo_grammar, cand) == membership(simplified, cand)
    assert metrics(simplified).size_sum <= metrics(zoo_grammar).size_sum


def test_simplify_never_touches_start():
    g = build("s", [("s", [Lit("a")])])
    assert simplify(g).start == "s"


# ---------------------------------------------------------------------------
# metrics


def test_metrics_two_statement(motivating_grammar):
    m = metrics(motivating_grammar)
    assert m.nt_count == 3
    assert m.alternatives == 5
    assert m.size_sum == 8
    assert m.avg_rule_len == Fraction(8, 5)
    assert m.terminal_count == 5  # a 3 < + ;


def test_metrics_single_production():
    g = build("s", [("s", [Lit("a")])])
    m = metrics(g)
    assert (m.nt_count, m.alternatives, m.size_sum) == (1, 1, 1)
    assert m.avg_rule_len == 1


def test_metrics_epsilon_counts_as_length_one():
    g = build("s", [("s", []), ("s", [Lit("a")])])
    assert metrics(g).size_sum == 2


def test_metrics_counts_token_layer():
    g = build(
        "n0",
        [("n0", [PreT("t1"), Lit(";")])],
        table=TokenTable(
            entries={
                "t1": TokenEntry(values=("3", "a"), ranges=(("a", "z"),), repeatable=True)
            }
        ),
    )
    m = metrics(g)
    assert m.nt_count == 2  # n0 plus pre-terminal t1
    assert m.alternatives == 1 + 3  # rule, two values, one class
    assert m.size_sum == 2 + 3


# ---------------------------------------------------------------------------
# shortest yields


def test_yield_of_literal(motivating_grammar):
    assert shortest_yield(motivating_grammar, Lit("a")) == "a"


def test_yield_two_statement(motivating_grammar):
    # t2's first alternative is "<" so registry order picks it
    y = shortest_yield(motivating_grammar, NT("t0"))
    assert y == "a<a;"
    assert len(y) == 4
    lang = bruteforce.language_upto(motivating_grammar, 4)
    assert tuple(y) in lang  # single-char elements here


def test_yield_charclass_lowest_char():
    cc = CharClass((("a", "z"),))
    g = build("s", [("s", [cc])])
    assert shortest_yield(g, cc) == "a"


def test_yield_unproductive_symbol_errors():
    g = build("s", [("s", [NT("loop")]), ("loop", [NT("loop")])])
    with pytest.raises(GrammarError, match="loop"):
        shortest_yield(g, NT("loop"))


def test_yield_registry_tiebreak():
    g = build("s", [("s", [Lit("x")]), ("s", [Lit("y")])])
    assert shortest_yield(g, NT("s")) == "x"


# ---------------------------------------------------------------------------
# determinism


def test_fresh_id_determinism():
    def run():
        g = empty_grammar(table_t1())
        g = add_sequence(g, ["t1", ";"])
        g, a = g.fresh()
        g, b = g.fresh()
        return (a, b, g.nonterminals)

    assert run() == run()
    assert run()[:2] == ("n1", "n2")


# ---------------------------------------------------------------------------
# properties


@st.composite
def small_grammars(draw):
    n_rules = draw(st.integers(1, 5))
    names = ["n0", "n1", "n2"]
    terminals = ["a", "b", ";"]
    rules = []
    lhss = set()
    for _ in range(n_rules):
        lhs = draw(st.sampled_from(names))
        lhss.add(lhs)
        rhs = draw(
            st.lists(
                st.one_of(
                    st.sampled_from([Lit(t) for t in terminals]),
                    st.sampled_from([NT(n) for n in names]),
                ),
                max_size=3,
            )
        )
        rules.append((lhs, rhs))
    if "n0" not in lhss:
        rules.append(("n0", [Lit("a")]))
    registry = [n for n in names if n == "n0" or any(l == n for l, _ in rules)]
    return build("n0", rules, registry=registry)


@given(small_grammars())
@settings(max_examples=60, deadline=None)
def test_simplify_idempotent_random(g):
    once = simplify(g)
    assert simplify(once) == once


@given(small_grammars())
@settings(max_examples=60, deadline=None)
def test_simplify_language_preserving_random(g):
    simplified = simplify(g)
    for cand in bruteforce.all_strings_upto(["a", "b", ";"], 4):
        assert membership(g, cand) == membership(simplified, cand)
