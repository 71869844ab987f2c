import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build
from gramforge.grammar import (
    CharClass,
    Lit,
    NT,
    PreT,
    Production,
    TokenEntry,
    TokenTable,
)
from gramforge.grammar_io import (
    GrammarFormatError,
    normalize,
    parse_grammar,
    round_trip,
    serialize_grammar,
)

SAMPLE = """\
# comment line
%start t0
%token t1 = "a" | "3" ;
%token t5 = [a-z]+ ;
t0 : t1 "+" t1 ";" | t1 ";" ;
"""


def test_parse_sample():
    g = parse_grammar(SAMPLE)
    assert g.start == "t0"
    assert list(g.table.entries) == ["t1", "t5"]
    assert g.table.entries["t1"].values == ("3", "a")
    assert g.table.entries["t5"].ranges == (("a", "z"),)
    assert g.table.entries["t5"].repeatable
    assert g.productions == (
        Production("t0", (PreT("t1"), Lit("+"), PreT("t1"), Lit(";"))),
        Production("t0", (PreT("t1"), Lit(";"))),
    )


def test_round_trip_two_statement(motivating_grammar):
    text = serialize_grammar(motivating_grammar)
    g2 = parse_grammar(text)
    assert g2 == motivating_grammar
    assert serialize_grammar(g2) == text


def test_round_trip_byte_identical_reserialization():
    g = parse_grammar(SAMPLE)
    text = serialize_grammar(g)
    assert serialize_grammar(parse_grammar(text)) == text


def test_missing_start_line():
    with pytest.raises(GrammarFormatError, match="%start"):
        parse_grammar('t0 : "a" ;\n')


def test_dangling_reference_error():
    text = '%start s\ns : ghost "x" ;\n'
    with pytest.raises(GrammarFormatError, match="ghost"):
        parse_grammar(text)


def test_error_carries_position():
    text = '%start s\ns : "a ;\n'
    with pytest.raises(GrammarFormatError) as e:
        parse_grammar(text)
    assert e.value.line == 2
    assert e.value.col == 5


def test_unknown_escape_rejected():
    with pytest.raises(GrammarFormatError, match="escape"):
        parse_grammar('%start s\ns : "\\q" ;\n')


def test_escapes_round_trip():
    g = build("s", [("s", [Lit('a"b\\c\nd\te\x07')])])
    assert round_trip(g) == g


def test_charclass_repeatable_round_trip():
    g = build(
        "n0",
        [("n0", [PreT("t1")])],
        table=TokenTable(
            entries={"t1": TokenEntry(values=(), ranges=(("0", "9"),), repeatable=True)}
        ),
    )
    g2 = round_trip(g)
    assert g2.table.entries["t1"].ranges == (("0", "9"),)
    assert g2.table.entries["t1"].repeatable
    assert g2 == g


def test_epsilon_alternative_round_trips():
    g = build("s", [("s", [Lit("x"), NT("c"), Lit("y")]), ("c", []), ("c", [Lit("i"), NT("c")])])
    g2 = round_trip(g)
    assert g2 == g
    assert Production("c", ()) in g2.productions


def test_charclass_special_chars():
    g = build("s", [("s", [CharClass((("-", "-"), ("]", "]"), ("a", "b")))])])
    assert round_trip(g) == g


def test_normalize_groups_productions():
    g = build(
        "s",
        [
            ("s", [NT("x")]),
            ("x", [Lit("a")]),
            ("s", [Lit("b")]),
        ],
        registry=["s", "x"],
    )
    ng = normalize(g)
    assert [p.lhs for p in ng.productions] == ["s", "s", "x"]
    # normalized form round-trips to itself structurally
    assert round_trip(ng) == ng


names = st.sampled_from(["n0", "n1", "n2", "t1", "t2"])


@st.composite
def random_grammars(draw):
    use_table = draw(st.booleans())
    table = None
    token_ids = []
    if use_table:
        token_ids = ["t1", "t2"][: draw(st.integers(1, 2))]
        entries = {}
        for tid in token_ids:
            vals = draw(
                st.lists(st.text(alphabet="ab3\"\\\n", min_size=1, max_size=3), min_size=1, max_size=3)
            )
            rng = draw(st.sampled_from([(), (("a", "z"),), (("0", "9"), ("a", "f"))]))
            entries[tid] = TokenEntry(
                values=tuple(sorted(set(vals))),
                ranges=rng,
                repeatable=draw(st.booleans()) if rng else False,
            )
        table = TokenTable(entries=entries, whitespace_sensitive=draw(st.booleans()))
    nt_names = ["n0", "n1", "n2"][: draw(st.integers(1, 3))]
    rules = []
    seen = set()
    for lhs in nt_names:
        n_alts = draw(st.integers(1, 3))
        for _ in range(n_alts):
            rhs = draw(
                st.lists(
                    st.one_of(
                        st.builds(Lit, st.text(alphabet='ab;"\\', min_size=1, max_size=2)),
                        st.sampled_from([NT(n) for n in nt_names]),
                        *(st.sampled_from([PreT(t) for t in token_ids]),) if token_ids else (),
                        st.builds(
                            CharClass,
                            st.sampled_from([(("a", "c"),), (("x", "z"), ("0", "3"))]),
                            st.booleans(),
                        ),
                    ),
                    max_size=3,
                )
            )
            if (lhs, tuple(rhs)) not in seen:  # duplicate productions are invalid
                seen.add((lhs, tuple(rhs)))
                rules.append((lhs, rhs))
    return build("n0", rules, table=table, registry=nt_names)


@given(random_grammars())
@settings(max_examples=80, deadline=None)
def test_round_trip_random(g):
    g = normalize(g)
    text = serialize_grammar(g)
    g2 = parse_grammar(text)
    assert g2 == g
    assert serialize_grammar(g2) == text
