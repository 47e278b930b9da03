import pytest
from hypothesis import given, strategies as st

from gq3.presentations import (
    Commutator,
    Generator,
    Inverse,
    ParseError,
    Power,
    PresentationError,
    Product,
    exponent_sums,
    free_reduce,
    letters,
    make_presentation,
    parse_presentation,
    parse_word,
    pretty,
    reduce_syllables,
    syllables_to_word,
)

NAMES = {"x1": 0, "x2": 1, "x3": 2}


def test_parse_presentation_basic():
    pres = parse_presentation('q=2; gens=[x1,x2]; rels=["x1^2"];')
    assert pres.q == 2 and pres.p == 2 and pres.d == 1
    assert pres.n == 2
    assert len(pres.relators) == 1
    assert pres.relators[0] == Power(Generator(0), 2)


def test_parse_presentation_self_commutator_reduces():
    pres = parse_presentation('q=3; gens=[a]; rels=["[a,a]"];')
    assert free_reduce(pres.relators[0]) == Product(())


def test_parse_presentation_bad_modulus():
    with pytest.raises(PresentationError, match="prime power"):
        parse_presentation('q=6; gens=[x]; rels=[];')


def test_parse_presentation_duplicate_generators():
    with pytest.raises(PresentationError, match="duplicate"):
        make_presentation(2, ["x", "x"], [])


def test_parse_presentation_unknown_generator_positioned():
    with pytest.raises(ParseError) as err:
        parse_presentation('q=2;\ngens=[x1];\nrels=["x1 y"];')
    # position is relative to the relator string, with the relator identified
    assert "relator 1" in str(err.value)
    assert err.value.col == 4


def test_parse_presentation_comments_and_order():
    pres = parse_presentation("# header\nrels=[];\nq = 4;  # four\ngens = [a, b];\n")
    assert pres.q == 4 and pres.generators == ("a", "b")


def test_parse_word_structure():
    w = parse_word("x1^4 [x1,x2]", NAMES)
    assert w == Product((Power(Generator(0), 4), Commutator(Generator(0), Generator(1))))


def test_parse_word_nested_commutator():
    w = parse_word("[[x1,x2],x3]", NAMES)
    assert w == Commutator(Commutator(Generator(0), Generator(1)), Generator(2))


def test_parse_word_power_binds_tighter():
    w = parse_word("x1^2 x2", NAMES)
    assert w == Product((Power(Generator(0), 2), Generator(1)))
    assert parse_word("x1 * x2", NAMES) == parse_word("x1 x2", NAMES)


def test_parse_word_unknown_name():
    with pytest.raises(ParseError, match="unknown generator"):
        parse_word("x9", NAMES)


def test_parse_word_syntax_error_position():
    with pytest.raises(ParseError) as err:
        parse_word("x1 ^", NAMES)
    assert (err.value.line, err.value.col) == (1, 5)


def test_free_reduce_cancellation():
    assert free_reduce(parse_word("x1^-1 x1", NAMES)) == Product(())
    assert free_reduce(parse_word("x1 x1^-1", NAMES)) == Product(())


def test_free_reduce_commutator_expansion():
    w = free_reduce(parse_word("[x1,x2]", NAMES))
    expected = syllables_to_word([(0, -1), (1, -1), (0, 1), (1, 1)])
    assert w == expected


def test_free_reduce_power_of_power():
    assert free_reduce(parse_word("(x1^2)^3", NAMES)) == Power(Generator(0), 6)


def test_free_reduce_without_expansion_keeps_commutators():
    w = parse_word("[x1,x2]", NAMES)
    assert free_reduce(w, expand_commutators=False) == w
    assert free_reduce(parse_word("[a,a]", {"a": 0}), expand_commutators=False) == Product(())


def test_exponent_sums():
    w = parse_word("x1^4 [x1,x2] x2^-3", NAMES)
    assert exponent_sums(w, 3) == [4, -3, 0]


def test_letters_negative_power():
    w = parse_word("(x1 x2)^-2", NAMES)
    assert reduce_syllables(letters(w)) == [(1, -1), (0, -1), (1, -1), (0, -1)]


words = st.deferred(
    lambda: st.one_of(
        st.integers(min_value=0, max_value=2).map(Generator),
        st.tuples(words).map(lambda t: Inverse(t[0])),
        st.tuples(words, st.integers(min_value=-4, max_value=4).filter(lambda e: e != -1)).map(
            lambda t: Power(*t)
        ),
        st.lists(words, min_size=1, max_size=3).map(lambda fs: Product(tuple(fs))),
        st.tuples(words, words).map(lambda t: Commutator(*t)),
    )
)


@given(words)
def test_pretty_parse_round_trip(ast):
    text = pretty(ast, ["x1", "x2", "x3"])
    parsed = parse_word(text, NAMES)
    assert parse_word(pretty(parsed, ["x1", "x2", "x3"]), NAMES) == parsed


@given(words)
def test_free_reduce_idempotent_and_nonincreasing(ast):
    reduced = free_reduce(ast)
    assert free_reduce(reduced) == reduced
    assert len(letters(reduced)) <= len(letters(ast))
