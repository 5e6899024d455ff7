import pytest
from hypothesis import given, strategies as st

from cream.lexer import KEYWORDS, Kind, LexError, classify_identifiers, render, tokenize

from golden import GOLDEN

KIND = {"K": Kind.KEYWORD, "I": Kind.IDENTIFIER, "N": Kind.INT_LITERAL, "S": Kind.STR_LITERAL, "O": Kind.OPERATOR, "P": Kind.PUNCT}


@pytest.mark.parametrize("source,expected,ids,_abstract", GOLDEN, ids=[g[0][:24] or "<empty>" for g in GOLDEN])
def test_golden_tokens(source, expected, ids, _abstract):
    toks = tokenize(source)
    assert [(t.text, t.kind) for t in toks] == [(text, KIND[k]) for text, k in expected]
    assert set(classify_identifiers(toks)) == ids


def test_spans_are_byte_offsets():
    toks = tokenize('/* é */ x = "ü";')
    assert toks[0].span == (9, 10)
    assert toks.source_len == len('/* é */ x = "ü";'.encode())
    assert toks[2].text == '"ü"' and toks[2].span == (13, 17)


@pytest.mark.parametrize(
    "source,offset",
    [("int a = 1.5;", 9), ("a & b", 2), ("x = 'c';", 4), ('s = "open', 4), ("/* never closed", 0), ("a | b", 2), ("café", 3)],
)
def test_lex_errors_report_offset(source, offset):
    with pytest.raises(LexError) as err:
        tokenize(source)
    assert err.value.offset == offset


def test_maximal_munch_operators():
    assert tokenize("a<=b").texts == ["a", "<=", "b"]
    assert tokenize("a< =b").texts == ["a", "<", "=", "b"]
    assert tokenize("!!=").texts == ["!", "!="]
    assert tokenize("a//b\n/c").texts == ["a", "/", "c"]


def test_keywords_only_whole_words():
    for kw in KEYWORDS:
        assert tokenize(kw)[0].kind is Kind.KEYWORD
        assert tokenize(kw + "_")[0].kind is Kind.IDENTIFIER


fragments = st.sampled_from(
    ["int", "x", "y_1", "42", '"s\\"t"', "==", "=", "<", "&&", "!", "(", ")", "{", "}", ";", ",", "[", "]", "+", "-", "/* c */", "// c\n"]
)
sources = st.lists(st.tuples(fragments, st.sampled_from([" ", "\n", "\t", "  "])), max_size=30).map(
    lambda parts: "".join(f + sep for f, sep in parts)
)


@given(sources)
def test_round_trip_and_invariants(src):
    toks = tokenize(src)
    assert render(toks) == src
    ends = [t.span for t in toks]
    assert all(a[1] <= b[0] for a, b in zip(ends, ends[1:]))
    assert all(t.span[1] > t.span[0] and t.text for t in toks)
    assert all((t.kind is Kind.KEYWORD) == (t.text in KEYWORDS) for t in toks)
    ids = classify_identifiers(toks)
    assert all(toks[i].kind is Kind.IDENTIFIER for i in ids)
    assert all(i + 1 == len(toks) or toks[i + 1].text != "(" for i in ids)
    assert tokenize(src) == toks
