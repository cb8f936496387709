from __future__ import annotations

import pytest

from m2mod.lexis import (
    DirectiveKind, IdentifierContext, IdentifierKind, TokenKind, TriviaKind, classify_identifier,
    emit, scan_directive, tokenize,
)
from m2mod.policy import DialectConfig, FacilityId, Severity


def kinds(source, config=None):
    tokens, _ = tokenize(source, config)
    return [(t.kind, t.text) for t in tokens]


def test_array_listing_tokens():
    tokens, diags = tokenize("ARRAY [0 .. Cols], [0 .. Rows] OF REAL")
    assert diags == []
    assert [(t.kind, t.text) for t in tokens[:5]] == [
        (TokenKind.RESERVED, "ARRAY"),
        (TokenKind.DELIMITER, "["),
        (TokenKind.INTEGER, "0"),
        (TokenKind.OPERATOR, ".."),
        (TokenKind.IDENT, "Cols"),
    ]
    assert tokens[2].base == "decimal"
    assert tokens[-1].kind is TokenKind.EOF


def test_empty_input():
    tokens, diags = tokenize("")
    assert [t.kind for t in tokens] == [TokenKind.EOF] and diags == []


def test_synonyms_each_diagnosed_with_edit():
    _, diags = tokenize("x <> y & ~z")
    assert [d.code for d in diags] == ["M2M-SYNONYM"] * 3
    assert [d.suggested_edit.replacement.strip() for d in diags] == ["#", "AND", "NOT"]
    assert all(d.severity is Severity.ERROR for d in diags)


def test_synonym_and_operator_are_disjoint():
    assert kinds("a # b")[1] == (TokenKind.OPERATOR, "#")
    assert kinds("a <> b")[1] == (TokenKind.SYNONYM, "<>")


def test_synonym_in_string_or_comment_is_data():
    _, diags = tokenize("s := '<>' (* a & b *)")
    assert diags == []


def test_reserved_words_are_upper_case_only():
    assert kinds("begin BEGIN")[:2] == [(TokenKind.IDENT, "begin"), (TokenKind.RESERVED, "BEGIN")]


@pytest.mark.parametrize("text,kind,base", [
    ("0FFH", TokenKind.INTEGER, "hex"),
    ("0BH", TokenKind.INTEGER, "hex"),
    ("12CH", TokenKind.INTEGER, "hex"),
    ("377B", TokenKind.INTEGER, "octalB"),
    ("15C", TokenKind.CHAR_CODE, "octalC"),
    ("42", TokenKind.INTEGER, "decimal"),
])
def test_number_classes(text, kind, base):
    token = tokenize(text)[0][0]
    assert (token.kind, token.base, token.text) == (kind, base, text)


def test_reals():
    for text in ("1.0", "3.14E10", "2.5E-3", "6.0E+23", "1."):
        assert tokenize(text)[0][0].kind is TokenKind.REAL, text


def test_range_is_not_a_real():
    assert [t.text for t in tokenize("1..9")[0][:3]] == ["1", "..", "9"]


def test_octal_gating():
    tokens, diags = tokenize("377B")
    assert tokens[0].blocked and tokens[0].text == "377B"
    assert [(d.code, d.severity) for d in diags] == [("M2M-OCTAL", Severity.ERROR)]
    tokens, diags = tokenize("377B", DialectConfig(octal_literals=True))
    assert not tokens[0].blocked
    assert [(d.code, d.severity) for d in diags] == [("M2M-OCTAL", Severity.DEPRECATION)]


@pytest.mark.parametrize("text", ["19B", "8C", "12AB", "0FFHX"])
def test_malformed_literals(text):
    _, diags = tokenize(text)
    assert [d.code for d in diags] == ["M2M-MALFORMED-LITERAL"]


def test_nested_comment_is_one_trivia():
    tokens, diags = tokenize("(* a (* b *) c *) x")
    assert diags == []
    assert [t.kind for t in tokens[0].leading_trivia] == [TriviaKind.COMMENT, TriviaKind.WHITESPACE]
    assert tokens[0].leading_trivia[0].text == "(* a (* b *) c *)"


def test_unterminated_comment():
    tokens, diags = tokenize("x (* a (* b *)")
    assert [d.code for d in diags] == ["M2M-UNTERMINATED-COMMENT"]
    assert emit(tokens) == "x (* a (* b *)"


def test_unterminated_string_recovers():
    tokens, diags = tokenize("s := 'abc\nx := 1")
    assert [d.code for d in diags] == ["M2M-UNTERMINATED-STRING"]
    assert tokens[-2].text == "1"


def test_illegal_characters_including_high_bytes():
    tokens, diags = tokenize("a @ b \xe9 c")
    assert [d.code for d in diags] == ["M2M-ILLEGAL-CHAR", "M2M-ILLEGAL-CHAR"]
    assert tokens[-2].text == "c"


def test_high_bytes_in_comments_and_strings_are_fine():
    assert tokenize("(* caf\xe9 *) s := 'caf\xe9'")[1] == []


def test_crlf_preserved():
    text = "MODULE M;\r\nBEGIN\r\nEND M.\r\n"
    tokens, _ = tokenize(text)
    assert emit(tokens) == text
    assert (tokens[3].text, tokens[3].span.line) == ("BEGIN", 2)


def test_spans_tile_the_input():
    text = "MODULE M; (*$R-*)\n  (* c *) VAR x : INTEGER;\nBEGIN x := 15C END M.\n"
    tokens, _ = tokenize(text)
    pos = 0
    for token in tokens:
        for trivia in token.leading_trivia:
            assert trivia.span.start == pos
            pos = trivia.span.end
        assert token.span.start == pos
        pos = token.span.end
    assert pos == len(text)


# --- identifiers ---------------------------------------------------------------


def test_vms_style_identifier():
    result = classify_identifier("sys$open", DialectConfig(foreign_identifiers=True))
    assert result.kind is IdentifierKind.FOREIGN and result.accepted and result.violation is None


def test_plain_identifier_with_switch_off():
    assert classify_identifier("Cols", DialectConfig()).kind is IdentifierKind.PLAIN


@pytest.mark.parametrize("text,rule", [
    ("a$$b", "ConsecutiveDollar"),
    ("a$", "TrailingDollar"),
    ("_x", "LeadingLowline"),
    ("a__b", "ConsecutiveLowline"),
    ("x_", "TrailingLowline"),
])
def test_structural_violations(text, rule):
    result = classify_identifier(text, DialectConfig(foreign_identifiers=True))
    assert result.code == "M2M-FOREIGN-MALFORMED" and result.violation.value == rule


def test_language_extensions_umbrella_enables_foreign_identifiers():
    assert classify_identifier("a_b", DialectConfig(language_extensions=True)).accepted


def test_module_identifier_context_from_lexer():
    _, diags = tokenize("MODULE My_Mod;", DialectConfig(foreign_identifiers=True))
    assert [d.code for d in diags] == ["M2M-FOREIGN-IN-MODULE-ID"]


def test_malformed_foreign_is_error_even_with_switch_on():
    _, diags = tokenize("x$$ := 1", DialectConfig(foreign_identifiers=True))
    assert [(d.code, d.severity) for d in diags] == [("M2M-FOREIGN-MALFORMED", Severity.ERROR)]


def test_foreign_token_kind():
    tokens, diags = tokenize("c_open", DialectConfig(foreign_identifiers=True))
    assert tokens[0].kind is TokenKind.FOREIGN_IDENT
    assert [(d.facility, d.severity) for d in diags] == []


# --- directives ----------------------------------------------------------------


def test_scan_directive_forms():
    assert scan_directive("(*$CLIENTS=FooLib, BarLib, BazLib*)").kind is DirectiveKind.CANONICAL
    assert scan_directive("(* just a comment *)") is None
    form = scan_directive("(*%F+*)")
    assert form.kind is DirectiveKind.NON_CANONICAL and form.delimiter == "(*%"
    assert scan_directive("(*#page*)").delimiter == "(*#"
    assert scan_directive("%IF x %THEN").kind is DirectiveKind.SEMANTIC_CANDIDATE


def test_non_canonical_directive_edit_rescans_canonical():
    tokens, diags = tokenize("(*%F+*) x")
    assert [d.code for d in diags] == ["M2M-DIRECTIVE"]
    trivia = tokens[0].leading_trivia[0]
    assert trivia.kind is TriviaKind.NON_CANONICAL_DIRECTIVE
    edit = diags[0].suggested_edit
    fixed = trivia.text[: edit.span.start] + edit.replacement + trivia.text[edit.span.end:]
    assert fixed == "(*$F+*)"
    assert scan_directive(fixed).kind is DirectiveKind.CANONICAL


def test_percent_only_at_line_start():
    tokens, diags = tokenize("x\n%IF y %THEN\nz")
    assert [d.code for d in diags] == ["M2M-SEMANTIC-DIRECTIVE"]
    assert diags[0].facility is FacilityId.SEMANTIC_DIRECTIVE_CANDIDATE
    _, diags = tokenize("x % y")
    assert [d.code for d in diags] == ["M2M-ILLEGAL-CHAR"]
