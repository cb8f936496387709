from __future__ import annotations

import pytest

from m2mod.lexis import TokenKind, tokenize
from m2mod.rewrite import (
    MalformedLiteral, OverlappingEdits, apply_edits, convert_octal_literal, convert_synonyms,
    fix_source, normalize_directives, rewrite_conversions, strip_export_list, unified_diff,
)
from m2mod.source import Edit, LineMap
from m2mod.syntax import parse_source


def octal(text):
    return convert_octal_literal(tokenize(text)[0][0]).replacement


def test_octal_examples():
    assert octal("15C") == "CHR(13)"
    assert octal("0B") == "0"
    assert octal("377B") == "255"
    assert octal("0C") == "CHR(0)"


def test_octal_with_8_or_9_has_no_edit():
    token = tokenize("19B")[0][0]
    with pytest.raises(MalformedLiteral):
        convert_octal_literal(token)


def test_non_octal_token_rejected():
    with pytest.raises(MalformedLiteral):
        convert_octal_literal(tokenize("0FFH")[0][0])


def _apply_synonyms(text):
    tokens, _ = tokenize(text)
    return apply_edits(text, convert_synonyms(tokens))


@pytest.mark.parametrize("before,after", [
    ("a <> b", "a # b"),
    ("x&y", "x AND y"),
    ("~p", "NOT p"),
    ("(a)&(b)", "(a)AND(b)"),
    ("~(a<>b)", "NOT(a#b)"),
    ("a & ~b", "a AND NOT b"),
])
def test_synonyms(before, after):
    assert _apply_synonyms(before) == after


def test_fused_synonym_relexes_as_words():
    tokens, diags = tokenize(_apply_synonyms("x&y"))
    assert diags == []
    assert [(t.kind, t.text) for t in tokens[:3]] == [
        (TokenKind.IDENT, "x"), (TokenKind.RESERVED, "AND"), (TokenKind.IDENT, "y"),
    ]


@pytest.mark.parametrize("before,after", [
    ("(*%F+*) x", "(*$F+*) x"),
    ("(*#page*) x", "(*$page*) x"),
    ("(*$T-*) x", "(*$T-*) x"),
])
def test_directives(before, after):
    tokens, _ = tokenize(before)
    edits = normalize_directives(t for tok in tokens for t in tok.leading_trivia)
    assert apply_edits(before, edits) == after


def _conversions(body):
    text = f"MODULE M;\nBEGIN\n  {body}\nEND M.\n"
    unit, _ = parse_source(text)
    edits, diags = rewrite_conversions(unit)
    out = apply_edits(text, edits)
    return out.split("\n")[2].strip(), diags


@pytest.mark.parametrize("before,after", [
    ("r := FLOAT(n)", "r := VAL(REAL, n)"),
    ("n := TRUNC(x + y)", "n := VAL(CARDINAL, x + y)"),
    ("i := INT(r)", "i := VAL(INTEGER, r)"),
    ("n := CARD(i)", "n := VAL(CARDINAL, i)"),
    ("l := LFLOAT(r)", "l := VAL(LONGREAL, r)"),
    ("r := FLOAT(TRUNC(r))", "r := VAL(REAL, VAL(CARDINAL, r))"),
    ("r := FLOAT(f(a, b))", "r := VAL(REAL, f(a, b))"),
    ("c := CHR(13)", "c := CHR(13)"),
    ("n := ORD(c)", "n := ORD(c)"),
])
def test_conversions(before, after):
    out, diags = _conversions(before)
    assert out == after and diags == []


def test_conversion_result_reparses_clean():
    text = "MODULE M;\nBEGIN\n  r := FLOAT(TRUNC(r)) + FLOAT (n)\nEND M.\n"
    fixed, _ = fix_source(text)
    _, diags = parse_source(fixed)
    assert diags == []


def test_conversion_arity_mismatch():
    out, diags = _conversions("r := FLOAT(a, b)")
    assert out == "r := FLOAT(a, b)"
    assert [d.code for d in diags] == ["M2M-CONVERSION-ARITY"]


def test_shadowed_conversion_left_alone():
    text = "MODULE M;\nPROCEDURE FLOAT ( x : INTEGER ) : REAL; BEGIN RETURN 0.0 END FLOAT;\nBEGIN r := FLOAT(1) END M.\n"
    unit, _ = parse_source(text)
    assert rewrite_conversions(unit) == ([], [])


def _strip(text):
    unit, _ = parse_source(text)
    edit = strip_export_list(unit)
    return apply_edits(text, [edit] if edit else [])


def test_strip_inline_export_list():
    assert _strip("DEFINITION MODULE M; EXPORT QUALIFIED a, b;\nCONST a = 1; b = 2;\nEND M.\n") == \
        "DEFINITION MODULE M;\nCONST a = 1; b = 2;\nEND M.\n"


def test_strip_two_line_export_list():
    text = "DEFINITION MODULE M;\n  EXPORT QUALIFIED a,\n    b;\nCONST a = 1; b = 2;\nEND M.\n"
    out = _strip(text)
    assert out == "DEFINITION MODULE M;\nCONST a = 1; b = 2;\nEND M.\n"
    assert parse_source(out)[1] == []


def test_no_export_list_no_edit():
    assert _strip("DEFINITION MODULE M;\nEND M.\n") == "DEFINITION MODULE M;\nEND M.\n"


def _edit(text, start, end, replacement):
    return Edit(LineMap(text).span(start, end), replacement)


def test_apply_edits_order_independent():
    text = "abcdef"
    e1, e2 = _edit(text, 0, 1, "X"), _edit(text, 4, 6, "YZW")
    assert apply_edits(text, [e1, e2]) == apply_edits(text, [e2, e1]) == "XbcdYZW"
    assert apply_edits(text, []) == text


def test_overlapping_edits_rejected():
    text = "abcdef"
    with pytest.raises(OverlappingEdits):
        apply_edits(text, [_edit(text, 0, 3, "x"), _edit(text, 2, 4, "y")])


def test_insertions_at_same_point_conflict():
    text = "abc"
    with pytest.raises(OverlappingEdits):
        apply_edits(text, [_edit(text, 1, 1, "x"), _edit(text, 1, 1, "y")])


def test_adjacent_edits_allowed():
    text = "abc"
    assert apply_edits(text, [_edit(text, 0, 1, "x"), _edit(text, 1, 2, "y")]) == "xyc"


def test_fix_leaves_strings_and_comments():
    text = "MODULE M;\n(* 15C <> FLOAT(x) *)\nBEGIN s := '<> & ~ 377B' END M.\n"
    assert fix_source(text)[0] == text


def test_fix_reaches_fixpoint_with_collisions():
    text = "DEFINITION MODULE M; EXPORT QUALIFIED (*%x*) a;\nCONST a = 17B;\nEND M.\n"
    fixed, edits = fix_source(text)
    assert "EXPORT" not in fixed and "15" in fixed
    assert fix_source(fixed)[1] == []


def test_unified_diff():
    diff = unified_diff("M.mod", "a\nb\n", "a\nc\n")
    assert diff.startswith("--- a/M.mod\n+++ b/M.mod\n") and "-b\n+c\n" in diff
