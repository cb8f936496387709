"""Acceptance criteria, one test (or parametrized group) per criterion.

The terminal summary prints one PASS/FAIL line per criterion; see conftest.
Run directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import sys
import time
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, corpus_files
from m2mod.cli import discover_inputs
from m2mod.diagnostics import exit_code
from m2mod.lexis import IdentifierContext, TokenKind, classify_identifier, emit, tokenize
from m2mod.lint import SourceFile, lint_sources, lint_text, read_source
from m2mod.policy import (
    REGISTRY, SWITCHES, DialectConfig, FacilityId, Severity, default_config, severity_for,
    transformation_facilities,
)
from m2mod.rewrite import apply_edits, convert_octal_literal, fix_source, plan_edits
from m2mod.syntax import parse_source
from oracles import octal_literal_rewrite, to_base


def _lint_dir(name: str, config: DialectConfig | None = None):
    files = sorted((CORPUS / name).iterdir())
    sources = [SourceFile(str(p.relative_to(CORPUS)), read_source(p)) for p in files]
    return lint_sources(sources, config)


def _codes(diags, file=None):
    return [d.code for d in diags if file is None or d.file.endswith(file)]


# 1 -------------------------------------------------------------------------


def test_criterion_1_reference_listing_fixtures():
    start = time.perf_counter()
    listings = _lint_dir("listings")
    clients = _lint_dir("clients")
    elapsed = time.perf_counter() - start

    assert _codes(listings.diagnostics, "Matrix.mod") == ["M2M-MIXED-ARRAY"]
    uminus = [d for d in listings.diagnostics if d.file.endswith("UnaryMinus.mod")]
    assert [d.code for d in uminus] == ["M2M-UMINUS"]
    assert uminus[0].span.line == 6  # `- a * b + c`, not the parenthesised readings
    assert _codes(listings.diagnostics, "Foo.def") == []
    stdio = next(f.unit for f in listings.files if f.source.path.endswith("stdio.def"))
    assert stdio.ffi_pragma is not None and stdio.ffi_pragma.foreign_api == "C"
    assert _codes(listings.diagnostics, "PrivateLib.def") == []

    clients_diags = [d for d in clients.diagnostics if d.code == "M2M-CLIENTS"]
    assert [d.file for d in clients_diags] == ["clients/QuuxLib.mod"]
    assert clients_diags[0].severity is Severity.WARNING
    assert elapsed < 1.0


# 2 -------------------------------------------------------------------------


@pytest.mark.parametrize("suffix", ["B", "C"])
def test_criterion_2_octal_oracle_equivalence(suffix):
    mismatches = []
    for value in range(4096):
        literal = to_base(value, 8) + suffix
        tokens, _ = tokenize(literal)
        assert tokens[0].kind in (TokenKind.INTEGER, TokenKind.CHAR_CODE)
        got = convert_octal_literal(tokens[0]).replacement
        if got != octal_literal_rewrite(literal):
            mismatches.append(literal)
    assert mismatches == []


# 3 -------------------------------------------------------------------------


def test_criterion_3_round_trip():
    files = corpus_files()
    assert len(files) >= 30
    error_files = 0
    for path in files:
        text = read_source(path)
        tokens, diags = tokenize(text)
        assert emit(tokens) == text, path
        error_files += any(d.severity is Severity.ERROR for d in lint_text(text))
    assert error_files >= 5


# 4 -------------------------------------------------------------------------


def _outside_edits_unchanged(before: str, after: str, edits) -> bool:
    pos_b = pos_a = 0
    for edit in sorted(edits, key=lambda e: e.span.start):
        gap = edit.span.start - pos_b
        if before[pos_b:edit.span.start] != after[pos_a:pos_a + gap]:
            return False
        pos_a += gap + len(edit.replacement)
        pos_b = edit.span.end
    return before[pos_b:] == after[pos_a:]


def test_criterion_4_fix_idempotence_and_convergence():
    transform = transformation_facilities()
    for path in corpus_files():
        text = read_source(path)
        unit, _ = parse_source(text)
        first_pass = plan_edits(unit)
        assert _outside_edits_unchanged(text, apply_edits(text, first_pass), first_pass), path

        once, _ = fix_source(text)
        twice, second_edits = fix_source(once)
        assert second_edits == [] and twice == once, path
        leftover = [d for d in lint_text(once) if d.facility in transform]
        assert leftover == [], (path, leftover)


# 5 -------------------------------------------------------------------------


def test_criterion_5_policy_totality():
    for facility, on in itertools.product(FacilityId, (False, True)):
        entry = REGISTRY[facility]
        config = DialectConfig(**{entry.switch.replace("-", "_"): on}) if entry.switch else default_config()
        assert isinstance(severity_for(facility, config), Severity)
    defaults = default_config()
    for switch in SWITCHES:
        assert defaults.enabled(switch) is False


@settings(max_examples=200, deadline=None)
@given(st.sets(st.sampled_from(SWITCHES)), st.sampled_from(SWITCHES))
def test_criterion_5_policy_monotonicity(enabled, extra):
    base = DialectConfig(**{s.replace("-", "_"): True for s in enabled})
    more = DialectConfig(**{s.replace("-", "_"): True for s in enabled | {extra}})
    for facility in FacilityId:
        assert severity_for(facility, more) <= severity_for(facility, base)


# 6 -------------------------------------------------------------------------

ON = DialectConfig(foreign_identifiers=True)
OFF = DialectConfig()
ORD = IdentifierContext.ORDINARY
MOD = IdentifierContext.MODULE

FOREIGN_TABLE = [
    ("foo_bar", ON, ORD, None, None),
    ("foo$bar", ON, ORD, None, None),
    ("a_b_c", ON, ORD, None, None),
    ("x$y_z", ON, ORD, None, None),
    ("VMS$QIO", ON, ORD, None, None),
    ("a_1", ON, ORD, None, None),
    ("_foo", ON, ORD, "M2M-FOREIGN-MALFORMED", "LeadingLowline"),
    ("_", ON, ORD, "M2M-FOREIGN-MALFORMED", "LeadingLowline"),
    ("a$$b", ON, ORD, "M2M-FOREIGN-MALFORMED", "ConsecutiveDollar"),
    ("x$$", ON, ORD, "M2M-FOREIGN-MALFORMED", "ConsecutiveDollar"),
    ("a__b", ON, ORD, "M2M-FOREIGN-MALFORMED", "ConsecutiveLowline"),
    ("foo$", ON, ORD, "M2M-FOREIGN-MALFORMED", "TrailingDollar"),
    ("a_b$", ON, ORD, "M2M-FOREIGN-MALFORMED", "TrailingDollar"),
    ("foo_", ON, ORD, "M2M-FOREIGN-MALFORMED", "TrailingLowline"),
    ("a$b_", ON, ORD, "M2M-FOREIGN-MALFORMED", "TrailingLowline"),
    ("My_Mod", ON, MOD, "M2M-FOREIGN-IN-MODULE-ID", None),
    ("Lib$X", ON, MOD, "M2M-FOREIGN-IN-MODULE-ID", None),
    ("foo_bar", OFF, ORD, "M2M-FOREIGN-DISABLED", None),
    ("foo$", OFF, ORD, "M2M-FOREIGN-DISABLED", None),
    ("FooBar", OFF, ORD, None, None),
]


@pytest.mark.parametrize("text,config,context,code,rule", FOREIGN_TABLE)
def test_criterion_6_foreign_identifier_truth_table(text, config, context, code, rule):
    result = classify_identifier(text, config, context)
    assert result.code == code
    if code == "M2M-FOREIGN-MALFORMED" or code is None:
        assert (result.violation.value if result.violation else None) == rule


def test_criterion_6_table_size():
    assert len(FOREIGN_TABLE) == 20


# 7 -------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 5])
def test_criterion_7_occurrence_counting(n):
    statement = "  IF (i <> j) & ~p THEN i := j END;\n"
    source = "MODULE Count;\nVAR i, j : INTEGER; p : BOOLEAN;\nBEGIN\n" + statement * n + "END Count.\n"
    synonyms = [d for d in lint_text(source) if d.code == "M2M-SYNONYM"]
    assert len(synonyms) == 3 * n


# 8 -------------------------------------------------------------------------


def test_criterion_8_suffix_enforcement(tmp_path):
    names = ["X.mod2", "X.m2", "X.MOD", "X.def", "X.mod"]
    for name in names:
        (tmp_path / name).write_text("MODULE X; END X.\n")
    accepted, diags = discover_inputs([tmp_path / n for n in names])
    assert [p.name for p in accepted] == ["X.def", "X.mod"]
    assert sorted(Path(d.file).name for d in diags) == ["X.MOD", "X.m2", "X.mod2"]
    assert all(d.code == "M2M-SUFFIX" and d.severity is Severity.ERROR for d in diags)


# 9 -------------------------------------------------------------------------


@pytest.mark.parametrize("switch_on,severity", [(False, Severity.ERROR), (True, Severity.DEPRECATION)])
def test_criterion_9_cross_module_read_only(switch_on, severity):
    result = _lint_dir("readonly", DialectConfig(write_imported_vars=switch_on))
    uses = [d for d in result.diagnostics if d.facility is FacilityId.WRITE_IMPORTED_VARS]
    assert len(uses) == 2
    assert all(d.file == "readonly/Client.mod" and d.severity is severity for d in uses)
    assert sorted(d.span.line for d in uses) == [9, 10]
    assert exit_code(result.diagnostics) == (0 if switch_on else 1)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
