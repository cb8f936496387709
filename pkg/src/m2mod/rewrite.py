"""Source-to-source transformations.

Every rewrite is expressed as an ``Edit`` over the original text.  Edits are
planned per file, checked for overlap, and applied right to left so earlier
spans stay valid.  Comments and string literals are never touched.
"""

from __future__ import annotations

import difflib
from typing import Iterable, Iterator

from .diagnostics import Diagnostic
from .lexis import SYNONYMS, OCTAL_DIGITS, Token, TokenKind, Trivia, TriviaKind
from .policy import DialectConfig, FacilityId, Severity
from .source import Edit, LineMap, SourceSpan
from .syntax.nodes import (
    Call, CompilationUnit, ConstDecl, FormalParam, ImportClause, LocalModule,
    ProcedureHeading, TypeDecl, UnitKind, VarDecl, walk,
)

# pervasive name -> (VAL target type, facility)
CONVERSIONS: dict[str, tuple[str, FacilityId]] = {
    "FLOAT": ("REAL", FacilityId.DEPRECATED_CONVERSION),
    "TRUNC": ("CARDINAL", FacilityId.DEPRECATED_CONVERSION),
    "INT": ("INTEGER", FacilityId.REMOVED_CONVERSION),
    "CARD": ("CARDINAL", FacilityId.REMOVED_CONVERSION),
    "LFLOAT": ("LONGREAL", FacilityId.REMOVED_CONVERSION),
}


class MalformedLiteral(ValueError):
    pass


class OverlappingEdits(RuntimeError):
    """Two planned edits touch the same text; the plan is wrong."""


# --- token-level rewrites ----------------------------------------------------


def octal_value(text: str) -> int:
    digits = text[:-1]
    if not digits or not set(digits) <= OCTAL_DIGITS:
        raise MalformedLiteral(f"'{text}' is not an octal literal")
    return int(digits, 8)


def convert_octal_literal(token: Token) -> Edit:
    """``377B`` becomes ``255``; ``15C`` becomes ``CHR(13)``."""
    if token.base not in ("octalB", "octalC"):
        raise MalformedLiteral(f"'{token.text}' is not an octal literal")
    value = octal_value(token.text)
    if token.base == "octalB":
        replacement = str(value)
    else:
        replacement = f"CHR({value})"
    return Edit(token.span, replacement, FacilityId.OCTAL_LITERALS, f"octal {token.text} is {value}")


def synonym_edit(tokens: list[Token], index: int) -> Edit:
    token = tokens[index]
    replacement = SYNONYMS[token.text]
    if replacement[0].isalpha():
        prev = tokens[index - 1] if index > 0 else None
        nxt = tokens[index + 1] if index + 1 < len(tokens) else None
        if prev is not None and not token.leading_trivia and prev.is_word:
            replacement = " " + replacement
        if nxt is not None and not nxt.leading_trivia and nxt.is_word:
            replacement = replacement + " "
    return Edit(token.span, replacement, FacilityId.SYNONYM_SYMBOLS, f"'{token.text}' -> '{SYNONYMS[token.text]}'")


def convert_synonyms(tokens: list[Token]) -> list[Edit]:
    return [synonym_edit(tokens, i) for i, t in enumerate(tokens) if t.kind is TokenKind.SYNONYM]


def directive_edit(trivia: Trivia) -> Edit:
    s = trivia.span
    opener = SourceSpan(s.start, s.start + 3, s.line, s.col, s.line, s.col + 3)
    return Edit(opener, "(*$", FacilityId.NON_CANONICAL_DIRECTIVES, f"'{trivia.text[:3]}' -> '(*$'")


def normalize_directives(trivia: Iterable[Trivia]) -> list[Edit]:
    return [directive_edit(t) for t in trivia if t.kind is TriviaKind.NON_CANONICAL_DIRECTIVE]


# --- unit-level rewrites -----------------------------------------------------


def declared_names(unit: CompilationUnit) -> set[str]:
    """Every identifier the unit declares or imports, at any nesting level."""
    names: set[str] = set()
    for node in walk(unit):
        if isinstance(node, (ConstDecl, TypeDecl)):
            names.add(node.name)
        elif isinstance(node, VarDecl):
            names.update(node.names)
        elif isinstance(node, ProcedureHeading):
            names.add(node.name)
        elif isinstance(node, FormalParam):
            names.update(node.names)
        elif isinstance(node, LocalModule):
            names.add(node.name)
        elif isinstance(node, ImportClause):
            names.update(node.names)
    return names


def conversion_calls(unit: CompilationUnit) -> Iterator[tuple[Call, str]]:
    """Calls of the pervasive conversion functions that are not shadowed."""
    shadowed = declared_names(unit)
    for node in walk(unit):
        if (
            isinstance(node, Call)
            and node.args is not None
            and not node.callee.selectors
            and node.callee.name in CONVERSIONS
            and node.callee.name not in shadowed
        ):
            yield node, node.callee.name


def conversion_edit(call: Call, source: str) -> Edit:
    name = call.callee.name
    target, facility = CONVERSIONS[name]
    start, end = call.callee.span.start, call.open_span.end
    between = source[call.callee.span.end:call.open_span.start]
    span = SourceSpan(
        start, end, call.callee.span.line, call.callee.span.col,
        call.open_span.end_line, call.open_span.end_col,
    )
    return Edit(span, f"VAL{between}({target}, ", facility, f"{name}(e) -> VAL({target}, e)")


def rewrite_conversions(unit: CompilationUnit) -> tuple[list[Edit], list[Diagnostic]]:
    source = unit.source_text()
    edits, diags = [], []
    for call, name in conversion_calls(unit):
        if len(call.args) != 1:
            diags.append(Diagnostic(
                "M2M-CONVERSION-ARITY", Severity.WARNING, call.span,
                f"{name} called with {len(call.args)} arguments; not rewritten "
                f"(a user procedure named {name} is suspected)",
                unit.source_file,
            ))
            continue
        edits.append(conversion_edit(call, source))
    return edits, diags


def strip_export_list(unit: CompilationUnit) -> Edit | None:
    """Remove a definition module's ``EXPORT QUALIFIED ...;`` and, if it empties it, its line."""
    export = unit.export_list
    if export is None or unit.unit_kind is not UnitKind.DEFINITION:
        return None
    source = unit.source_text()
    start, end = export.span.start, export.span.end
    while end < len(source) and source[end] in " \t":
        end += 1
    line_start = source.rfind("\n", 0, start) + 1
    at_eol = end == len(source) or source[end] in "\r\n"
    if at_eol:
        if source[line_start:start].strip(" \t") == "":
            start = line_start
            if source.startswith("\r\n", end):
                end += 2
            elif end < len(source):
                end += 1
        else:
            while start > line_start and source[start - 1] in " \t":
                start -= 1
    span = LineMap(source).span(start, end)
    return Edit(span, "", FacilityId.LEGACY_EXPORT_LIST, "remove export list")


# --- planning and application -------------------------------------------------


def _check_overlaps(edits: list[Edit]) -> list[Edit]:
    ordered = sorted(edits, key=lambda e: (e.span.start, e.span.end))
    for a, b in zip(ordered, ordered[1:]):
        if a.span.overlaps(b.span):
            raise OverlappingEdits(f"edits overlap at offsets {a.span.start}-{a.span.end} and {b.span.start}-{b.span.end}")
    return ordered


def apply_edits(source: str, edits: Iterable[Edit]) -> str:
    ordered = _check_overlaps(list(edits))
    out = source
    for edit in reversed(ordered):
        out = out[:edit.span.start] + edit.replacement + out[edit.span.end:]
    return out


def plan_edits(unit: CompilationUnit) -> list[Edit]:
    """Every mechanical fix for the unit, overlap-free, in source order.

    Where two fixes collide (a directive inside an export list, say) the
    earlier, wider one wins; the other is picked up by the next pass.
    """
    tokens = unit.tokens
    candidates: list[Edit] = []
    for token in tokens:
        if token.base in ("octalB", "octalC") and not token.malformed:
            try:
                candidates.append(convert_octal_literal(token))
            except MalformedLiteral:
                pass
    candidates.extend(convert_synonyms(tokens))
    candidates.extend(normalize_directives(t for tok in tokens for t in tok.leading_trivia))
    candidates.extend(rewrite_conversions(unit)[0])
    export_edit = strip_export_list(unit)
    if export_edit is not None:
        candidates.append(export_edit)
    accepted: list[Edit] = []
    for edit in sorted(candidates, key=lambda e: (e.span.start, -e.span.end)):
        if not any(edit.span.overlaps(a.span) for a in accepted):
            accepted.append(edit)
    return accepted


def fix_source(
    source: str,
    config: DialectConfig | None = None,
    file: str = "<input>",
    max_passes: int = 5,
) -> tuple[str, list[Edit]]:
    """Plan and apply fixes until nothing is left to rewrite."""
    from .syntax.parser import parse_source

    applied: list[Edit] = []
    for _ in range(max_passes):
        unit, _diags = parse_source(source, config, file)
        edits = plan_edits(unit)
        if not edits:
            break
        source = apply_edits(source, edits)
        applied.extend(edits)
    return source, applied


def unified_diff(path: str, before: str, after: str) -> str:
    return "".join(
        difflib.unified_diff(
            before.splitlines(keepends=True),
            after.splitlines(keepends=True),
            f"a/{path}",
            f"b/{path}",
        )
    )
