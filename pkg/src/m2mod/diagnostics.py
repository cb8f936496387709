"""Diagnostic records, rendering and exit codes.

Structured output is one JSON object per line.  Field names::

    code, severity, file, line, col, endLine, endCol, message, facility,
    paperRef, offset, endOffset, fix

``severity`` is one of ``error``, ``deprecation``, ``warning``, ``info``.
``facility`` and ``paperRef`` are ``null`` for diagnostics that do not stem
from an offending facility.  ``fix`` is ``null`` or an object with
``offset``, ``endOffset``, ``line``, ``col``, ``endLine``, ``endCol``,
``replacement`` and ``note``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .policy import REGISTRY, DialectConfig, FacilityId, Severity, severity_for
from .source import Edit, SourceSpan

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_STRICT = 2
EXIT_INTERNAL = 3

_COLORS = {
    Severity.ERROR: "\x1b[31m",
    Severity.DEPRECATION: "\x1b[35m",
    Severity.WARNING: "\x1b[33m",
    Severity.INFO: "\x1b[36m",
}
_RESET = "\x1b[0m"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    span: SourceSpan
    message: str
    file: str = "<input>"
    facility: FacilityId | None = None
    suggested_edit: Edit | None = None
    explanation_ref: str | None = None

    @classmethod
    def for_facility(
        cls,
        code: str,
        facility: FacilityId,
        config: DialectConfig,
        span: SourceSpan,
        message: str,
        file: str = "<input>",
        suggested_edit: Edit | None = None,
        severity: Severity | None = None,
    ) -> Diagnostic:
        """Build a diagnostic whose severity comes from the facility registry.

        ``severity`` overrides the registry for shapes that are always fatal,
        e.g. malformed foreign identifiers.
        """
        return cls(
            code=code,
            severity=severity if severity is not None else severity_for(facility, config),
            span=span,
            message=message,
            file=file,
            facility=facility,
            suggested_edit=suggested_edit,
            explanation_ref=REGISTRY[facility].ref,
        )

    @property
    def sort_key(self) -> tuple:
        return (self.file, self.span.start, self.code, self.span.end, self.message)


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: d.sort_key)


def render_text(diags: Iterable[Diagnostic], color: bool = False) -> str:
    lines = []
    for d in sort_diagnostics(diags):
        label = d.severity.label
        if color:
            label = f"{_COLORS[d.severity]}{label}{_RESET}"
        lines.append(f"{d.file}:{d.span.line}:{d.span.col}: {label}[{d.code}]: {d.message}")
    return "".join(line + "\n" for line in lines)


def _edit_record(edit: Edit | None) -> dict | None:
    if edit is None:
        return None
    s = edit.span
    return {
        "offset": s.start,
        "endOffset": s.end,
        "line": s.line,
        "col": s.col,
        "endLine": s.end_line,
        "endCol": s.end_col,
        "replacement": edit.replacement,
        "note": edit.note,
    }


def to_record(d: Diagnostic) -> dict:
    return {
        "code": d.code,
        "severity": d.severity.label,
        "file": d.file,
        "line": d.span.line,
        "col": d.span.col,
        "endLine": d.span.end_line,
        "endCol": d.span.end_col,
        "message": d.message,
        "facility": d.facility.value if d.facility else None,
        "paperRef": d.explanation_ref,
        "offset": d.span.start,
        "endOffset": d.span.end,
        "fix": _edit_record(d.suggested_edit),
    }


def from_record(record: dict) -> Diagnostic:
    facility = FacilityId(record["facility"]) if record["facility"] else None
    fix = record.get("fix")
    edit = None
    if fix is not None:
        edit = Edit(
            SourceSpan(fix["offset"], fix["endOffset"], fix["line"], fix["col"], fix["endLine"], fix["endCol"]),
            fix["replacement"],
            facility,
            fix["note"],
        )
    return Diagnostic(
        code=record["code"],
        severity=Severity[record["severity"].upper()],
        span=SourceSpan(
            record["offset"], record["endOffset"],
            record["line"], record["col"], record["endLine"], record["endCol"],
        ),
        message=record["message"],
        file=record["file"],
        facility=facility,
        suggested_edit=edit,
        explanation_ref=record["paperRef"],
    )


def render_structured(diags: Iterable[Diagnostic]) -> str:
    return "".join(
        json.dumps(to_record(d), sort_keys=True) + "\n" for d in sort_diagnostics(diags)
    )


def read_structured(text: str) -> Iterator[Diagnostic]:
    for line in text.splitlines():
        if line.strip():
            yield from_record(json.loads(line))


def exit_code(diags: Iterable[Diagnostic], fix_mode: bool = False, strict: bool = False) -> int:
    """0 clean, 1 any error, 2 warnings under ``strict``.

    In fix mode diagnostics that carry a suggested edit count as fixed.
    """
    worst = Severity.INFO
    seen = False
    for d in diags:
        if fix_mode and d.suggested_edit is not None:
            continue
        if d.severity > Severity.INFO:
            worst = max(worst, d.severity)
            seen = True
    if not seen:
        return EXIT_OK
    if worst is Severity.ERROR:
        return EXIT_ERRORS
    return EXIT_STRICT if strict else EXIT_OK
