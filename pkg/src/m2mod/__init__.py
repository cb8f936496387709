"""Lint and modernize classic PIM Modula-2 sources."""

from __future__ import annotations

from .diagnostics import Diagnostic, exit_code, render_structured, render_text
from .lexis import Token, TokenKind, tokenize
from .lint import SourceFile, lint_sources, lint_text
from .policy import DialectConfig, FacilityId, Severity, default_config, resolve_config
from .rewrite import apply_edits, fix_source
from .syntax import parse_source

__version__ = "0.1.0"

__all__ = [
    "Diagnostic", "DialectConfig", "FacilityId", "Severity", "SourceFile", "Token", "TokenKind",
    "apply_edits", "default_config", "exit_code", "fix_source", "lint_sources", "lint_text",
    "parse_source", "render_structured", "render_text", "resolve_config", "tokenize",
]
