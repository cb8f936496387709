"""Facility registry and dialect switches.

Every offending facility the tool knows about is listed in ``REGISTRY`` with
its mitigation, the switch that enables it (if any) and the severities that
apply with the switch off and on.  ``DialectConfig`` carries the switch state
for one run and is frozen.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Mapping


class Severity(enum.IntEnum):
    """Diagnostic severity; larger is worse."""

    INFO = 0
    WARNING = 1
    DEPRECATION = 2
    ERROR = 3

    @property
    def label(self) -> str:
        return self.name.lower()


class FacilityId(str, enum.Enum):
    OCTAL_LITERALS = "OctalLiterals"
    SYNONYM_SYMBOLS = "SynonymSymbols"
    NON_CANONICAL_DIRECTIVES = "NonCanonicalDirectives"
    SEMANTIC_DIRECTIVE_CANDIDATE = "SemanticDirectiveCandidate"
    MIXED_ARRAY_FORMS = "MixedArrayForms"
    LOCAL_MODULES = "LocalModules"
    NON_CLIENT_IMPORT = "NonClientImport"
    AMBIGUOUS_UNARY_MINUS = "AmbiguousUnaryMinus"
    DEPRECATED_CONVERSION = "DeprecatedConversion"
    REMOVED_CONVERSION = "RemovedConversion"
    WRITE_IMPORTED_VARS = "WriteImportedVars"
    TYPE_TRANSFER = "TypeTransfer"
    VARIANT_RECORD = "VariantRecord"
    FOREIGN_IDENTIFIERS = "ForeignIdentifiers"
    FFI_PRAGMA_VIOLATION = "FfiPragmaViolation"
    LEGACY_EXPORT_LIST = "LegacyExportList"
    FILENAME_SUFFIX = "FilenameSuffix"
    LANGUAGE_EXTENSION = "LanguageExtension"


class Mitigation(enum.Enum):
    WARNING = "warning"
    CHANGE = "change"
    DEPRECATION = "deprecation"
    REMOVAL = "removal"


class UsageError(ValueError):
    """Bad switch name or malformed configuration file."""


@dataclass(frozen=True)
class DialectConfig:
    """Facility switches for one run.  Everything is off by default."""

    octal_literals: bool = False
    synonym_symbols: bool = False
    local_modules: bool = False
    permissive_unary_minus: bool = False
    deprecated_conversions: bool = False
    write_imported_vars: bool = False
    type_transfers: bool = False
    variant_records: bool = False
    foreign_identifiers: bool = False
    language_extensions: bool = False
    legacy_export_lists: bool = False
    fix_mode: bool = False

    def __post_init__(self) -> None:
        # a specific extension implies the umbrella switch
        if self.foreign_identifiers and not self.language_extensions:
            object.__setattr__(self, "language_extensions", True)

    def enabled(self, switch: str) -> bool:
        return getattr(self, switch.replace("-", "_"))


def default_config() -> DialectConfig:
    return DialectConfig()


@dataclass(frozen=True)
class FacilityEntry:
    facility: FacilityId
    mitigation: Mitigation
    transformation: bool
    switch: str | None  # kebab-case switch name
    off_severity: Severity
    on_severity: Severity | None  # None when there is no switch
    summary: str
    rationale: str
    ref: str  # topic key reported as ``paperRef``


_S = Severity
_M = Mitigation
_F = FacilityId

REGISTRY: dict[FacilityId, FacilityEntry] = {
    e.facility: e
    for e in (
        FacilityEntry(_F.OCTAL_LITERALS, _M.DEPRECATION, True, "octal-literals", _S.ERROR, _S.DEPRECATION,
            "octal literals with B or C suffix",
            "B and C are also hex digits, so octal literals read ambiguously. "
            "Write the value in decimal, or use CHR() for character codes.",
            "lexis/octal-literals"),
        FacilityEntry(_F.SYNONYM_SYMBOLS, _M.DEPRECATION, True, "synonym-symbols", _S.ERROR, _S.DEPRECATION,
            "synonym symbols <>, & and ~",
            "Each concept gets exactly one spelling: use #, AND and NOT.",
            "lexis/synonym-symbols"),
        FacilityEntry(_F.NON_CANONICAL_DIRECTIVES, _M.CHANGE, True, None, _S.WARNING, None,
            "directive not delimited by (*$ ... *)",
            "Non-semantic directives are only portable if every compiler can "
            "recognise them, so the opening delimiter is fixed to (*$.",
            "lexis/directive-delimiters"),
        FacilityEntry(_F.SEMANTIC_DIRECTIVE_CANDIDATE, _M.WARNING, False, None, _S.WARNING, None,
            "%-prefixed semantic directive",
            "Directives that change meaning cannot be ignored safely; they use the % "
            "prefix and are reported so an unsupported one is never silently dropped.",
            "lexis/semantic-directives"),
        FacilityEntry(_F.MIXED_ARRAY_FORMS, _M.WARNING, False, None, _S.WARNING, None,
            "abbreviated and long multi-dimensional array forms mixed in one unit",
            "ARRAY [a], [b] OF T and ARRAY [a] OF ARRAY [b] OF T mean the same thing; "
            "pick one form per compilation unit.",
            "syntax/multi-dimensional-arrays"),
        FacilityEntry(_F.LOCAL_MODULES, _M.DEPRECATION, False, "local-modules", _S.ERROR, _S.DEPRECATION,
            "local module",
            "Move the local module into a separate library module with its own "
            "definition and implementation parts; use (*$CLIENTS=...*) to keep it private.",
            "syntax/local-modules"),
        FacilityEntry(_F.NON_CLIENT_IMPORT, _M.WARNING, False, None, _S.WARNING, None,
            "import of a private library by a module not in its CLIENTS list",
            "A library marked with (*$CLIENTS=...*) has an unstable API meant for the "
            "listed modules only.",
            "syntax/local-modules/clients"),
        FacilityEntry(_F.AMBIGUOUS_UNARY_MINUS, _M.CHANGE, False, "permissive-unary-minus", _S.ERROR, _S.WARNING,
            "unary minus followed by more than one factor",
            "- a * b + c reads as (-a) * b + c to a mathematician and as "
            "-(a * b + c) from the grammar; compilers disagree. Parenthesise.",
            "syntax/unary-minus"),
        FacilityEntry(_F.DEPRECATED_CONVERSION, _M.DEPRECATION, True, "deprecated-conversions", _S.ERROR, _S.DEPRECATION,
            "FLOAT() or TRUNC() conversion",
            "VAL() covers every numeric conversion. FLOAT(e) becomes VAL(REAL, e), "
            "TRUNC(e) becomes VAL(CARDINAL, e).",
            "pervasives/conversion"),
        FacilityEntry(_F.REMOVED_CONVERSION, _M.REMOVAL, True, None, _S.ERROR, None,
            "non-standard conversion INT(), CARD() or LFLOAT()",
            "These duplicate VAL() and are not part of the language. "
            "They are rewritten to VAL(INTEGER, e), VAL(CARDINAL, e) and VAL(LONGREAL, e).",
            "pervasives/conversion"),
        FacilityEntry(_F.WRITE_IMPORTED_VARS, _M.CHANGE, False, "write-imported-vars", _S.ERROR, _S.DEPRECATION,
            "write to an imported variable",
            "Imported variables are read-only to clients. Export a setter procedure "
            "from the owning module instead.",
            "semantics/exported-variables"),
        FacilityEntry(_F.TYPE_TRANSFER, _M.CHANGE, False, "type-transfers", _S.ERROR, _S.INFO,
            "unsafe type transfer T(x)",
            "Type transfers bypass type safety and are available only behind a switch.",
            "semantics/unsafe-facilities"),
        FacilityEntry(_F.VARIANT_RECORD, _M.CHANGE, False, "variant-records", _S.ERROR, _S.INFO,
            "record with variant part",
            "Variant parts overlay storage without a check and are available only "
            "behind a switch.",
            "semantics/unsafe-facilities"),
        FacilityEntry(_F.FOREIGN_IDENTIFIERS, _M.CHANGE, False, "foreign-identifiers", _S.ERROR, _S.INFO,
            "identifier containing $ or _",
            "Foreign identifiers exist to name symbols of foreign APIs. No leading, "
            "doubled or trailing _, no doubled or trailing $, never in module names.",
            "extensions/foreign-identifiers"),
        FacilityEntry(_F.FFI_PRAGMA_VIOLATION, _M.CHANGE, False, None, _S.ERROR, None,
            "malformed or misplaced (*$FFI=\"...\"*) pragma",
            "The pragma reads (*$FFI=\"C\"*) or (*$F=\"C\"*) and goes directly after "
            "the header of a definition module.",
            "extensions/foreign-definition-modules"),
        FacilityEntry(_F.LEGACY_EXPORT_LIST, _M.DEPRECATION, True, "legacy-export-lists", _S.ERROR, _S.DEPRECATION,
            "export list in a definition module",
            "A definition module exports everything it declares; the EXPORT QUALIFIED "
            "list of early editions is redundant and is removed.",
            "misc/pre-revision-compilers"),
        FacilityEntry(_F.FILENAME_SUFFIX, _M.REMOVAL, False, None, _S.ERROR, None,
            "source file suffix other than .def or .mod",
            "Only .def (definition modules) and .mod (implementation and program "
            "modules) are recognised.",
            "misc/filename-suffixes"),
        FacilityEntry(_F.LANGUAGE_EXTENSION, _M.CHANGE, False, "language-extensions", _S.ERROR, _S.INFO,
            "language extension",
            "Extensions are off unless explicitly enabled, which keeps sources portable.",
            "extensions/availability"),
    )
}

SWITCHES: tuple[str, ...] = tuple(
    f.name.replace("_", "-") for f in fields(DialectConfig) if f.name != "fix_mode"
)

def severity_for(facility: FacilityId, config: DialectConfig) -> Severity:
    entry = REGISTRY[facility]
    if entry.switch is None:
        return entry.off_severity
    if facility is FacilityId.FOREIGN_IDENTIFIERS:
        on = config.foreign_identifiers or config.language_extensions
    else:
        on = config.enabled(entry.switch)
    return entry.on_severity if on else entry.off_severity


def transformation_facilities() -> frozenset[FacilityId]:
    return frozenset(f for f, e in REGISTRY.items() if e.transformation)


def _parse_config_file(path: Path) -> dict[str, bool]:
    values: dict[str, bool] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = (part.strip() for part in line.partition("="))
        if not sep or value not in ("on", "off"):
            raise UsageError(f"{path}:{lineno}: expected 'name = on|off'")
        values[name] = value == "on"
    return values


def _check_names(names, origin: str) -> None:
    for name in names:
        if name not in SWITCHES:
            valid = ", ".join(SWITCHES)
            raise UsageError(f"unknown switch {name!r} in {origin}; valid switches: {valid}")


def resolve_config(
    cli_switches: Mapping[str, bool] | None = None,
    config_file: str | os.PathLike | None = None,
    *,
    fix_mode: bool = False,
) -> DialectConfig:
    """Merge defaults, a config file and command-line switches, in that order.

    Raises ``UsageError`` for unknown switch names, including attempts to
    switch on facilities that were removed outright.
    """
    merged: dict[str, bool] = {}
    if config_file is not None:
        file_values = _parse_config_file(Path(config_file))
        _check_names(file_values, str(config_file))
        merged.update(file_values)
    cli_switches = dict(cli_switches or {})
    _check_names(cli_switches, "command line")
    merged.update(cli_switches)
    config = replace(default_config(), **{k.replace("-", "_"): v for k, v in merged.items()})
    if fix_mode:
        config = replace(config, fix_mode=True)
    return config
