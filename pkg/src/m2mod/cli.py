"""Command-line driver: ``m2mod lint|fix|explain``."""

from __future__ import annotations

import argparse
import enum
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from .diagnostics import (
    EXIT_ERRORS, EXIT_INTERNAL, Diagnostic, exit_code, render_structured, render_text,
    sort_diagnostics,
)
from .lint import SourceFile, lint_sources, parallel_map, read_source
from .policy import (
    REGISTRY, SWITCHES, DialectConfig, FacilityId, UsageError, resolve_config,
)
from .rewrite import fix_source, unified_diff
from .source import SourceSpan
from .syntax import UnitKind

SUFFIXES = {".def": UnitKind.DEFINITION, ".mod": UnitKind.IMPLEMENTATION}
CONFIG_NAME = "m2mod.conf"
CONFIG_ENV = "M2MOD_CONFIG"

# code -> (facility, what it flags); facility None for plumbing diagnostics
CODES: dict[str, tuple[FacilityId | None, str]] = {
    "M2M-OCTAL": (FacilityId.OCTAL_LITERALS,
                  "octal literal; NNNC becomes CHR(n), NNNB becomes decimal "
                  "(chosen over hex because it reads without context)"),
    "M2M-SYNONYM": (FacilityId.SYNONYM_SYMBOLS, "synonym symbol; rewritten to #, AND or NOT"),
    "M2M-DIRECTIVE": (FacilityId.NON_CANONICAL_DIRECTIVES, "directive opened by (*% or (*#; rewritten to (*$"),
    "M2M-SEMANTIC-DIRECTIVE": (FacilityId.SEMANTIC_DIRECTIVE_CANDIDATE, "%-prefixed semantic directive line"),
    "M2M-MIXED-ARRAY": (FacilityId.MIXED_ARRAY_FORMS, "minority multi-dimensional array form in a unit using both"),
    "M2M-LOCAL-MODULE": (FacilityId.LOCAL_MODULES, "local module declaration"),
    "M2M-CLIENTS": (FacilityId.NON_CLIENT_IMPORT, "import of a CLIENTS-restricted library by a non-client"),
    "M2M-UMINUS": (FacilityId.AMBIGUOUS_UNARY_MINUS,
                   "unary minus before a multi-factor expression: - a * b + c reads as "
                   "(-a) * b + c or as -(a * b + c)"),
    "M2M-CONVERSION-DEPRECATED": (FacilityId.DEPRECATED_CONVERSION, "FLOAT() or TRUNC(); rewritten to VAL()"),
    "M2M-CONVERSION-REMOVED": (FacilityId.REMOVED_CONVERSION, "INT(), CARD() or LFLOAT(); rewritten to VAL()"),
    "M2M-READONLY": (FacilityId.WRITE_IMPORTED_VARS, "write to an imported variable"),
    "M2M-TYPE-TRANSFER": (FacilityId.TYPE_TRANSFER, "type transfer T(x)"),
    "M2M-VARIANT-RECORD": (FacilityId.VARIANT_RECORD, "record with a variant part"),
    "M2M-FOREIGN-DISABLED": (FacilityId.FOREIGN_IDENTIFIERS, "identifier with $ or _ while foreign identifiers are off"),
    "M2M-FOREIGN-MALFORMED": (FacilityId.FOREIGN_IDENTIFIERS, "foreign identifier breaking a structural rule"),
    "M2M-FOREIGN-IN-MODULE-ID": (FacilityId.FOREIGN_IDENTIFIERS, "foreign identifier used as a module name"),
    "M2M-FFI-MALFORMED": (FacilityId.FFI_PRAGMA_VIOLATION, "FFI pragma not of the form (*$FFI=\"api\"*)"),
    "M2M-FFI-POSITION": (FacilityId.FFI_PRAGMA_VIOLATION, "FFI pragma not directly after a definition module header"),
    "M2M-EXPORT-LIST": (FacilityId.LEGACY_EXPORT_LIST, "export list in a definition module; removed"),
    "M2M-SUFFIX": (FacilityId.FILENAME_SUFFIX, "input file without a .def or .mod suffix"),
    "M2M-EXTENSION": (FacilityId.LANGUAGE_EXTENSION, "language extension in use"),
    "M2M-FFI-API": (None, "FFI pragma names an API this tool does not know"),
    "M2M-CLIENTS-MALFORMED": (None, "CLIENTS pragma not of the form (*$CLIENTS=A, B*)"),
    "M2M-CLIENTS-POSITION": (None, "CLIENTS pragma outside a definition module header"),
    "M2M-DIRECTIVE-UNKNOWN": (None, "directive this tool does not interpret"),
    "M2M-CONVERSION-ARITY": (None, "conversion name called with other than one argument; left alone"),
    "M2M-CAST-UNKNOWN": (None, "possible type transfer whose callee cannot be resolved"),
    "M2M-SYSTEM-IMPORT": (None, "import from SYSTEM"),
    "M2M-UNRESOLVED-IMPORT": (None, "imported name not exported by its module"),
    "M2M-DEF-MISSING": (None, "definition module not found on the search path"),
    "M2M-MALFORMED-LITERAL": (None, "number literal that fits no literal form"),
    "M2M-ILLEGAL-CHAR": (None, "character outside the language's alphabet"),
    "M2M-UNTERMINATED-COMMENT": (None, "comment without a closing *)"),
    "M2M-UNTERMINATED-STRING": (None, "string without a closing quote on its line"),
    "M2M-SYNTAX": (None, "syntax error"),
    "M2M-END-NAME": (None, "END name does not match the module or procedure name"),
}


class Mode(enum.Enum):
    LINT = "lint"
    FIX = "fix"
    EXPLAIN = "explain"


@dataclass
class RunPlan:
    mode: Mode
    inputs: list[Path] = field(default_factory=list)
    config: DialectConfig = field(default_factory=DialectConfig)
    search_path: list[Path] = field(default_factory=list)
    output_format: str = "text"
    strict: bool = False
    strict_imports: bool = False
    diff: bool = False
    color: bool = False
    explain_codes: list[str] = field(default_factory=list)
    rejected: list[Diagnostic] = field(default_factory=list)


def unit_kind_for(path: str | Path) -> UnitKind | None:
    """Guess from the suffix; a .mod file may still turn out to be a program module."""
    return SUFFIXES.get(Path(path).suffix)


def _suffix_diagnostic(path: Path) -> Diagnostic:
    return Diagnostic.for_facility(
        "M2M-SUFFIX", FacilityId.FILENAME_SUFFIX, DialectConfig(), SourceSpan(0, 0, 1, 1, 1, 1),
        f"'{path.name}' has suffix '{path.suffix}'; only .def and .mod are accepted",
        str(path),
    )


def discover_inputs(paths: Sequence[str | Path], recursive: bool = False) -> tuple[list[Path], list[Diagnostic]]:
    """Accepted input files, plus M2M-SUFFIX errors for rejected explicit ones.

    Suffixes are matched case-sensitively.  Files with other suffixes inside
    a scanned directory are skipped silently.
    """
    accepted: list[Path] = []
    diags: list[Diagnostic] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            pattern = "**/*" if recursive else "*"
            accepted += sorted(p for p in path.glob(pattern) if p.is_file() and p.suffix in SUFFIXES)
        elif path.suffix in SUFFIXES:
            accepted.append(path)
        else:
            diags.append(_suffix_diagnostic(path))
    seen: set[Path] = set()
    unique = [p for p in accepted if not (p in seen or seen.add(p))]
    return unique, diags


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="latin-1", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render(diags: list[Diagnostic], plan: RunPlan) -> str:
    if plan.output_format == "json-lines":
        return render_structured(diags)
    return render_text(diags, plan.color)


def explain(codes: Sequence[str], out: TextIO) -> int:
    if not codes:
        out.write(f"{'facility':30} {'mitigation':12} {'switch':26} {'off':12} on\n")
        for entry in REGISTRY.values():
            on = entry.on_severity.label if entry.on_severity else "-"
            out.write(
                f"{entry.facility.value:30} {entry.mitigation.value:12} {entry.switch or '-':26} "
                f"{entry.off_severity.label:12} {on}\n"
            )
        return 0
    status = 0
    for code in codes:
        if code not in CODES:
            sys.stderr.write(f"m2mod: unknown code {code}\n")
            status = EXIT_ERRORS
            continue
        facility, what = CODES[code]
        out.write(f"{code}: {what}\n")
        if facility is not None:
            e = REGISTRY[facility]
            out.write(f"  facility:   {facility.value} ({e.summary})\n")
            out.write(f"  mitigation: {e.mitigation.value}{', transformable' if e.transformation else ''}\n")
            if e.switch:
                out.write(f"  switch:     {e.switch} (off: {e.off_severity.label}, on: {e.on_severity.label})\n")
            else:
                out.write(f"  severity:   {e.off_severity.label}\n")
            out.write(f"  rationale:  {e.rationale}\n")
            out.write(f"  reference:  {e.ref}\n")
    return status


def _load(paths: Sequence[Path]) -> list[SourceFile]:
    return parallel_map(lambda p: SourceFile(str(p), read_source(p)), list(paths))


def run(plan: RunPlan, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    if plan.mode is Mode.EXPLAIN:
        return explain(plan.explain_codes, out)
    search = list(plan.search_path) + sorted({p.parent for p in plan.inputs})
    try:
        sources = _load(plan.inputs)
    except OSError as exc:
        err.write(f"m2mod: cannot read {exc.filename}: {exc.strerror}\n")
        return EXIT_INTERNAL

    if plan.mode is Mode.FIX:
        def fix(src: SourceFile) -> SourceFile:
            return SourceFile(src.path, fix_source(src.text, plan.config, src.path)[0])

        fixed = parallel_map(fix, sources)
        for before, after in zip(sources, fixed):
            if before.text == after.text:
                continue
            if plan.diff:
                out.write(unified_diff(before.path, before.text, after.text))
                continue
            try:
                _atomic_write(Path(after.path), after.text)
            except OSError as exc:
                err.write(f"m2mod: cannot write {after.path}: {exc.strerror}\n")
                return EXIT_INTERNAL
        sources = fixed

    result = lint_sources(sources, plan.config, search, plan.strict_imports)
    diags = sort_diagnostics(result.diagnostics + plan.rejected)
    # with --diff the patch owns stdout, so what remains goes to stderr
    (err if plan.mode is Mode.FIX and plan.diff else out).write(_render(diags, plan))
    return exit_code(diags, strict=plan.strict)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="m2mod", description="Lint and modernize PIM Modula-2 sources.")
    parser.add_argument("mode", choices=[m.value for m in Mode])
    parser.add_argument("inputs", nargs="*", metavar="FILES", help="files, directories, or codes for explain")
    parser.add_argument("--enable", action="append", default=[], metavar="NAME", choices=SWITCHES)
    parser.add_argument("--disable", action="append", default=[], metavar="NAME", choices=SWITCHES)
    parser.add_argument("--path", action="append", default=[], metavar="DIR",
                        help="directory searched for definition modules")
    parser.add_argument("--format", choices=["text", "json-lines"], default="text")
    parser.add_argument("--strict", action="store_true", help="exit 2 on warnings and deprecations")
    parser.add_argument("--strict-imports", action="store_true", help="missing definition modules are errors")
    parser.add_argument("--diff", action="store_true", help="fix: print a unified diff instead of writing")
    parser.add_argument("--recursive", action="store_true", help="scan directories recursively")
    parser.add_argument("--color", choices=["auto", "always", "never"], default="auto")
    return parser


def _config_path() -> Path | None:
    env = os.environ.get(CONFIG_ENV)
    if env:
        return Path(env)
    local = Path.cwd() / CONFIG_NAME
    return local if local.is_file() else None


def make_plan(argv: Sequence[str], stdout: TextIO | None = None) -> RunPlan:
    args = build_parser().parse_intermixed_args(argv)
    mode = Mode(args.mode)
    switches = {name: True for name in args.enable}
    switches.update({name: False for name in args.disable})
    config = resolve_config(switches, _config_path(), fix_mode=mode is Mode.FIX)
    stream = stdout or sys.stdout
    color = args.color == "always" or (args.color == "auto" and stream.isatty())
    plan = RunPlan(
        mode=mode, config=config, search_path=[Path(p) for p in args.path],
        output_format=args.format, strict=args.strict, strict_imports=args.strict_imports,
        diff=args.diff, color=color,
    )
    if mode is Mode.EXPLAIN:
        plan.explain_codes = list(args.inputs)
    else:
        plan.inputs, plan.rejected = discover_inputs(args.inputs, args.recursive)
    return plan


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        plan = make_plan(argv)
    except UsageError as exc:
        sys.stderr.write(f"m2mod: {exc}\n")
        return EXIT_ERRORS
    except OSError as exc:
        sys.stderr.write(f"m2mod: cannot read config {exc.filename}: {exc.strerror}\n")
        return EXIT_INTERNAL
    try:
        return run(plan)
    except Exception as exc:  # noqa: BLE001 - last-resort report, exit 3
        sys.stderr.write(f"m2mod: internal error: {exc!r}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
