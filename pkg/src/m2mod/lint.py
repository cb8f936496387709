"""Lint orchestration: parse every input, bind once, run per-unit checks."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from .analysis import (
    FacilityUse, SymbolTable, bind_program, check_clients, check_conversions,
    check_mixed_array_forms, check_readonly_imports, check_structure, check_unsafe,
)
from .diagnostics import Diagnostic, sort_diagnostics
from .policy import DialectConfig, default_config
from .rewrite import rewrite_conversions
from .syntax import CompilationUnit, UnitKind, parse_source

MAX_WORKERS = 8

T = TypeVar("T")
R = TypeVar("R")


def read_source(path: str | Path) -> str:
    # latin-1 keeps one character per byte, so offsets are byte offsets too
    with open(path, encoding="latin-1", newline="") as f:
        return f.read()


def write_source(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="latin-1", newline="") as f:
        f.write(text)


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Ordered map over a bounded thread pool."""
    if len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=min(MAX_WORKERS, len(items))) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str


@dataclass
class ParsedFile:
    source: SourceFile
    unit: CompilationUnit
    diagnostics: list[Diagnostic]


@dataclass
class LintResult:
    files: list[ParsedFile]
    table: SymbolTable
    diagnostics: list[Diagnostic] = field(default_factory=list)


def find_definition(module: str, search_path: Iterable[str | Path]) -> Path | None:
    """``<module>.def`` in the first search directory holding it, matched exactly."""
    for directory in search_path:
        directory = Path(directory)
        try:
            if f"{module}.def" in {p.name for p in directory.iterdir()}:
                return directory / f"{module}.def"
        except OSError:
            continue
    return None


def _wanted_definitions(units: Iterable[CompilationUnit]) -> set[str]:
    wanted = set()
    for unit in units:
        if unit.unit_kind is UnitKind.IMPLEMENTATION:
            wanted.add(unit.module_name)
        for clause in unit.imported_modules():
            wanted.update([clause.from_module] if clause.from_module else clause.names)
    return wanted


def check_unit(unit: CompilationUnit, table: SymbolTable, config: DialectConfig) -> list[Diagnostic]:
    """All analysis diagnostics for one bound unit."""
    uses: list[FacilityUse] = []
    uses += check_structure(unit, config)
    uses += check_readonly_imports(unit, table, config)
    uses += check_clients(unit, table)
    uses += check_conversions(unit, config)
    uses += check_mixed_array_forms(unit)
    uses += check_unsafe(unit, table, config)
    diags = [u.to_diagnostic(config, unit.source_file) for u in uses]
    diags += rewrite_conversions(unit)[1]
    return diags


def lint_sources(
    sources: Sequence[SourceFile],
    config: DialectConfig | None = None,
    search_path: Sequence[str | Path] = (),
    strict_imports: bool = False,
) -> LintResult:
    """Lint a set of sources together so imports between them resolve.

    Definition modules needed for binding but not among ``sources`` are
    loaded from ``search_path``; they are bound but not reported on.
    """
    config = config or default_config()

    def parse(src: SourceFile) -> ParsedFile:
        unit, diags = parse_source(src.text, config, src.path)
        return ParsedFile(src, unit, list(diags))

    files = parallel_map(parse, list(sources))
    units = [f.unit for f in files]
    known = {u.module_name for u in units if u.unit_kind is UnitKind.DEFINITION}
    library: list[CompilationUnit] = []
    for module in sorted(_wanted_definitions(units) - known):
        path = find_definition(module, search_path)
        if path is None:
            continue
        try:
            text = read_source(path)
        except OSError:
            continue
        library.append(parse_source(text, config, str(path))[0])

    table, bind_diags = bind_program(units + library, strict_imports=strict_imports)
    reported = {s.path for s in sources}
    checked = parallel_map(lambda f: check_unit(f.unit, table, config), files)

    diags: list[Diagnostic] = []
    for f, extra in zip(files, checked):
        diags += f.diagnostics
        diags += extra
    diags += [d for d in bind_diags if d.file in reported]
    return LintResult(files, table, sort_diagnostics(diags))


def lint_text(
    text: str,
    config: DialectConfig | None = None,
    path: str = "<input>",
) -> list[Diagnostic]:
    return lint_sources([SourceFile(path, text)], config).diagnostics
