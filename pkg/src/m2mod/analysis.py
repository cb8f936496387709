"""Symbol binding across compilation units and the checks that need it."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .diagnostics import Diagnostic
from .policy import DialectConfig, FacilityId, Severity
from .rewrite import CONVERSIONS, conversion_calls, conversion_edit, strip_export_list
from .source import Edit, SourceSpan
from .syntax.nodes import (
    ArrayForm, ArrayType, Assignment, Block, Call, CompilationUnit, ConstDecl,
    DerefSelector, Designator, FieldSelector, ForStatement, ImportClause, LocalModule,
    Node, ProcedureDecl, ProcedureHeading, RecordType, TypeDecl, UnitKind, VarDecl,
    children, walk,
)

PSEUDO_MODULE = "SYSTEM"
PERVASIVE_TYPES = frozenset(
    "INTEGER CARDINAL REAL LONGREAL LONGINT LONGCARD BOOLEAN CHAR BITSET PROC".split()
)
MUTATING_BUILTINS = frozenset({"INC", "DEC", "INCL", "EXCL"})


class SymbolKind(enum.Enum):
    VARIABLE = "variable"
    PROCEDURE = "procedure"
    TYPE = "type"
    MODULE = "module"
    CONSTANT = "constant"
    UNKNOWN = "unknown"  # imported from a module whose definition is missing


@dataclass(frozen=True)
class SymbolInfo:
    name: str
    kind: SymbolKind
    defined_in: str
    exported: bool = False
    read_only_import: bool = False
    heading: ProcedureHeading | None = field(default=None, compare=False, repr=False)


def _system_interface() -> dict[str, SymbolInfo]:
    types = ("WORD", "ADDRESS")
    procs = ("ADR", "SIZE", "TSIZE", "NEWPROCESS", "TRANSFER", "IOTRANSFER")
    out = {n: SymbolInfo(n, SymbolKind.TYPE, PSEUDO_MODULE, exported=True) for n in types}
    out.update({n: SymbolInfo(n, SymbolKind.PROCEDURE, PSEUDO_MODULE, exported=True) for n in procs})
    return out


def _declaration_symbols(decls: Iterable[Node], module: str, exported: bool) -> dict[str, SymbolInfo]:
    out: dict[str, SymbolInfo] = {}
    for decl in decls:
        if isinstance(decl, ConstDecl):
            out[decl.name] = SymbolInfo(decl.name, SymbolKind.CONSTANT, module, exported)
        elif isinstance(decl, TypeDecl):
            out[decl.name] = SymbolInfo(decl.name, SymbolKind.TYPE, module, exported)
        elif isinstance(decl, VarDecl):
            for name in decl.names:
                out[name] = SymbolInfo(name, SymbolKind.VARIABLE, module, exported)
        elif isinstance(decl, ProcedureDecl):
            h = decl.heading
            out[h.name] = SymbolInfo(h.name, SymbolKind.PROCEDURE, module, exported, heading=h)
        elif isinstance(decl, LocalModule):
            out[decl.name] = SymbolInfo(decl.name, SymbolKind.MODULE, module, exported)
    return out


def unit_key(unit: CompilationUnit) -> tuple[str, str, str]:
    return (unit.module_name, unit.unit_kind.value, unit.source_file)


@dataclass
class UnitScope:
    module: str
    unqualified: dict[str, SymbolInfo] = field(default_factory=dict)
    modules: dict[str, str] = field(default_factory=dict)  # visible module name -> module


@dataclass
class SymbolTable:
    interfaces: dict[str, dict[str, SymbolInfo]] = field(default_factory=dict)
    clients: dict[str, tuple[str, ...]] = field(default_factory=dict)
    scopes: dict[tuple[str, str, str], UnitScope] = field(default_factory=dict)

    def scope(self, unit: CompilationUnit) -> UnitScope:
        return self.scopes[unit_key(unit)]

    def resolve(self, unit: CompilationUnit, designator: Designator,
                local: dict[str, SymbolKind] | None = None) -> tuple[SymbolInfo | None, int]:
        """Symbol a designator's leading identifiers name, and how many they used.

        Returns ``(None, 0)`` for locally declared names and unknown names.
        """
        if local and designator.name in local:
            return None, 0
        scope = self.scope(unit)
        if designator.name in scope.unqualified:
            return scope.unqualified[designator.name], 1
        module = scope.modules.get(designator.name)
        if module is not None and designator.selectors and isinstance(designator.selectors[0], FieldSelector):
            member = designator.selectors[0].name
            interface = self.interfaces.get(module)
            if interface is None:
                return SymbolInfo(member, SymbolKind.UNKNOWN, module), 2
            info = interface.get(member)
            if info is None:
                return None, 0
            if info.kind is SymbolKind.VARIABLE and module != scope.module:
                info = SymbolInfo(info.name, info.kind, info.defined_in, True, True, info.heading)
            return info, 2
        return None, 0

    def is_imported_variable(self, unit: CompilationUnit, name: str) -> bool:
        info = self.scope(unit).unqualified.get(name)
        return info is not None and info.read_only_import


@dataclass(frozen=True)
class FacilityUse:
    facility: FacilityId | None  # None for informational notes
    span: SourceSpan
    code: str
    message: str
    detail: str = ""
    edit: Edit | None = None
    severity: Severity | None = None  # overrides the registry when set

    def to_diagnostic(self, config: DialectConfig, file: str) -> Diagnostic:
        if self.facility is None:
            return Diagnostic(self.code, self.severity or Severity.INFO, self.span, self.message, file)
        return Diagnostic.for_facility(
            self.code, self.facility, config, self.span, self.message, file,
            suggested_edit=self.edit, severity=self.severity,
        )


# --- binding -------------------------------------------------------------------


def bind_program(
    units: Iterable[CompilationUnit],
    strict_imports: bool = False,
) -> tuple[SymbolTable, list[Diagnostic]]:
    """Build interfaces for definition modules and bind every unit's imports."""
    units = sorted(units, key=unit_key)
    table = SymbolTable()
    table.interfaces[PSEUDO_MODULE] = _system_interface()
    diags: list[Diagnostic] = []
    missing_severity = Severity.ERROR if strict_imports else Severity.INFO

    for unit in units:
        if unit.unit_kind is UnitKind.DEFINITION and unit.module_name not in table.interfaces:
            table.interfaces[unit.module_name] = _declaration_symbols(
                unit.body.declarations, unit.module_name, exported=True
            )
            if unit.clients_pragma is not None:
                table.clients[unit.module_name] = tuple(unit.clients_pragma.client_module_names)

    for unit in units:
        scope = UnitScope(unit.module_name)
        own = table.interfaces.get(unit.module_name) if unit.unit_kind is UnitKind.IMPLEMENTATION else None
        if unit.unit_kind is UnitKind.IMPLEMENTATION and own is None:
            diags.append(Diagnostic(
                "M2M-DEF-MISSING", missing_severity, unit.name_span or unit.span,
                f"definition module '{unit.module_name}.def' not found", unit.source_file,
            ))
        if own:
            scope.unqualified.update(
                {n: SymbolInfo(i.name, i.kind, i.defined_in, True, False, i.heading) for n, i in own.items()}
            )
        scope.unqualified.update(_declaration_symbols(unit.body.declarations, unit.module_name, False))
        for clause in unit.imported_modules():
            _bind_import(table, scope, unit, clause, diags, missing_severity)
        table.scopes[unit_key(unit)] = scope
    return table, diags


def _bind_import(table, scope, unit, clause: ImportClause, diags, missing_severity) -> None:
    file = unit.source_file
    if clause.from_module is None:
        for name, span in zip(clause.names, clause.name_spans or [clause.span] * len(clause.names)):
            if name in table.interfaces:
                scope.modules[name] = name
            elif name not in scope.unqualified:
                # local modules import names from the enclosing scope
                diags.append(Diagnostic(
                    "M2M-DEF-MISSING", missing_severity, span,
                    f"definition module '{name}.def' not found", file,
                ))
                scope.modules[name] = name
        return
    module = clause.from_module
    interface = table.interfaces.get(module)
    if interface is None:
        diags.append(Diagnostic(
            "M2M-DEF-MISSING", missing_severity, clause.span,
            f"definition module '{module}.def' not found", file,
        ))
        for name in clause.names:
            scope.unqualified.setdefault(name, SymbolInfo(name, SymbolKind.UNKNOWN, module))
        return
    for name, span in zip(clause.names, clause.name_spans):
        info = interface.get(name)
        if info is None:
            diags.append(Diagnostic(
                "M2M-UNRESOLVED-IMPORT", Severity.ERROR, span,
                f"module '{module}' does not export '{name}'", file,
            ))
            continue
        read_only = info.kind is SymbolKind.VARIABLE and module != unit.module_name
        scope.unqualified[name] = SymbolInfo(info.name, info.kind, info.defined_in, True, read_only, info.heading)


# --- scoped traversal ------------------------------------------------------------


def _local_names(block: Block | None, heading: ProcedureHeading | None) -> dict[str, SymbolKind]:
    names: dict[str, SymbolKind] = {}
    if heading is not None:
        for param in heading.params:
            for n in param.names:
                names[n] = SymbolKind.VARIABLE
    if block is not None:
        for n, info in _declaration_symbols(block.declarations, "", False).items():
            names[n] = info.kind
    return names


def scoped_walk(unit: CompilationUnit) -> Iterator[tuple[Node, dict[str, SymbolKind]]]:
    """Yield every node with the procedure-local names visible at that point."""
    stack: list[tuple[Node, dict[str, SymbolKind]]] = [(unit, {})]
    while stack:
        node, local = stack.pop()
        yield node, local
        inner = local
        if isinstance(node, ProcedureDecl):
            inner = {**local, **_local_names(node.block, node.heading)}
        elif isinstance(node, LocalModule) and local:
            inner = {**local, **_local_names(node.block, None)}
        stack.extend((child, inner) for child in reversed(list(children(node))))


def _procedure_headings(unit: CompilationUnit, table: SymbolTable) -> dict[str, ProcedureHeading]:
    headings = {}
    for info in table.scope(unit).unqualified.values():
        if info.heading is not None:
            headings[info.name] = info.heading
    for node in walk(unit):
        if isinstance(node, ProcedureDecl):
            headings.setdefault(node.heading.name, node.heading)
    return headings


# --- checks ------------------------------------------------------------------------


def _write_targets(unit, table, headings, node, local) -> Iterator[Designator]:
    if isinstance(node, Assignment):
        yield node.target
    elif isinstance(node, ForStatement):
        yield node.variable
    elif isinstance(node, Call) and node.args:
        callee = node.callee
        if not callee.selectors and callee.name in MUTATING_BUILTINS and callee.name not in local \
                and callee.name not in table.scope(unit).unqualified:
            if isinstance(node.args[0], Designator):
                yield node.args[0]
            return
        info, _ = table.resolve(unit, callee, local)
        heading = info.heading if info is not None else None
        if heading is None and not callee.selectors and callee.name not in local:
            heading = headings.get(callee.name)
        if heading is None:
            return
        for arg, is_var in zip(node.args, heading.var_flags()):
            if is_var and isinstance(arg, Designator):
                yield arg


def check_readonly_imports(
    unit: CompilationUnit, table: SymbolTable, config: DialectConfig | None = None
) -> list[FacilityUse]:
    """Writes to imported variables: assignment targets, FOR control variables,
    VAR-parameter actuals and operands of INC, DEC, INCL, EXCL."""
    headings = _procedure_headings(unit, table)
    uses = []
    for node, local in scoped_walk(unit):
        for target in _write_targets(unit, table, headings, node, local):
            info, used = table.resolve(unit, target, local)
            if info is None or not info.read_only_import:
                continue
            rest = target.selectors[used - 1:]
            if any(isinstance(s, DerefSelector) for s in rest):
                continue  # writes through a pointer leave the variable itself alone
            uses.append(FacilityUse(
                FacilityId.WRITE_IMPORTED_VARS, target.span, "M2M-READONLY",
                f"write to imported variable '{info.defined_in}.{info.name}'; "
                f"imported variables are read-only, use a setter procedure",
                detail=f"{info.defined_in}.{info.name}",
            ))
    return uses


def check_clients(unit: CompilationUnit, table: SymbolTable) -> list[FacilityUse]:
    uses = []
    for clause in unit.imported_modules():
        modules = [clause.from_module] if clause.from_module else clause.names
        spans = [clause.span] if clause.from_module else clause.name_spans
        for module, span in zip(modules, spans):
            clients = table.clients.get(module)
            if clients is None or module == unit.module_name or unit.module_name in clients:
                continue
            uses.append(FacilityUse(
                FacilityId.NON_CLIENT_IMPORT, span, "M2M-CLIENTS",
                f"'{module}' is intended for private use by {', '.join(clients)}; "
                f"'{unit.module_name}' is not a designated client",
                detail=module,
            ))
    return uses


def check_conversions(unit: CompilationUnit, config: DialectConfig | None = None) -> list[FacilityUse]:
    source = unit.source_text()
    uses = []
    for call, name in conversion_calls(unit):
        if len(call.args) != 1:
            continue  # reported by the rewriter as a suspected user procedure
        target, facility = CONVERSIONS[name]
        code = "M2M-CONVERSION-DEPRECATED" if facility is FacilityId.DEPRECATED_CONVERSION else "M2M-CONVERSION-REMOVED"
        verb = "deprecated" if facility is FacilityId.DEPRECATED_CONVERSION else "not supported"
        uses.append(FacilityUse(
            facility, call.span, code,
            f"{name}() is {verb}; use VAL({target}, ...)",
            detail=name, edit=conversion_edit(call, source),
        ))
    return uses


def _multi_dim_arrays(unit: CompilationUnit) -> list[ArrayType]:
    arrays = [n for n in walk(unit) if isinstance(n, ArrayType)]
    inner = {id(a.element_type) for a in arrays if isinstance(a.element_type, ArrayType)}
    return [a for a in arrays if id(a) not in inner and a.dimensions >= 2]


def check_mixed_array_forms(unit: CompilationUnit) -> list[FacilityUse]:
    """Warn on the minority form when both multi-dimensional forms appear.

    A tie warns on the long form.
    """
    arrays = _multi_dim_arrays(unit)
    abbreviated = [a for a in arrays if a.form is ArrayForm.ABBREVIATED]
    long_form = [a for a in arrays if a.form is ArrayForm.LONG]
    if not abbreviated or not long_form:
        return []
    if len(abbreviated) < len(long_form):
        minority, other = abbreviated, "ARRAY a OF ARRAY b OF T"
    else:
        minority, other = long_form, "ARRAY a, b OF T"
    return [
        FacilityUse(
            FacilityId.MIXED_ARRAY_FORMS, a.span, "M2M-MIXED-ARRAY",
            f"{a.form.value} multi-dimensional array form mixed with the form {other} "
            f"used elsewhere in this unit",
            detail=a.form.value,
        )
        for a in minority
    ]


def _is_type(unit, table, callee: Designator, local) -> SymbolKind | None:
    if not callee.selectors and callee.name in local:
        return local[callee.name]
    info, used = table.resolve(unit, callee, local)
    if info is not None:
        return info.kind
    if not callee.selectors and callee.name in PERVASIVE_TYPES:
        return SymbolKind.TYPE
    return None


def check_unsafe(
    unit: CompilationUnit, table: SymbolTable, config: DialectConfig | None = None
) -> list[FacilityUse]:
    """Type transfers, variant records, and SYSTEM imports (noted only)."""
    uses = []
    for node, local in scoped_walk(unit):
        if isinstance(node, Call) and node.args is not None:
            kind = _is_type(unit, table, node.callee, local)
            name = ".".join(node.callee.dotted)
            if kind is SymbolKind.TYPE:
                uses.append(FacilityUse(
                    FacilityId.TYPE_TRANSFER, node.span, "M2M-TYPE-TRANSFER",
                    f"type transfer {name}(...) bypasses type checking",
                    detail=name,
                ))
            elif kind is SymbolKind.UNKNOWN and len(node.args) == 1:
                uses.append(FacilityUse(
                    None, node.span, "M2M-CAST-UNKNOWN",
                    f"cannot tell whether {name}(...) is a type transfer; its definition module is missing",
                    detail=name, severity=Severity.INFO,
                ))
        elif isinstance(node, RecordType) and node.uses_variants:
            uses.append(FacilityUse(
                FacilityId.VARIANT_RECORD, node.span, "M2M-VARIANT-RECORD",
                "record with variant part", detail="variant",
            ))
        elif isinstance(node, ImportClause):
            if node.from_module == PSEUDO_MODULE or PSEUDO_MODULE in node.names:
                uses.append(FacilityUse(
                    None, node.span, "M2M-SYSTEM-IMPORT",
                    "imports unsafe facilities from SYSTEM", severity=Severity.INFO,
                ))
    return uses


def check_structure(unit: CompilationUnit, config: DialectConfig | None = None) -> list[FacilityUse]:
    """Local modules, legacy export lists and the FFI extension marker."""
    uses = []
    for node in walk(unit):
        if isinstance(node, LocalModule):
            uses.append(FacilityUse(
                FacilityId.LOCAL_MODULES, node.span, "M2M-LOCAL-MODULE",
                f"local module '{node.name}' is deprecated; make it a separate library module",
                detail=node.name,
            ))
    if unit.export_list is not None and unit.unit_kind is UnitKind.DEFINITION:
        uses.append(FacilityUse(
            FacilityId.LEGACY_EXPORT_LIST, unit.export_list.span, "M2M-EXPORT-LIST",
            "definition modules export everything; remove the export list",
            edit=strip_export_list(unit),
        ))
    if unit.ffi_pragma is not None:
        uses.append(FacilityUse(
            FacilityId.LANGUAGE_EXTENSION, unit.ffi_pragma.span, "M2M-EXTENSION",
            f"foreign definition module for '{unit.ffi_pragma.foreign_api}' is a language extension",
            detail="ffi",
        ))
    return uses
