"""Parser and AST for PIM4 Modula-2 compilation units."""

from .nodes import *  # noqa: F401,F403
from .nodes import ArrayForm, CompilationUnit, UnitKind, facility_nodes, normalize_type, shape, walk
from .parser import (
    ParseError,
    Parser,
    PragmaError,
    parse_clients_pragma,
    parse_compilation_unit,
    parse_expression,
    parse_ffi_pragma,
    parse_source,
)
