"""AST node classes.

Nodes record spans but no trivia; the token list kept on ``CompilationUnit``
is the lossless view of the source.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Any, Iterator, Union

from ..lexis import Token, Trivia, emit
from ..source import SourceSpan


@dataclass(kw_only=True, eq=False)
class Node:
    span: SourceSpan | None = None


def children(node: Node) -> Iterator[Node]:
    for f in fields(node):
        if f.name in ("span", "tokens"):
            continue
        yield from _nodes_in(getattr(node, f.name))


def _nodes_in(value: Any) -> Iterator[Node]:
    if isinstance(value, Node):
        yield value
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield from _nodes_in(item)


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal over ``node`` and all its descendants."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(children(current))))


def shape(value: Any) -> Any:
    """Span-free structural view of a node, for comparing trees."""
    if isinstance(value, Node):
        items = tuple(
            (f.name, shape(getattr(value, f.name)))
            for f in fields(value)
            if f.name not in ("span", "name_span", "open_span", "name_spans")
        )
        return (type(value).__name__,) + items
    if isinstance(value, (list, tuple)):
        return tuple(shape(v) for v in value)
    if isinstance(value, enum.Enum):
        return value.value
    return value


# --- expressions -----------------------------------------------------------


@dataclass(kw_only=True, eq=False)
class FieldSelector(Node):
    name: str


@dataclass(kw_only=True, eq=False)
class IndexSelector(Node):
    indices: list[Expr]


@dataclass(kw_only=True, eq=False)
class DerefSelector(Node):
    pass


Selector = Union[FieldSelector, IndexSelector, DerefSelector]


@dataclass(kw_only=True, eq=False)
class Designator(Node):
    name: str
    name_span: SourceSpan | None = None
    selectors: list[Selector] = field(default_factory=list)

    @property
    def dotted(self) -> list[str]:
        """Leading ``a.b.c`` identifiers, before any index or dereference."""
        parts = [self.name]
        for sel in self.selectors:
            if not isinstance(sel, FieldSelector):
                break
            parts.append(sel.name)
        return parts


@dataclass(kw_only=True, eq=False)
class Call(Node):
    callee: Designator
    args: list[Expr] | None  # None: procedure call statement without parentheses
    open_span: SourceSpan | None = None


@dataclass(kw_only=True, eq=False)
class NumberLit(Node):
    text: str
    base: str | None = None


@dataclass(kw_only=True, eq=False)
class StringLit(Node):
    text: str


@dataclass(kw_only=True, eq=False)
class RangeExpr(Node):
    low: Expr
    high: Expr


@dataclass(kw_only=True, eq=False)
class SetConstructor(Node):
    type_name: Designator | None
    elements: list[Expr]


@dataclass(kw_only=True, eq=False)
class Parenthesized(Node):
    expr: Expr


@dataclass(kw_only=True, eq=False)
class NotExpr(Node):
    operand: Expr


@dataclass(kw_only=True, eq=False)
class Term(Node):
    operands: list[Expr]
    operators: list[str]


@dataclass(kw_only=True, eq=False)
class SimpleExpression(Node):
    sign: str | None
    operands: list[Expr]
    operators: list[str]


@dataclass(kw_only=True, eq=False)
class Relation(Node):
    operator: str
    left: Expr
    right: Expr


Factor = Union[Designator, Call, NumberLit, StringLit, SetConstructor, Parenthesized, NotExpr]
Expr = Union[Factor, Term, SimpleExpression, Relation, RangeExpr]

FACTOR_TYPES = (Designator, Call, NumberLit, StringLit, SetConstructor, Parenthesized, NotExpr)


# --- types -------------------------------------------------------------------


@dataclass(kw_only=True, eq=False)
class NamedType(Node):
    name: Designator


@dataclass(kw_only=True, eq=False)
class EnumType(Node):
    names: list[str]


@dataclass(kw_only=True, eq=False)
class SubrangeType(Node):
    base: Designator | None
    low: Expr
    high: Expr


class ArrayForm(enum.Enum):
    ABBREVIATED = "abbreviated"
    LONG = "long"


@dataclass(kw_only=True, eq=False)
class ArrayType(Node):
    index_ranges: list[TypeNode]
    element_type: TypeNode

    @property
    def form(self) -> ArrayForm:
        """Abbreviated when one ARRAY carries several index types."""
        if len(self.index_ranges) >= 2:
            return ArrayForm.ABBREVIATED
        return ArrayForm.LONG

    @property
    def dimensions(self) -> int:
        if len(self.index_ranges) >= 2:
            return len(self.index_ranges)
        inner = self.element_type
        return 1 + (inner.dimensions if isinstance(inner, ArrayType) else 0)


@dataclass(kw_only=True, eq=False)
class FieldList(Node):
    names: list[str]
    type: TypeNode


@dataclass(kw_only=True, eq=False)
class Variant(Node):
    labels: list[Expr]
    fields: list[FieldList | VariantPart]


@dataclass(kw_only=True, eq=False)
class VariantPart(Node):
    tag_name: str | None
    tag_type: Designator | None
    variants: list[Variant]
    else_fields: list[FieldList | VariantPart] = field(default_factory=list)


@dataclass(kw_only=True, eq=False)
class RecordType(Node):
    fixed_fields: list[FieldList]
    variant_parts: list[VariantPart]

    @property
    def uses_variants(self) -> bool:
        return bool(self.variant_parts)


@dataclass(kw_only=True, eq=False)
class SetType(Node):
    base: TypeNode


@dataclass(kw_only=True, eq=False)
class PointerType(Node):
    target: TypeNode


@dataclass(kw_only=True, eq=False)
class FormalType(Node):
    var: bool = False
    open_array: bool = False
    type_name: Designator


@dataclass(kw_only=True, eq=False)
class ProcedureType(Node):
    params: list[FormalType]
    result: Designator | None


TypeNode = Union[NamedType, EnumType, SubrangeType, ArrayType, RecordType, SetType, PointerType, ProcedureType]


# --- statements --------------------------------------------------------------


@dataclass(kw_only=True, eq=False)
class Assignment(Node):
    target: Designator
    value: Expr


@dataclass(kw_only=True, eq=False)
class ProcedureCall(Node):
    call: Call


@dataclass(kw_only=True, eq=False)
class IfBranch(Node):
    condition: Expr
    body: list[Statement]


@dataclass(kw_only=True, eq=False)
class IfStatement(Node):
    branches: list[IfBranch]
    else_body: list[Statement] | None = None


@dataclass(kw_only=True, eq=False)
class CaseArm(Node):
    labels: list[Expr]
    body: list[Statement]


@dataclass(kw_only=True, eq=False)
class CaseStatement(Node):
    selector: Expr
    arms: list[CaseArm]
    else_body: list[Statement] | None = None


@dataclass(kw_only=True, eq=False)
class WhileStatement(Node):
    condition: Expr
    body: list[Statement]


@dataclass(kw_only=True, eq=False)
class RepeatStatement(Node):
    body: list[Statement]
    condition: Expr


@dataclass(kw_only=True, eq=False)
class LoopStatement(Node):
    body: list[Statement]


@dataclass(kw_only=True, eq=False)
class ForStatement(Node):
    variable: Designator
    start: Expr
    stop: Expr
    step: Expr | None
    body: list[Statement]


@dataclass(kw_only=True, eq=False)
class WithStatement(Node):
    record: Designator
    body: list[Statement]


@dataclass(kw_only=True, eq=False)
class ExitStatement(Node):
    pass


@dataclass(kw_only=True, eq=False)
class ReturnStatement(Node):
    value: Expr | None = None


Statement = Union[
    Assignment, ProcedureCall, IfStatement, CaseStatement, WhileStatement,
    RepeatStatement, LoopStatement, ForStatement, WithStatement, ExitStatement, ReturnStatement,
]


# --- declarations ------------------------------------------------------------


@dataclass(kw_only=True, eq=False)
class ImportClause(Node):
    from_module: str | None
    names: list[str]
    name_spans: list[SourceSpan] = field(default_factory=list)


@dataclass(kw_only=True, eq=False)
class ExportList(Node):
    qualified: bool
    names: list[str]


@dataclass(kw_only=True, eq=False)
class ConstDecl(Node):
    name: str
    value: Expr


@dataclass(kw_only=True, eq=False)
class TypeDecl(Node):
    name: str
    type: TypeNode | None  # None: opaque type in a definition module


@dataclass(kw_only=True, eq=False)
class VarDecl(Node):
    names: list[str]
    type: TypeNode


@dataclass(kw_only=True, eq=False)
class FormalParam(Node):
    var: bool
    names: list[str]
    type: FormalType


@dataclass(kw_only=True, eq=False)
class ProcedureHeading(Node):
    name: str
    params: list[FormalParam]
    result: Designator | None = None

    def var_flags(self) -> list[bool]:
        """One flag per formal parameter position."""
        return [p.var for p in self.params for _ in p.names]


@dataclass(kw_only=True, eq=False)
class Block(Node):
    declarations: list[Declaration]
    statements: list[Statement] | None = None


@dataclass(kw_only=True, eq=False)
class ProcedureDecl(Node):
    heading: ProcedureHeading
    block: Block | None = None  # None in definition modules


@dataclass(kw_only=True, eq=False)
class LocalModule(Node):
    name: str
    priority: Expr | None
    imports: list[ImportClause]
    export: ExportList | None
    block: Block


Declaration = Union[ConstDecl, TypeDecl, VarDecl, ProcedureDecl, LocalModule]


# --- compilation units -------------------------------------------------------


class UnitKind(enum.Enum):
    DEFINITION = "definition"
    IMPLEMENTATION = "implementation"
    PROGRAM = "program"


@dataclass(kw_only=True, eq=False)
class FfiPragma(Node):
    key: str
    foreign_api: str


@dataclass(kw_only=True, eq=False)
class ClientsPragma(Node):
    client_module_names: list[str]


@dataclass(kw_only=True, eq=False)
class CompilationUnit(Node):
    unit_kind: UnitKind
    module_name: str
    name_span: SourceSpan | None = None
    priority: Expr | None = None
    ffi_pragma: FfiPragma | None = None
    clients_pragma: ClientsPragma | None = None
    export_list: ExportList | None = None
    imports: list[ImportClause] = field(default_factory=list)
    body: Block
    source_file: str = "<input>"
    tokens: list[Token] = field(default_factory=list, repr=False)

    def source_text(self) -> str:
        return emit(self.tokens)

    def directives(self) -> Iterator[Trivia]:
        for token in self.tokens:
            yield from token.leading_trivia

    def imported_modules(self) -> Iterator[ImportClause]:
        for node in walk(self):
            if isinstance(node, ImportClause):
                yield node


# --- facility walk -----------------------------------------------------------


def facility_nodes(unit: CompilationUnit) -> Iterator[Node]:
    """Every node that marks use of a dialect facility, each exactly once.

    Yields local modules, records with variant parts, the legacy export list
    and the FFI and CLIENTS pragmas.  Token-level facilities (octal literals,
    synonyms) live in ``unit.tokens``.
    """
    for node in walk(unit):
        if isinstance(node, LocalModule):
            yield node
        elif isinstance(node, RecordType) and node.uses_variants:
            yield node
        elif isinstance(node, (FfiPragma, ClientsPragma)):
            yield node
        elif isinstance(node, ExportList) and node is unit.export_list:
            yield node


def normalize_type(node: TypeNode) -> Any:
    """Canonical shape of a type with multi-dimensional arrays flattened.

    ``ARRAY a, b OF T`` and ``ARRAY a OF ARRAY b OF T`` normalize equally.
    """
    if isinstance(node, ArrayType):
        ranges = [shape(r) for r in node.index_ranges]
        element = node.element_type
        while isinstance(element, ArrayType):
            ranges.extend(shape(r) for r in element.index_ranges)
            element = element.element_type
        return ("ARRAY", tuple(ranges), normalize_type(element))
    return shape(node)
