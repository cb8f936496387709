"""Recursive-descent parser for PIM4 Modula-2.

Unary minus is restricted to a single factor; anything longer is reported as
``M2M-UMINUS`` and then parsed with the permissive PIM precedence so the tree
stays usable.  Export lists in definition modules (early editions) are
accepted and recorded for the policy layer.
"""

from __future__ import annotations

import re

from ..diagnostics import Diagnostic
from ..lexis import Token, TokenKind, Trivia, TriviaKind, tokenize
from ..policy import DialectConfig, FacilityId, Severity
from ..source import SourceSpan
from .nodes import (
    ArrayType, Assignment, Block, Call, CaseArm, CaseStatement, ClientsPragma,
    CompilationUnit, ConstDecl, DerefSelector, Designator, EnumType, ExitStatement,
    ExportList, FACTOR_TYPES, FfiPragma, FieldList, FieldSelector, FormalParam,
    FormalType, ForStatement, IfBranch, IfStatement, ImportClause, IndexSelector,
    LocalModule, LoopStatement, NamedType, NotExpr, NumberLit, Parenthesized,
    PointerType, ProcedureCall, ProcedureDecl, ProcedureHeading, ProcedureType,
    RangeExpr, RecordType, Relation, RepeatStatement, ReturnStatement, SetConstructor,
    SetType, SimpleExpression, StringLit, SubrangeType, Term, TypeDecl, UnitKind,
    VarDecl, Variant, VariantPart, WhileStatement, WithStatement,
)

_PUNCT = (TokenKind.RESERVED, TokenKind.OPERATOR, TokenKind.DELIMITER, TokenKind.SYNONYM)
_IDENTS = (TokenKind.IDENT, TokenKind.FOREIGN_IDENT)

_RELATIONS = {"=": "=", "#": "#", "<>": "#", "<": "<", "<=": "<=", ">": ">", ">=": ">=", "IN": "IN"}
_ADD_OPS = {"+", "-", "OR"}
_MUL_OPS = {"*": "*", "/": "/", "DIV": "DIV", "MOD": "MOD", "AND": "AND", "&": "AND"}

_DECL_KEYWORDS = {"CONST", "TYPE", "VAR", "PROCEDURE", "MODULE"}
_STATEMENT_END = {"END", "ELSE", "ELSIF", "UNTIL", "|"}
_SYNC = {";", "BEGIN"} | _DECL_KEYWORDS | _STATEMENT_END

KNOWN_FOREIGN_APIS = ("ASM", "C", "Fortran", "Pascal")

_FFI_RE = re.compile(r'\(\*\$(FFI|F)\s*=\s*"([^"]*)"\s*\*\)\Z')
_CLIENTS_RE = re.compile(r"\(\*\$CLIENTS=\s*([A-Za-z][A-Za-z0-9]*(?:\s*,\s*[A-Za-z][A-Za-z0-9]*)*)\s*\*\)\Z")
_DIRECTIVE_KEY_RE = re.compile(r"\(\*\$\s*([A-Za-z]*)\s*(=?)")


class ParseError(Exception):
    pass


class PragmaError(ValueError):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


def directive_key(text: str) -> tuple[str, bool]:
    """Key of a canonical directive and whether ``=`` follows it."""
    m = _DIRECTIVE_KEY_RE.match(text)
    return (m.group(1), bool(m.group(2))) if m else ("", False)


def is_ffi_candidate(text: str) -> bool:
    key, has_eq = directive_key(text)
    return key == "FFI" or (key == "F" and has_eq)


def parse_ffi_pragma(trivia: Trivia) -> FfiPragma:
    """Parse ``(*$FFI="C"*)`` or ``(*$F="C"*)``; raises ``PragmaError``."""
    m = _FFI_RE.match(trivia.text)
    if m is None:
        key, has_eq = directive_key(trivia.text)
        if not has_eq:
            reason = "missing '='"
        elif '"' not in trivia.text:
            reason = "foreign API name must be quoted"
        else:
            reason = "expected (*$FFI=\"name\"*)"
        raise PragmaError("M2M-FFI-MALFORMED", f"malformed FFI pragma: {reason}")
    if not m.group(2).strip():
        raise PragmaError("M2M-FFI-MALFORMED", "malformed FFI pragma: empty foreign API name")
    return FfiPragma(key=m.group(1), foreign_api=m.group(2), span=trivia.span)


def parse_clients_pragma(trivia: Trivia) -> ClientsPragma:
    m = _CLIENTS_RE.match(trivia.text)
    if m is None:
        raise PragmaError("M2M-CLIENTS-MALFORMED", "expected (*$CLIENTS=Name, Name, ...*)")
    names = [n.strip() for n in m.group(1).split(",")]
    return ClientsPragma(client_module_names=names, span=trivia.span)


class Parser:
    def __init__(self, tokens: list[Token], config: DialectConfig | None = None, file: str = "<input>") -> None:
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            raise ValueError("token stream must end with EOF")
        self.tokens = tokens
        self.config = config or DialectConfig()
        self.file = file
        self.i = 0
        self.diagnostics: list[Diagnostic] = []
        self._last_error_at = -1

    # --- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, ahead: int = 1) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        tok = self.tok
        return tok.kind in _PUNCT and tok.text in texts

    def at_ident(self) -> bool:
        return self.tok.kind in _IDENTS

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind is not TokenKind.EOF:
            self.i += 1
        return tok

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def error(self, message: str, token: Token | None = None) -> None:
        if self._last_error_at == self.i:
            return
        self._last_error_at = self.i
        token = token or self.tok
        self.diagnostics.append(
            Diagnostic("M2M-SYNTAX", Severity.ERROR, token.span, message, self.file)
        )

    def _found(self) -> str:
        tok = self.tok
        return "end of file" if tok.kind is TokenKind.EOF else f"'{tok.text}'"

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        self.error(f"expected '{text}', found {self._found()}")
        raise ParseError(text)

    def ident(self) -> Token:
        if self.at_ident():
            return self.advance()
        self.error(f"expected identifier, found {self._found()}")
        raise ParseError("identifier")

    def span_from(self, start: int) -> SourceSpan:
        first = self.tokens[start].span
        last = self.tokens[max(self.i - 1, start)].span
        if self.i <= start:
            last = first
        return SourceSpan(first.start, last.end, first.line, first.col, last.end_line, last.end_col)

    def text_between(self, start: int, stop: int) -> str:
        """Source text of tokens ``start..stop-1`` without the first token's trivia."""
        if stop <= start:
            return ""
        return self.tokens[start].text + "".join(t.full_text for t in self.tokens[start + 1:stop])

    def sync(self, extra: set[str] = frozenset()) -> None:
        stop = _SYNC | extra
        while self.tok.kind is not TokenKind.EOF and not self.at(*stop):
            self.advance()

    # --- compilation units ---------------------------------------------------

    def compilation_unit(self) -> CompilationUnit:
        start = self.i
        if self.accept("DEFINITION"):
            kind = UnitKind.DEFINITION
        elif self.accept("IMPLEMENTATION"):
            kind = UnitKind.IMPLEMENTATION
        else:
            kind = UnitKind.PROGRAM
        name, name_span, priority = "", None, None
        header_end = self.i
        try:
            self.expect("MODULE")
            name_tok = self.ident()
            name, name_span = name_tok.text, name_tok.span
            if kind is not UnitKind.DEFINITION and self.at("["):
                priority = self.priority()
            self.expect(";")
            header_end = self.i
        except ParseError:
            self.sync()
            self.accept(";")
            header_end = self.i
        unit = CompilationUnit(
            unit_kind=kind, module_name=name, name_span=name_span, priority=priority,
            body=Block(declarations=[]), source_file=self.file, tokens=self.tokens,
        )
        self.import_section(unit, allow_export=kind is UnitKind.DEFINITION)
        if kind is UnitKind.DEFINITION:
            unit.body = self.definition_block()
        else:
            unit.body = self.block()
        self.end_name(name)
        if not self.accept("."):
            self.error(f"expected '.' after module end, found {self._found()}")
        if self.tok.kind is not TokenKind.EOF:
            self.error(f"unexpected {self._found()} after end of module")
        unit.span = self.span_from(start) if self.i > start else self.tok.span
        self.pragmas(unit, header_end)
        return unit

    def priority(self):
        self.expect("[")
        value = self.expression()
        self.expect("]")
        return value

    def end_name(self, expected: str, what: str = "module") -> None:
        if self.at_ident():
            tok = self.advance()
            if expected and tok.text != expected:
                self.diagnostics.append(Diagnostic(
                    "M2M-END-NAME", Severity.ERROR, tok.span,
                    f"{what} '{expected}' closed with name '{tok.text}'", self.file,
                ))
        else:
            self.error(f"expected {what} name after END, found {self._found()}")

    def import_section(self, unit: CompilationUnit | None, allow_export: bool,
                       imports: list[ImportClause] | None = None) -> ExportList | None:
        imports = unit.imports if unit is not None else imports
        export = None
        while self.at("FROM", "IMPORT", "EXPORT"):
            start = self.i
            try:
                if self.at("EXPORT"):
                    node = self.export_list()
                    if not allow_export:
                        self.diagnostics.append(Diagnostic(
                            "M2M-SYNTAX", Severity.ERROR, node.span,
                            "export list is only allowed in definition and local modules", self.file,
                        ))
                    elif export is not None:
                        self.diagnostics.append(Diagnostic(
                            "M2M-SYNTAX", Severity.ERROR, node.span, "duplicate export list", self.file,
                        ))
                    else:
                        export = node
                else:
                    imports.append(self.import_clause())
            except ParseError:
                self.sync({"FROM", "IMPORT", "EXPORT"})
                self.accept(";")
                if self.i == start:
                    self.advance()
        if unit is not None:
            unit.export_list = export
        return export

    def import_clause(self) -> ImportClause:
        start = self.i
        from_module = None
        if self.accept("FROM"):
            from_module = self.ident().text
        self.expect("IMPORT")
        names, spans = self.ident_list()
        self.expect(";")
        return ImportClause(from_module=from_module, names=names, name_spans=spans, span=self.span_from(start))

    def export_list(self) -> ExportList:
        start = self.i
        self.expect("EXPORT")
        qualified = self.accept("QUALIFIED") is not None
        names, _ = self.ident_list()
        self.expect(";")
        return ExportList(qualified=qualified, names=names, span=self.span_from(start))

    def ident_list(self) -> tuple[list[str], list[SourceSpan]]:
        tok = self.ident()
        names, spans = [tok.text], [tok.span]
        while self.accept(","):
            tok = self.ident()
            names.append(tok.text)
            spans.append(tok.span)
        return names, spans

    # --- pragmas ---------------------------------------------------------------

    def pragmas(self, unit: CompilationUnit, header_end: int) -> None:
        header_trivia = set()
        if header_end < len(self.tokens) and header_end > 0:
            header_trivia = {id(t) for t in self.tokens[header_end].leading_trivia}
        for token in self.tokens:
            for trivia in token.leading_trivia:
                if trivia.kind is not TriviaKind.DIRECTIVE:
                    continue
                self.directive(unit, trivia, id(trivia) in header_trivia)

    def _pragma_diag(self, code: str, trivia: Trivia, message: str, facility=None, severity=Severity.ERROR):
        if facility is not None:
            self.diagnostics.append(Diagnostic.for_facility(
                code, facility, self.config, trivia.span, message, self.file, severity=severity,
            ))
        else:
            self.diagnostics.append(Diagnostic(code, severity, trivia.span, message, self.file))

    def directive(self, unit: CompilationUnit, trivia: Trivia, after_header: bool) -> None:
        key, _ = directive_key(trivia.text)
        if is_ffi_candidate(trivia.text):
            try:
                pragma = parse_ffi_pragma(trivia)
            except PragmaError as exc:
                self._pragma_diag(exc.code, trivia, str(exc), FacilityId.FFI_PRAGMA_VIOLATION)
                return
            if not after_header or unit.unit_kind is not UnitKind.DEFINITION or unit.ffi_pragma:
                self._pragma_diag(
                    "M2M-FFI-POSITION", trivia,
                    "FFI pragma must directly follow the header of a definition module",
                    FacilityId.FFI_PRAGMA_VIOLATION,
                )
                return
            unit.ffi_pragma = pragma
            if pragma.foreign_api not in KNOWN_FOREIGN_APIS:
                self._pragma_diag(
                    "M2M-FFI-API", trivia,
                    f"foreign API '{pragma.foreign_api}' is not one of {', '.join(KNOWN_FOREIGN_APIS)}; recorded as given",
                    severity=Severity.INFO,
                )
        elif key == "CLIENTS":
            try:
                pragma = parse_clients_pragma(trivia)
            except PragmaError as exc:
                self._pragma_diag(exc.code, trivia, str(exc), severity=Severity.WARNING)
                return
            if unit.unit_kind is not UnitKind.DEFINITION or unit.clients_pragma:
                self._pragma_diag(
                    "M2M-CLIENTS-POSITION", trivia,
                    "CLIENTS pragma belongs once in a definition module; ignored", severity=Severity.WARNING,
                )
                return
            unit.clients_pragma = pragma
        else:
            self._pragma_diag(
                "M2M-DIRECTIVE-UNKNOWN", trivia,
                f"directive '{trivia.text}' is not known to this tool and is ignored", severity=Severity.INFO,
            )

    # --- blocks and declarations ---------------------------------------------

    def definition_block(self) -> Block:
        start = self.i
        decls = []
        while not self.at("END") and self.tok.kind is not TokenKind.EOF:
            before = self.i
            try:
                if self.at("CONST"):
                    decls.extend(self.const_section())
                elif self.at("TYPE"):
                    decls.extend(self.type_section(allow_opaque=True))
                elif self.at("VAR"):
                    decls.extend(self.var_section())
                elif self.at("PROCEDURE"):
                    head_start = self.i
                    heading = self.procedure_heading()
                    self.expect(";")
                    decls.append(ProcedureDecl(heading=heading, span=self.span_from(head_start)))
                else:
                    self.error(f"expected declaration or END, found {self._found()}")
                    raise ParseError("declaration")
            except ParseError:
                self.recover_declaration(before)
        self.expect_end()
        return Block(declarations=decls, span=self.span_from(start))

    def expect_end(self) -> None:
        if not self.accept("END"):
            self.error(f"expected 'END', found {self._found()}")

    def recover_declaration(self, before: int) -> None:
        self.sync()
        if self.accept(";") is None and self.i == before:
            self.advance()

    def block(self) -> Block:
        start = self.i
        decls = self.declarations()
        statements = None
        if self.accept("BEGIN"):
            statements = self.statement_sequence()
        self.expect_end()
        return Block(declarations=decls, statements=statements, span=self.span_from(start))

    def declarations(self) -> list:
        decls = []
        while self.at(*_DECL_KEYWORDS):
            before = self.i
            try:
                if self.at("CONST"):
                    decls.extend(self.const_section())
                elif self.at("TYPE"):
                    decls.extend(self.type_section(allow_opaque=False))
                elif self.at("VAR"):
                    decls.extend(self.var_section())
                elif self.at("PROCEDURE"):
                    decls.append(self.procedure_declaration())
                    self.expect(";")
                else:
                    decls.append(self.local_module())
                    self.expect(";")
            except ParseError:
                self.recover_declaration(before)
        return decls

    def section(self, keyword: str, item) -> list:
        """``keyword {item ";"}`` with recovery at each item."""
        self.expect(keyword)
        out = []
        while self.at_ident():
            before = self.i
            try:
                out.append(item())
            except ParseError:
                self.recover_declaration(before)
        return out

    def const_section(self) -> list[ConstDecl]:
        def item():
            start = self.i
            name = self.ident().text
            self.expect("=")
            value = self.expression()
            self.expect(";")
            return ConstDecl(name=name, value=value, span=self.span_from(start))
        return self.section("CONST", item)

    def type_section(self, allow_opaque: bool) -> list[TypeDecl]:
        def item():
            start = self.i
            name = self.ident().text
            if allow_opaque and self.accept(";"):
                return TypeDecl(name=name, type=None, span=self.span_from(start))
            self.expect("=")
            typ = self.type()
            self.expect(";")
            return TypeDecl(name=name, type=typ, span=self.span_from(start))
        return self.section("TYPE", item)

    def var_section(self) -> list[VarDecl]:
        def item():
            start = self.i
            names, _ = self.ident_list()
            self.expect(":")
            typ = self.type()
            self.expect(";")
            return VarDecl(names=names, type=typ, span=self.span_from(start))
        return self.section("VAR", item)

    def procedure_heading(self) -> ProcedureHeading:
        start = self.i
        self.expect("PROCEDURE")
        name = self.ident().text
        params: list[FormalParam] = []
        result = None
        if self.accept("("):
            if not self.at(")"):
                params.append(self.fp_section())
                while self.accept(";"):
                    params.append(self.fp_section())
            self.expect(")")
            if self.accept(":"):
                result = self.qualident()
        return ProcedureHeading(name=name, params=params, result=result, span=self.span_from(start))

    def fp_section(self) -> FormalParam:
        start = self.i
        var = self.accept("VAR") is not None
        names, _ = self.ident_list()
        self.expect(":")
        ftype = self.formal_type()
        return FormalParam(var=var, names=names, type=ftype, span=self.span_from(start))

    def formal_type(self, var: bool = False) -> FormalType:
        start = self.i
        open_array = False
        if self.accept("ARRAY"):
            self.expect("OF")
            open_array = True
        name = self.qualident()
        return FormalType(var=var, open_array=open_array, type_name=name, span=self.span_from(start))

    def procedure_declaration(self) -> ProcedureDecl:
        start = self.i
        heading = self.procedure_heading()
        self.expect(";")
        body = self.block()
        self.end_name(heading.name, "procedure")
        return ProcedureDecl(heading=heading, block=body, span=self.span_from(start))

    def local_module(self) -> LocalModule:
        start = self.i
        self.expect("MODULE")
        name = self.ident().text
        priority = self.priority() if self.at("[") else None
        self.expect(";")
        imports: list[ImportClause] = []
        export = self.import_section(None, allow_export=True, imports=imports)
        body = self.block()
        self.end_name(name)
        return LocalModule(
            name=name, priority=priority, imports=imports, export=export, block=body,
            span=self.span_from(start),
        )

    # --- types ---------------------------------------------------------------

    def type(self):
        if self.at("ARRAY"):
            return self.array_type()
        if self.at("RECORD"):
            return self.record_type()
        if self.at("SET"):
            start = self.i
            self.advance()
            self.expect("OF")
            return SetType(base=self.simple_type(), span=self.span_from(start))
        if self.at("POINTER"):
            start = self.i
            self.advance()
            self.expect("TO")
            return PointerType(target=self.type(), span=self.span_from(start))
        if self.at("PROCEDURE"):
            return self.procedure_type()
        return self.simple_type()

    def simple_type(self):
        start = self.i
        if self.at("("):
            self.advance()
            names, _ = self.ident_list()
            self.expect(")")
            return EnumType(names=names, span=self.span_from(start))
        base = None
        if self.at_ident():
            base = self.qualident()
            if not self.at("["):
                return NamedType(name=base, span=self.span_from(start))
        if self.at("["):
            self.advance()
            low = self.expression()
            self.expect("..")
            high = self.expression()
            self.expect("]")
            return SubrangeType(base=base, low=low, high=high, span=self.span_from(start))
        self.error(f"expected type, found {self._found()}")
        raise ParseError("type")

    def array_type(self) -> ArrayType:
        start = self.i
        self.expect("ARRAY")
        ranges = [self.simple_type()]
        while self.accept(","):
            ranges.append(self.simple_type())
        self.expect("OF")
        element = self.type()
        return ArrayType(index_ranges=ranges, element_type=element, span=self.span_from(start))

    def record_type(self) -> RecordType:
        start = self.i
        self.expect("RECORD")
        items = self.field_list_sequence()
        self.expect("END")
        fixed = [f for f in items if isinstance(f, FieldList)]
        variants = [f for f in items if isinstance(f, VariantPart)]
        return RecordType(fixed_fields=fixed, variant_parts=variants, span=self.span_from(start))

    def field_list_sequence(self) -> list:
        items = []
        while True:
            if self.at_ident():
                start = self.i
                names, _ = self.ident_list()
                self.expect(":")
                items.append(FieldList(names=names, type=self.type(), span=self.span_from(start)))
            elif self.at("CASE"):
                items.append(self.variant_part())
            if not self.accept(";"):
                return items

    def variant_part(self) -> VariantPart:
        start = self.i
        self.expect("CASE")
        tag_name, tag_type = None, None
        if self.at_ident() and self.peek().text == ":":
            tag_name = self.advance().text
            self.advance()
            tag_type = self.qualident()
        elif self.accept(":"):
            tag_type = self.qualident()
        else:
            tag_type = self.qualident()  # tag type without field name
        self.expect("OF")
        variants = []
        while True:
            if not self.at("|", "ELSE", "END"):
                vstart = self.i
                labels = self.case_label_list()
                self.expect(":")
                fields_ = self.field_list_sequence()
                variants.append(Variant(labels=labels, fields=fields_, span=self.span_from(vstart)))
            if not self.accept("|"):
                break
        else_fields = []
        if self.accept("ELSE"):
            else_fields = self.field_list_sequence()
        self.expect("END")
        return VariantPart(
            tag_name=tag_name, tag_type=tag_type, variants=variants, else_fields=else_fields,
            span=self.span_from(start),
        )

    def procedure_type(self) -> ProcedureType:
        start = self.i
        self.expect("PROCEDURE")
        params: list[FormalType] = []
        result = None
        if self.accept("("):
            if not self.at(")"):
                while True:
                    var = self.accept("VAR") is not None
                    params.append(self.formal_type(var))
                    if not self.accept(","):
                        break
            self.expect(")")
            if self.accept(":"):
                result = self.qualident()
        return ProcedureType(params=params, result=result, span=self.span_from(start))

    def qualident(self) -> Designator:
        start = self.i
        tok = self.ident()
        selectors = []
        while self.at(".") and self.peek().kind in _IDENTS:
            self.advance()
            sel_start = self.i
            selectors.append(FieldSelector(name=self.advance().text, span=self.span_from(sel_start)))
        return Designator(name=tok.text, name_span=tok.span, selectors=selectors, span=self.span_from(start))

    # --- statements ----------------------------------------------------------

    def statement_sequence(self) -> list:
        stmts = []
        while True:
            if self.tok.kind is TokenKind.EOF or self.at(*_STATEMENT_END):
                return stmts
            before = self.i
            try:
                stmt = self.statement()
                if stmt is not None:
                    stmts.append(stmt)
            except ParseError:
                self.sync()
            if self.accept(";"):
                continue
            if self.tok.kind is TokenKind.EOF or self.at(*_STATEMENT_END):
                return stmts
            if self.at("BEGIN", *_DECL_KEYWORDS):
                self.error(f"unexpected {self._found()} in statement sequence")
                return stmts
            self.error(f"expected ';', found {self._found()}")
            if self.i == before:
                self.advance()

    def statement(self):
        start = self.i
        if self.at_ident():
            target = self.designator()
            if self.accept(":="):
                value = self.expression()
                return Assignment(target=target, value=value, span=self.span_from(start))
            if self.at("="):
                self.error("expected ':=' in assignment, found '='")
                raise ParseError(":=")
            call = self.call_suffix(target, start, statement=True)
            return ProcedureCall(call=call, span=self.span_from(start))
        if self.at("IF"):
            return self.if_statement()
        if self.at("CASE"):
            return self.case_statement()
        if self.accept("WHILE"):
            cond = self.expression()
            self.expect("DO")
            body = self.statement_sequence()
            self.expect("END")
            return WhileStatement(condition=cond, body=body, span=self.span_from(start))
        if self.accept("REPEAT"):
            body = self.statement_sequence()
            self.expect("UNTIL")
            cond = self.expression()
            return RepeatStatement(body=body, condition=cond, span=self.span_from(start))
        if self.accept("LOOP"):
            body = self.statement_sequence()
            self.expect("END")
            return LoopStatement(body=body, span=self.span_from(start))
        if self.at("FOR"):
            return self.for_statement()
        if self.accept("WITH"):
            record = self.designator()
            self.expect("DO")
            body = self.statement_sequence()
            self.expect("END")
            return WithStatement(record=record, body=body, span=self.span_from(start))
        if self.accept("EXIT"):
            return ExitStatement(span=self.span_from(start))
        if self.accept("RETURN"):
            value = None
            if not (self.at(";") or self.at(*_STATEMENT_END) or self.tok.kind is TokenKind.EOF):
                value = self.expression()
            return ReturnStatement(value=value, span=self.span_from(start))
        if self.at(";"):
            return None  # empty statement
        self.error(f"expected statement, found {self._found()}")
        raise ParseError("statement")

    def if_statement(self) -> IfStatement:
        start = self.i
        self.expect("IF")
        branches = []
        while True:
            bstart = self.i
            cond = self.expression()
            self.expect("THEN")
            body = self.statement_sequence()
            branches.append(IfBranch(condition=cond, body=body, span=self.span_from(bstart)))
            if not self.accept("ELSIF"):
                break
        else_body = self.statement_sequence() if self.accept("ELSE") else None
        self.expect("END")
        return IfStatement(branches=branches, else_body=else_body, span=self.span_from(start))

    def case_statement(self) -> CaseStatement:
        start = self.i
        self.expect("CASE")
        selector = self.expression()
        self.expect("OF")
        arms = []
        while True:
            if not self.at("|", "ELSE", "END"):
                astart = self.i
                labels = self.case_label_list()
                self.expect(":")
                body = self.statement_sequence()
                arms.append(CaseArm(labels=labels, body=body, span=self.span_from(astart)))
            if not self.accept("|"):
                break
        else_body = self.statement_sequence() if self.accept("ELSE") else None
        self.expect("END")
        return CaseStatement(selector=selector, arms=arms, else_body=else_body, span=self.span_from(start))

    def case_label_list(self) -> list:
        labels = [self.case_labels()]
        while self.accept(","):
            labels.append(self.case_labels())
        return labels

    def case_labels(self):
        start = self.i
        low = self.expression()
        if self.accept(".."):
            high = self.expression()
            return RangeExpr(low=low, high=high, span=self.span_from(start))
        return low

    def for_statement(self) -> ForStatement:
        start = self.i
        self.expect("FOR")
        tok = self.ident()
        variable = Designator(name=tok.text, name_span=tok.span, span=tok.span)
        self.expect(":=")
        first = self.expression()
        self.expect("TO")
        last = self.expression()
        step = self.expression() if self.accept("BY") else None
        self.expect("DO")
        body = self.statement_sequence()
        self.expect("END")
        return ForStatement(variable=variable, start=first, stop=last, step=step, body=body, span=self.span_from(start))

    # --- expressions ---------------------------------------------------------

    def designator(self) -> Designator:
        start = self.i
        tok = self.ident()
        selectors = []
        while True:
            if self.at(".") and self.peek().kind in _IDENTS:
                self.advance()
                sel_start = self.i
                selectors.append(FieldSelector(name=self.advance().text, span=self.span_from(sel_start)))
            elif self.at("["):
                sel_start = self.i
                self.advance()
                indices = self.expression_list()
                self.expect("]")
                selectors.append(IndexSelector(indices=indices, span=self.span_from(sel_start)))
            elif self.at("^"):
                sel_start = self.i
                self.advance()
                selectors.append(DerefSelector(span=self.span_from(sel_start)))
            else:
                break
        return Designator(name=tok.text, name_span=tok.span, selectors=selectors, span=self.span_from(start))

    def call_suffix(self, callee: Designator, start: int, statement: bool = False):
        if not self.at("("):
            return Call(callee=callee, args=None, span=self.span_from(start)) if statement else callee
        open_span = self.advance().span
        args = [] if self.at(")") else self.expression_list()
        self.expect(")")
        return Call(callee=callee, args=args, open_span=open_span, span=self.span_from(start))

    def expression_list(self) -> list:
        exprs = [self.expression()]
        while self.accept(","):
            exprs.append(self.expression())
        return exprs

    def expression(self):
        start = self.i
        left = self.simple_expression()
        if self.tok.kind in _PUNCT and self.tok.text in _RELATIONS:
            op = _RELATIONS[self.advance().text]
            right = self.simple_expression()
            return Relation(operator=op, left=left, right=right, span=self.span_from(start))
        return left

    def simple_expression(self):
        start = self.i
        sign = None
        if self.at("+", "-"):
            sign = self.advance().text
        operand_start = self.i
        operands = [self.term()]
        first_end = self.i
        operators = []
        while self.at(*_ADD_OPS):
            operators.append(self.advance().text)
            operands.append(self.term())
        if sign == "-":
            first = operands[0]
            if operators or not isinstance(first, FACTOR_TYPES):
                self.ambiguous_minus(start, operand_start, first_end, first)
        if sign is None and len(operands) == 1:
            return operands[0]
        return SimpleExpression(sign=sign, operands=operands, operators=operators, span=self.span_from(start))

    def ambiguous_minus(self, sign_index: int, operand_start: int, first_end: int, first) -> None:
        operand_text = self.text_between(operand_start, self.i)
        if isinstance(first, Term):
            factor_end = self._index_after(first.operands[0])
        else:
            factor_end = first_end
        factor_text = self.text_between(operand_start, factor_end)
        rest = "".join(t.full_text for t in self.tokens[factor_end:self.i])
        mathematical = f"(-{factor_text}){rest}"
        grammatical = f"-({operand_text})"
        span = self.span_from(sign_index)
        self.diagnostics.append(Diagnostic.for_facility(
            "M2M-UMINUS", FacilityId.AMBIGUOUS_UNARY_MINUS, self.config, span,
            f"unary minus applies to more than one factor; write {mathematical} "
            f"or {grammatical} to make the intent explicit",
            self.file,
        ))

    def _index_after(self, node) -> int:
        end = node.span.end
        j = self.i
        while j > 0 and self.tokens[j - 1].span.start >= end:
            j -= 1
        return j

    def term(self):
        start = self.i
        operands = [self.factor()]
        operators = []
        while self.tok.kind in _PUNCT and self.tok.text in _MUL_OPS:
            operators.append(_MUL_OPS[self.advance().text])
            operands.append(self.factor())
        if not operators:
            return operands[0]
        return Term(operands=operands, operators=operators, span=self.span_from(start))

    def factor(self):
        start = self.i
        tok = self.tok
        if tok.kind in (TokenKind.INTEGER, TokenKind.REAL, TokenKind.CHAR_CODE):
            self.advance()
            return NumberLit(text=tok.text, base=tok.base, span=tok.span)
        if tok.kind is TokenKind.STRING:
            self.advance()
            return StringLit(text=tok.text, span=tok.span)
        if self.at("{"):
            return self.set_constructor(None, start)
        if self.at("("):
            self.advance()
            inner = self.expression()
            self.expect(")")
            return Parenthesized(expr=inner, span=self.span_from(start))
        if self.at("NOT", "~"):
            self.advance()
            return NotExpr(operand=self.factor(), span=self.span_from(start))
        if self.at_ident():
            target = self.designator()
            if self.at("{"):
                return self.set_constructor(target, start)
            return self.call_suffix(target, start)
        self.error(f"expected expression, found {self._found()}")
        raise ParseError("factor")

    def set_constructor(self, type_name, start: int) -> SetConstructor:
        self.expect("{")
        elements = []
        if not self.at("}"):
            while True:
                el_start = self.i
                low = self.expression()
                if self.accept(".."):
                    low = RangeExpr(low=low, high=self.expression(), span=self.span_from(el_start))
                elements.append(low)
                if not self.accept(","):
                    break
        self.expect("}")
        return SetConstructor(type_name=type_name, elements=elements, span=self.span_from(start))


def parse_compilation_unit(
    tokens: list[Token],
    config: DialectConfig | None = None,
    file: str = "<input>",
) -> tuple[CompilationUnit, list[Diagnostic]]:
    parser = Parser(tokens, config, file)
    unit = parser.compilation_unit()
    return unit, parser.diagnostics


def parse_expression(
    tokens: list[Token],
    config: DialectConfig | None = None,
    file: str = "<input>",
):
    """Parse a standalone expression; trailing tokens are a syntax error."""
    parser = Parser(tokens, config, file)
    try:
        expr = parser.expression()
    except ParseError:
        expr = None
    if parser.tok.kind is not TokenKind.EOF:
        parser.error(f"unexpected {parser._found()} after expression")
    return expr, parser.diagnostics


def parse_source(source: str, config: DialectConfig | None = None, file: str = "<input>"):
    """Tokenize and parse in one go; returns the unit and all diagnostics."""
    tokens, lex_diags = tokenize(source, config, file)
    unit, diags = parse_compilation_unit(tokens, config, file)
    return unit, lex_diags + diags
