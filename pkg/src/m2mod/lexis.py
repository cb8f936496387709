"""Trivia-preserving tokenizer for classic Modula-2.

Whitespace, comments and directives are attached to the following token as
leading trivia, so concatenating ``trivia + text`` over the token stream gives
back the input exactly.  The scanner never stops early: every problem becomes
a diagnostic and scanning resumes after the offending characters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .diagnostics import Diagnostic
from .policy import DialectConfig, FacilityId, Severity
from .source import LineMap, SourceSpan

RESERVED_WORDS = frozenset(
    """AND ARRAY BEGIN BY CASE CONST DEFINITION DIV DO ELSE ELSIF END EXIT EXPORT
    FOR FROM IF IMPLEMENTATION IMPORT IN LOOP MOD MODULE NOT OF OR POINTER
    PROCEDURE QUALIFIED RECORD REPEAT RETURN SET THEN TO TYPE UNTIL VAR WHILE
    WITH""".split()
)

OPERATORS = frozenset({"+", "-", "*", "/", ":=", "=", "#", "<", "<=", ">", ">=", "..", "^"})
DELIMITERS = frozenset({"(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "|"})
SYNONYMS = {"<>": "#", "&": "AND", "~": "NOT"}
_TWO_CHAR = frozenset({":=", "<=", ">=", "<>", ".."})

LETTERS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz")
DIGITS = frozenset("0123456789")
HEX_DIGITS = frozenset("0123456789ABCDEF")
OCTAL_DIGITS = frozenset("01234567")
_IDENT_CHARS = LETTERS | DIGITS | {"_", "$"}
_BLANKS = frozenset(" \t\r\n\f\v")

NON_CANONICAL_OPENERS = ("(*%", "(*#")


class TokenKind(enum.Enum):
    RESERVED = "reserved"
    IDENT = "identifier"
    FOREIGN_IDENT = "foreign-identifier"
    INTEGER = "integer"
    CHAR_CODE = "char-code"
    REAL = "real"
    STRING = "string"
    OPERATOR = "operator"
    DELIMITER = "delimiter"
    SYNONYM = "synonym"
    ERROR = "error"
    EOF = "eof"


class TriviaKind(enum.Enum):
    WHITESPACE = "whitespace"
    COMMENT = "comment"
    DIRECTIVE = "directive"  # canonical (*$ ... *)
    NON_CANONICAL_DIRECTIVE = "non-canonical-directive"
    SEMANTIC_DIRECTIVE = "semantic-directive"  # %-prefixed line


@dataclass(frozen=True)
class Trivia:
    kind: TriviaKind
    text: str
    span: SourceSpan


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    leading_trivia: tuple[Trivia, ...] = ()
    base: str | None = None  # "decimal" | "hex" | "octalB" | "octalC" for numbers
    blocked: bool = False  # disabled facility, kept so it can be rewritten
    malformed: bool = False

    @property
    def full_text(self) -> str:
        return "".join(t.text for t in self.leading_trivia) + self.text

    def is_(self, kind: TokenKind, text: str | None = None) -> bool:
        return self.kind is kind and (text is None or self.text == text)

    @property
    def is_word(self) -> bool:
        """True for tokens that would fuse with an adjacent letter."""
        return self.kind in (
            TokenKind.RESERVED, TokenKind.IDENT, TokenKind.FOREIGN_IDENT,
            TokenKind.INTEGER, TokenKind.CHAR_CODE, TokenKind.REAL,
        )


def emit(tokens) -> str:
    """Concatenate trivia and token text back into source."""
    return "".join(t.full_text for t in tokens)


# ---------------------------------------------------------------------------
# identifiers


class IdentifierContext(enum.Enum):
    ORDINARY = "ordinary"
    MODULE = "module"


class ForeignRule(enum.Enum):
    LEADING_LOWLINE = "LeadingLowline"
    CONSECUTIVE_DOLLAR = "ConsecutiveDollar"
    CONSECUTIVE_LOWLINE = "ConsecutiveLowline"
    TRAILING_DOLLAR = "TrailingDollar"
    TRAILING_LOWLINE = "TrailingLowline"


class IdentifierKind(enum.Enum):
    PLAIN = "plain"
    FOREIGN = "foreign"


@dataclass(frozen=True)
class IdentifierClass:
    kind: IdentifierKind
    violation: ForeignRule | None = None
    code: str | None = None  # set when the identifier is rejected

    @property
    def accepted(self) -> bool:
        return self.code is None


def foreign_violation(text: str) -> ForeignRule | None:
    """First structural rule broken by a foreign identifier, in a fixed order."""
    if text.startswith("_"):
        return ForeignRule.LEADING_LOWLINE
    if "$$" in text:
        return ForeignRule.CONSECUTIVE_DOLLAR
    if "__" in text:
        return ForeignRule.CONSECUTIVE_LOWLINE
    if text.endswith("$"):
        return ForeignRule.TRAILING_DOLLAR
    if text.endswith("_"):
        return ForeignRule.TRAILING_LOWLINE
    return None


def classify_identifier(
    text: str,
    config: DialectConfig,
    context: IdentifierContext = IdentifierContext.ORDINARY,
) -> IdentifierClass:
    if "$" not in text and "_" not in text:
        return IdentifierClass(IdentifierKind.PLAIN)
    foreign = IdentifierKind.FOREIGN
    if context is IdentifierContext.MODULE:
        return IdentifierClass(foreign, foreign_violation(text), "M2M-FOREIGN-IN-MODULE-ID")
    if not (config.foreign_identifiers or config.language_extensions):
        return IdentifierClass(foreign, foreign_violation(text), "M2M-FOREIGN-DISABLED")
    rule = foreign_violation(text)
    if rule is not None:
        return IdentifierClass(foreign, rule, "M2M-FOREIGN-MALFORMED")
    return IdentifierClass(foreign)


# ---------------------------------------------------------------------------
# directives


class DirectiveKind(enum.Enum):
    CANONICAL = "canonical"
    NON_CANONICAL = "non-canonical"
    SEMANTIC_CANDIDATE = "semantic-candidate"


@dataclass(frozen=True)
class DirectiveForm:
    kind: DirectiveKind
    delimiter: str


def scan_directive(trivia_text: str) -> DirectiveForm | None:
    """Classify a comment-like or ``%``-prefixed region; ``None`` for plain comments."""
    if trivia_text.startswith("(*$"):
        return DirectiveForm(DirectiveKind.CANONICAL, "(*$")
    for opener in NON_CANONICAL_OPENERS:
        if trivia_text.startswith(opener):
            return DirectiveForm(DirectiveKind.NON_CANONICAL, opener)
    if trivia_text.startswith("%"):
        return DirectiveForm(DirectiveKind.SEMANTIC_CANDIDATE, "%")
    return None


# ---------------------------------------------------------------------------
# scanner


@dataclass
class _Scanner:
    text: str
    config: DialectConfig
    file: str
    lines: LineMap = field(init=False)
    pos: int = 0
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.lines = LineMap(self.text)

    def span(self, start: int, end: int) -> SourceSpan:
        return self.lines.span(start, end)

    def error(self, code: str, start: int, end: int, message: str) -> None:
        self.diagnostics.append(
            Diagnostic(code, Severity.ERROR, self.span(start, end), message, self.file)
        )

    def facility(self, code, facility, start, end, message, severity=None) -> None:
        self.diagnostics.append(
            Diagnostic.for_facility(
                code, facility, self.config, self.span(start, end), message, self.file,
                severity=severity,
            )
        )

    # trivia ---------------------------------------------------------------

    def _at_line_start(self, pos: int) -> bool:
        i = pos - 1
        while i >= 0 and self.text[i] in " \t":
            i -= 1
        return i < 0 or self.text[i] == "\n"

    def scan_trivia(self) -> list[Trivia]:
        text, n = self.text, len(self.text)
        trivia: list[Trivia] = []
        while self.pos < n:
            start = self.pos
            ch = text[start]
            if ch in _BLANKS:
                end = start
                while end < n and text[end] in _BLANKS:
                    end += 1
                trivia.append(Trivia(TriviaKind.WHITESPACE, text[start:end], self.span(start, end)))
            elif text.startswith("(*", start):
                end = self._comment_end(start)
                trivia.append(self._comment_trivia(start, end))
            elif ch == "%" and self._at_line_start(start):
                end = start
                while end < n and text[end] not in "\r\n":
                    end += 1
                body = text[start:end]
                trivia.append(Trivia(TriviaKind.SEMANTIC_DIRECTIVE, body, self.span(start, end)))
                self.facility(
                    "M2M-SEMANTIC-DIRECTIVE", FacilityId.SEMANTIC_DIRECTIVE_CANDIDATE, start, end,
                    f"semantic directive '{body.strip()}' is not interpreted by this tool",
                )
            else:
                break
            self.pos = end
        return trivia

    def _comment_end(self, start: int) -> int:
        text, n = self.text, len(self.text)
        depth, i = 1, start + 2
        while i < n:
            if text.startswith("(*", i):
                depth += 1
                i += 2
            elif text.startswith("*)", i):
                depth -= 1
                i += 2
                if depth == 0:
                    return i
            else:
                i += 1
        self.error("M2M-UNTERMINATED-COMMENT", start, start + 2, "comment is not terminated")
        return n

    def _comment_trivia(self, start: int, end: int) -> Trivia:
        body = self.text[start:end]
        form = scan_directive(body)
        if form is None:
            return Trivia(TriviaKind.COMMENT, body, self.span(start, end))
        if form.kind is DirectiveKind.CANONICAL:
            return Trivia(TriviaKind.DIRECTIVE, body, self.span(start, end))
        trivia = Trivia(TriviaKind.NON_CANONICAL_DIRECTIVE, body, self.span(start, end))
        from .rewrite import directive_edit

        self.diagnostics.append(
            Diagnostic.for_facility(
                "M2M-DIRECTIVE", FacilityId.NON_CANONICAL_DIRECTIVES, self.config,
                trivia.span, f"directive opened with '{form.delimiter}' instead of '(*$'",
                self.file, suggested_edit=directive_edit(trivia),
            )
        )
        return trivia

    # tokens ---------------------------------------------------------------

    def scan_token(self, prev: Token | None) -> tuple[TokenKind, int, dict]:
        """Return kind, end offset and extra token fields for the token at ``pos``."""
        text, n, start = self.text, len(self.text), self.pos
        ch = text[start]
        if ch in LETTERS or ch == "_":
            return self._identifier(start, prev)
        if ch in DIGITS:
            return self._number(start)
        if ch in "'\"":
            end = text.find(ch, start + 1)
            eol = start + 1
            while eol < n and text[eol] not in "\r\n":
                eol += 1
            if end == -1 or end > eol:
                self.error("M2M-UNTERMINATED-STRING", start, eol, "string is not terminated on its line")
                return TokenKind.STRING, eol, {}
            return TokenKind.STRING, end + 1, {}
        two = text[start:start + 2]
        if two in _TWO_CHAR:
            symbol = two
        else:
            symbol = ch
        end = start + len(symbol)
        if symbol in SYNONYMS:
            return TokenKind.SYNONYM, end, {"blocked": not self.config.synonym_symbols}
        if symbol in OPERATORS:
            return TokenKind.OPERATOR, end, {}
        if symbol in DELIMITERS:
            return TokenKind.DELIMITER, end, {}
        shown = ch if " " < ch < "\x7f" else f"\\x{ord(ch):02x}"
        self.error("M2M-ILLEGAL-CHAR", start, end, f"illegal character '{shown}'")
        return TokenKind.ERROR, end, {}

    def _identifier(self, start: int, prev: Token | None) -> tuple[TokenKind, int, dict]:
        text, n = self.text, len(self.text)
        end = start
        while end < n and text[end] in _IDENT_CHARS:
            end += 1
        word = text[start:end]
        if word in RESERVED_WORDS:
            return TokenKind.RESERVED, end, {}
        context = (
            IdentifierContext.MODULE
            if prev is not None and prev.is_(TokenKind.RESERVED, "MODULE")
            else IdentifierContext.ORDINARY
        )
        verdict = classify_identifier(word, self.config, context)
        if verdict.kind is IdentifierKind.PLAIN:
            return TokenKind.IDENT, end, {}
        if verdict.code == "M2M-FOREIGN-DISABLED":
            self.facility(
                verdict.code, FacilityId.FOREIGN_IDENTIFIERS, start, end,
                f"foreign identifier '{word}' requires the foreign-identifiers switch",
            )
        elif verdict.code == "M2M-FOREIGN-MALFORMED":
            self.facility(
                verdict.code, FacilityId.FOREIGN_IDENTIFIERS, start, end,
                f"foreign identifier '{word}' violates rule {verdict.violation.value}",
                severity=Severity.ERROR,
            )
        elif verdict.code == "M2M-FOREIGN-IN-MODULE-ID":
            self.facility(
                verdict.code, FacilityId.FOREIGN_IDENTIFIERS, start, end,
                f"module identifier '{word}' may not contain '$' or '_'",
                severity=Severity.ERROR,
            )
        return TokenKind.FOREIGN_IDENT, end, {"blocked": not verdict.accepted}

    def _number(self, start: int) -> tuple[TokenKind, int, dict]:
        text, n = self.text, len(self.text)
        end = start
        while end < n and text[end] in HEX_DIGITS:
            end += 1
        run = text[start:end]
        kind, base, malformed = TokenKind.INTEGER, "decimal", None
        if end < n and text[end] == "H":
            end += 1
            base = "hex"
        elif run.isdigit() and text.startswith(".", end) and not text.startswith("..", end):
            kind, base = TokenKind.REAL, None
            end += 1
            while end < n and text[end] in DIGITS:
                end += 1
            if end < n and text[end] == "E":
                exp = end + 1
                if exp < n and text[exp] in "+-":
                    exp += 1
                if exp < n and text[exp] in DIGITS:
                    end = exp
                    while end < n and text[end] in DIGITS:
                        end += 1
                else:
                    end = exp
                    malformed = "scale factor has no digits"
        elif run[-1] in "BC" and run[:-1].isdigit():
            kind = TokenKind.INTEGER if run[-1] == "B" else TokenKind.CHAR_CODE
            base = "octal" + run[-1]
            if not set(run[:-1]) <= OCTAL_DIGITS:
                malformed = "octal literal contains digit 8 or 9"
        elif not run.isdigit():
            malformed = "hex digits without 'H' suffix"
        if end < n and text[end] in _IDENT_CHARS:
            while end < n and text[end] in _IDENT_CHARS:
                end += 1
            malformed = malformed or "letters or digits directly after number"
        literal = text[start:end]
        if malformed:
            self.error("M2M-MALFORMED-LITERAL", start, end, f"malformed number '{literal}': {malformed}")
            return kind, end, {"base": base, "malformed": True}
        if base in ("octalB", "octalC"):
            return kind, end, {"base": base, "blocked": not self.config.octal_literals}
        return kind, end, {"base": base}

    def run(self) -> list[Token]:
        tokens: list[Token] = []
        prev: Token | None = None
        while True:
            trivia = tuple(self.scan_trivia())
            start = self.pos
            if start >= len(self.text):
                tokens.append(Token(TokenKind.EOF, "", self.span(start, start), trivia))
                return tokens
            kind, end, extra = self.scan_token(prev)
            token = Token(kind, self.text[start:end], self.span(start, end), trivia, **extra)
            tokens.append(token)
            prev = token
            self.pos = end


def tokenize(
    source: str,
    config: DialectConfig | None = None,
    file: str = "<input>",
) -> tuple[list[Token], list[Diagnostic]]:
    """Split ``source`` into tokens and collect lexical diagnostics.

    Offsets count characters; sources are expected to be 7-bit ASCII
    (read files as latin-1 to keep characters and bytes aligned).
    """
    from .rewrite import convert_octal_literal, synonym_edit

    scanner = _Scanner(source, config or DialectConfig(), file)
    tokens = scanner.run()
    for i, token in enumerate(tokens):
        if token.kind is TokenKind.SYNONYM:
            edit = synonym_edit(tokens, i)
            scanner.diagnostics.append(
                Diagnostic.for_facility(
                    "M2M-SYNONYM", FacilityId.SYNONYM_SYMBOLS, scanner.config, token.span,
                    f"synonym symbol '{token.text}', use '{SYNONYMS[token.text]}'",
                    file, suggested_edit=edit,
                )
            )
        elif token.base in ("octalB", "octalC") and not token.malformed:
            scanner.diagnostics.append(
                Diagnostic.for_facility(
                    "M2M-OCTAL", FacilityId.OCTAL_LITERALS, scanner.config, token.span,
                    f"octal literal '{token.text}'", file,
                    suggested_edit=convert_octal_literal(token),
                )
            )
    return tokens, scanner.diagnostics
