"""Line-oriented lexer and classifier for the Python subset we convert.

The rule engine works strictly line by line, so there is no grammar
here: each physical line is tokenized on its own and classified by a
fixed decision table (leading keyword, then top-level assignment
operator, then call shape). Block structure comes from indentation,
fixed at 4 spaces per level with tabs expanded first.

Out of scope by design: multi-line statements (backslash or open
brackets), triple-quoted strings, decorators. Lines using them still
tokenize and fall out as OTHER — rule coverage is bounded, not the
lexer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

INDENT_UNIT = 4


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    NUMBER = "number"
    STRING = "string"
    OPERATOR = "operator"
    DELIMITER = "delimiter"
    COMMENT = "comment"


class LineKind(Enum):
    FUNC_DEF = "func_def"
    IF = "if"
    ELIF = "elif"
    ELSE = "else"
    FOR = "for"
    WHILE = "while"
    RETURN = "return"
    ASSIGN = "assign"
    AUG_ASSIGN = "aug_assign"
    CALL = "call"
    PRINT = "print"
    IMPORT = "import"
    COMMENT = "comment"
    BLANK = "blank"
    OTHER = "other"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    column: int  # 0-based start column


@dataclass(frozen=True)
class LineNode:
    line_no: int  # 1-based
    depth: int
    kind: LineKind
    tokens: tuple[Token, ...]
    raw: str


class LexError(ValueError):
    """Unlexable text; carries the 0-based column (and line when known)."""

    def __init__(self, message: str, column: int, line_no: int | None = None):
        super().__init__(message)
        self.column = column
        self.line_no = line_no


class IndentError(ValueError):
    """Indentation that breaks the 4-space block discipline."""

    def __init__(self, message: str, line_no: int):
        super().__init__(message)
        self.line_no = line_no


KEYWORDS = frozenset(
    """
    def return if elif else for while in and or not is import from as
    pass break continue with try except finally raise class lambda
    yield global nonlocal del assert True False None
    """.split()
)

# Longest first so e.g. ** wins over *.
_OPERATORS = sorted(
    [
        "**=", "//=", ">>=", "<<=",
        "==", "!=", "<=", ">=", "->", "+=", "-=", "*=", "/=", "%=",
        "&=", "|=", "^=", "**", "//", "<<", ">>",
        "=", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", "~", "@",
    ],
    key=len,
    reverse=True,
)

_DELIMITERS = frozenset("()[]{},:.;")

AUG_ASSIGN_OPS = frozenset(
    ["+=", "-=", "*=", "/=", "//=", "%=", "**=", "&=", "|=", "^=", ">>=", "<<="]
)

_KEYWORD_LINE_KINDS = {
    "def": LineKind.FUNC_DEF,
    "if": LineKind.IF,
    "elif": LineKind.ELIF,
    "else": LineKind.ELSE,
    "for": LineKind.FOR,
    "while": LineKind.WHILE,
    "return": LineKind.RETURN,
    "import": LineKind.IMPORT,
    "from": LineKind.IMPORT,
}


def lex_line(text: str, line_no: int | None = None) -> list[Token]:
    """Tokenize one physical line (which must contain no newline).

    String literals stay single tokens, quotes included. A ``#`` starts
    a COMMENT token running to the end of the line. Unterminated
    strings raise LexError naming the opening quote's column.
    """
    if "\n" in text or "\r" in text:
        raise ValueError("lex_line expects a single line without newlines")
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            tokens.append(Token(TokenKind.COMMENT, text[i:], i))
            break
        if ch in "\"'":
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == ch:
                    break
                j += 1
            if j >= n:
                raise LexError(
                    f"unterminated string literal at column {i}", i, line_no
                )
            tokens.append(Token(TokenKind.STRING, text[i : j + 1], i))
            i = j + 1
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            tokens.append(Token(TokenKind.NUMBER, text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, i))
            i = j
            continue
        if ch in _DELIMITERS:
            tokens.append(Token(TokenKind.DELIMITER, ch, i))
            i += 1
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token(TokenKind.OPERATOR, op, i))
                i += len(op)
                break
        else:
            # Unknown character: lex it as a one-char operator so odd
            # constructs still flow through and classify as OTHER.
            tokens.append(Token(TokenKind.OPERATOR, ch, i))
            i += 1
    return tokens


def classify_line(tokens: Sequence[Token]) -> LineKind:
    """Map a token sequence to its LineKind. Total and deterministic.

    Decision order: leading-keyword table, then a top-level assignment
    operator scan, then call detection, else OTHER.
    """
    if not tokens:
        return LineKind.BLANK
    first = tokens[0]
    if first.kind is TokenKind.COMMENT:
        return LineKind.COMMENT
    if first.kind is TokenKind.KEYWORD:
        kind = _KEYWORD_LINE_KINDS.get(first.text)
        if kind is not None:
            return kind

    depth = 0
    for tok in tokens:
        if tok.kind is TokenKind.DELIMITER:
            if tok.text in "([{":
                depth += 1
            elif tok.text in ")]}":
                depth -= 1
        elif tok.kind is TokenKind.OPERATOR and depth == 0:
            if tok.text == "=":
                return LineKind.ASSIGN
            if tok.text in AUG_ASSIGN_OPS:
                return LineKind.AUG_ASSIGN

    if first.kind is TokenKind.IDENT:
        # Allow dotted names before the call parenthesis.
        j = 1
        while (
            j + 1 < len(tokens)
            and tokens[j].kind is TokenKind.DELIMITER
            and tokens[j].text == "."
            and tokens[j + 1].kind is TokenKind.IDENT
        ):
            j += 2
        if (
            j < len(tokens)
            and tokens[j].kind is TokenKind.DELIMITER
            and tokens[j].text == "("
        ):
            return LineKind.PRINT if first.text == "print" and j == 1 else LineKind.CALL
    return LineKind.OTHER


def parse_program(source: str) -> list[LineNode]:
    """Tokenize and classify every physical line, computing block depth.

    Depth is leading-indent width divided by the 4-space unit; tabs are
    expanded to 4 first. Blank and comment lines inherit the previous
    code line's depth. A width that is not a multiple of 4, or a jump
    of more than one level, raises IndentError with the line number.
    """
    nodes: list[LineNode] = []
    prev_code_depth = 0
    for line_no, raw in enumerate(source.splitlines(), start=1):
        line = raw.expandtabs(INDENT_UNIT)
        stripped = line.strip()
        if not stripped:
            nodes.append(
                LineNode(line_no, prev_code_depth, LineKind.BLANK, (), raw)
            )
            continue
        if stripped.startswith("#"):
            tokens = tuple(lex_line(line, line_no))
            nodes.append(
                LineNode(line_no, prev_code_depth, LineKind.COMMENT, tokens, raw)
            )
            continue
        width = len(line) - len(line.lstrip(" "))
        if width % INDENT_UNIT != 0:
            raise IndentError(
                f"bad indent at line {line_no}: {width} spaces is not a "
                f"multiple of {INDENT_UNIT}",
                line_no,
            )
        depth = width // INDENT_UNIT
        if depth > prev_code_depth + 1:
            raise IndentError(
                f"bad indent at line {line_no}: jump from depth "
                f"{prev_code_depth} to {depth}",
                line_no,
            )
        try:
            tokens = tuple(lex_line(line, line_no))
        except LexError as exc:
            raise LexError(f"line {line_no}: {exc}", exc.column, line_no) from None
        kind = classify_line(tokens)
        nodes.append(LineNode(line_no, depth, kind, tokens, raw))
        prev_code_depth = depth
    return nodes
