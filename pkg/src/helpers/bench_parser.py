"""
Line reader for the `.bench` netlist dialect.

INPUT FORMAT:
-------------
One statement per line, `#` starts a comment:

INPUT(a)
OUTPUT(z)
q = DFF(d)
d = AND(a, q)
z = BUF(q)

Identifiers are [A-Za-z_][A-Za-z0-9_]*, keywords and gate kinds are
case-insensitive. This module only checks the line grammar and keeps the
1-based column of every token; name resolution, arity and cycle checks are
done by `src.netlist_core.parse_bench`.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

from src.helpers.errors import NetlistParseError, ParseErrorKind

DECLARATION_KEYWORDS = ("INPUT", "OUTPUT")
PUNCTUATION = "(),="


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" or one of PUNCTUATION
    text: str
    column: int


@dataclass(frozen=True)
class BenchStatement:
    line: int
    keyword: str  # INPUT / OUTPUT for declarations, the gate kind as written otherwise
    keyword_column: int
    target: str
    target_column: int
    args: Tuple[str, ...] = ()
    arg_columns: Tuple[int, ...] = ()
    is_declaration: bool = False


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("A" <= ch <= "Z") or ("a" <= ch <= "z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or ("0" <= ch <= "9")


def tokenize_line(text: str, line_no: int) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
        elif _is_ident_start(ch):
            start = pos
            while pos < len(text) and _is_ident_char(text[pos]):
                pos += 1
            tokens.append(Token("ident", text[start:pos], start + 1))
        elif ch in PUNCTUATION:
            tokens.append(Token(ch, ch, pos + 1))
            pos += 1
        else:
            raise NetlistParseError(
                ParseErrorKind.syntax, f"unexpected character {ch!r}", line_no, pos + 1
            )
    return tokens


class _LineCursor:
    def __init__(self, tokens: List[Token], line_no: int, end_column: int):
        self.tokens = tokens
        self.line_no = line_no
        self.end_column = end_column
        self.pos = 0

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def expect(self, kind: str, what: str) -> Token:
        token = self.peek()
        if token is None:
            raise NetlistParseError(
                ParseErrorKind.syntax, f"expected {what} before end of line", self.line_no, self.end_column
            )
        if token.kind != kind:
            raise NetlistParseError(
                ParseErrorKind.syntax, f"expected {what}, found {token.text!r}", self.line_no, token.column
            )
        self.pos += 1
        return token

    def expect_end(self):
        token = self.peek()
        if token is not None:
            raise NetlistParseError(
                ParseErrorKind.syntax, f"unexpected {token.text!r} after statement", self.line_no, token.column
            )


def parse_statement(text: str, line_no: int) -> Optional[BenchStatement]:
    code = text.split("#", 1)[0]
    tokens = tokenize_line(code, line_no)
    if not tokens:
        return None
    cursor = _LineCursor(tokens, line_no, len(code.rstrip()) + 1)
    head = cursor.expect("ident", "a name or INPUT/OUTPUT")
    follow = cursor.peek()

    if follow is not None and follow.kind == "(":
        if head.text.upper() not in DECLARATION_KEYWORDS:
            raise NetlistParseError(
                ParseErrorKind.syntax, "expected '=' after cell name", line_no, follow.column
            )
        cursor.expect("(", "'('")
        name = cursor.expect("ident", "a signal name")
        cursor.expect(")", "')'")
        cursor.expect_end()
        return BenchStatement(
            line_no, head.text.upper(), head.column, name.text, name.column, is_declaration=True
        )

    cursor.expect("=", "'='")
    kind = cursor.expect("ident", "a gate kind")
    cursor.expect("(", "'('")
    args, columns = [], []
    if cursor.peek() is not None and cursor.peek().kind == ")":
        cursor.expect(")", "')'")
    else:
        while True:
            arg = cursor.expect("ident", "a fan-in name")
            args.append(arg.text)
            columns.append(arg.column)
            closing = cursor.peek()
            if closing is not None and closing.kind == ",":
                cursor.pos += 1
                continue
            cursor.expect(")", "',' or ')'")
            break
    cursor.expect_end()
    return BenchStatement(
        line_no, kind.text, kind.column, head.text, head.column, tuple(args), tuple(columns)
    )


def parse_bench_statements(text: str) -> List[BenchStatement]:
    """
    Tokenize every line and return the statements in file order.
    Blank and comment-only lines are skipped.
    """
    statements = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        statement = parse_statement(line, line_no)
        if statement is not None:
            statements.append(statement)
    return statements
