"""Lexer for the MiniPy subset language.

MiniPy is indentation-structured like Python but closed: identifiers,
integer literals, nine keywords, and a fixed operator set.  Indentation is
exactly four spaces per level.  The lexer synthesizes Newline, Indent,
Dedent, and Eof tokens so the parser never looks at whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError

# --- token kinds -----------------------------------------------------------

KEYWORDS = frozenset(
    {"def", "if", "elif", "else", "while", "for", "in", "return", "import"}
)

# longest-match first
OPERATORS = ("<=", ">=", "==", "!=", "<", ">", "=", "+", "-", "*", "(", ")", ":", ",", ".")

INDENT_WIDTH = 4


@dataclass(frozen=True)
class Token:
    kind: str  # Keyword | Ident | Int | Operator | Newline | Indent | Dedent | Eof
    text: str
    line: int  # 1-based
    col: int  # 1-based

    def __repr__(self) -> str:  # compact for test failure output
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def _lex_line(text: str, line_no: int, start_col: int, out: list[Token]) -> None:
    """Lex one physical line's content (indentation already consumed)."""
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        col = start_col + i
        if ch == " ":
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "Keyword" if word in KEYWORDS else "Ident"
            out.append(Token(kind, word, line_no, col))
            i = j
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            out.append(Token("Int", text[i:j], line_no, col))
            i = j
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                out.append(Token("Operator", op, line_no, col))
                i += len(op)
                break
        else:
            raise LexError(f"illegal character {ch!r}", line_no, col)


def tokenize(source: str) -> list[Token]:
    """Tokenize MiniPy source into a stream ending with Eof.

    Blank lines produce no tokens.  Raises LexError on illegal characters,
    tabs in indentation, or indentation that is not a multiple of four
    spaces aligned with the enclosing block structure.
    """
    tokens: list[Token] = []
    indent_stack = [0]
    lines = source.split("\n")
    last_line_no = 0
    for line_no, raw in enumerate(lines, start=1):
        if raw.strip() == "":
            continue
        last_line_no = line_no
        # measure indentation (spaces only)
        i = 0
        while i < len(raw) and raw[i] == " ":
            i += 1
        if i < len(raw) and raw[i] == "\t":
            raise LexError("tab in indentation", line_no, i + 1)
        if i % INDENT_WIDTH != 0:
            raise LexError(
                f"indentation of {i} spaces is not a multiple of {INDENT_WIDTH}",
                line_no,
                1,
            )
        level = i // INDENT_WIDTH
        current = indent_stack[-1]
        if level == current + 1:
            indent_stack.append(level)
            tokens.append(Token("Indent", "", line_no, 1))
        elif level > current + 1:
            raise LexError("indentation jumps more than one level", line_no, 1)
        else:
            while indent_stack[-1] > level:
                indent_stack.pop()
                tokens.append(Token("Dedent", "", line_no, 1))
            if indent_stack[-1] != level:
                raise LexError("dedent to unknown indentation level", line_no, 1)
        _lex_line(raw[i:], line_no, i + 1, tokens)
        tokens.append(Token("Newline", "\n", line_no, len(raw) + 1))
    end_line = last_line_no + 1 if last_line_no else 1
    while len(indent_stack) > 1:
        indent_stack.pop()
        tokens.append(Token("Dedent", "", end_line, 1))
    tokens.append(Token("Eof", "", end_line, 1))
    return tokens
