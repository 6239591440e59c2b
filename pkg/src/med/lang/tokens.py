"""Tokenizer for the model language.

Keywords are case-insensitive; identifiers are case-sensitive.  Comments
(``/* ... */`` and ``// ...``) are skipped but collected so the printer can
keep a model's header block.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, SpecError

KEYWORDS = {
    "SYSTEM", "SETS", "CONSTANTS", "PROPERTIES", "VARIABLES", "INVARIANT",
    "INITIALISATION", "EVENTS", "END", "ANY", "WHERE", "THEN", "SELECT",
    "LET", "BE", "IN", "OR", "NOT", "TRUE", "FALSE", "FUNCTIONAL",
    "DOM", "RAN",
}

# Longest first so e.g. "<->" is not read as "<" "-" ">".
SYMBOLS = [
    "|->", "+->", "<->", "<<|", "<+", "<:", "/:", "/\\", "\\/", ":=",
    "..", "||", "=>", "/=", "<=", ">=", "~", "[", "]", "{", "}", "(",
    ")", ",", ".", ":", "&", "|", "-", "*", "+", "=", "<", ">", "#",
    "!", ";",
]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | KW | OP | EOF
    value: str
    line: int
    col: int


@dataclass(frozen=True)
class Comment:
    text: str
    line: int


def tokenize(text: str) -> tuple[list[Token], list[Comment]]:
    tokens: list[Token] = []
    comments: list[Comment] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def bump(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            bump(1)
            continue
        if text.startswith("/*", i):
            start_line = line
            end = text.find("*/", i + 2)
            if end < 0:
                raise SpecError(
                    [Diagnostic("error", "unterminated comment", line, col, "E001")]
                )
            comments.append(Comment(text[i : end + 2], start_line))
            bump(end + 2 - i)
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            end = n if end < 0 else end
            comments.append(Comment(text[i:end], line))
            bump(end - i)
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # Don't swallow the dots of "0..2".
            tokens.append(Token("INT", text[i:j], line, col))
            bump(j - i)
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word.upper() in KEYWORDS:
                tokens.append(Token("KW", word.upper(), line, col))
            else:
                tokens.append(Token("IDENT", word, line, col))
            bump(j - i)
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("OP", sym, line, col))
                bump(len(sym))
                break
        else:
            raise SpecError(
                [Diagnostic("error", f"unexpected character {c!r}", line, col, "E002")]
            )
    tokens.append(Token("EOF", "", line, col))
    return tokens, comments
