"""Tokenizer for the DSL subset.

Operates directly on UTF-8 bytes so token offsets are byte offsets.
Durations (`1s`, `2m`, `3h`, `1d`) are normalized to integer seconds
here, the only place unit suffixes exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import ParseError
from .source import LineIndex

__all__ = ["TokenKind", "Token", "tokenize", "KEYWORDS"]

KEYWORDS = frozenset({"bring", "let", "new", "inflight", "if", "return", "true", "false"})

DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}

PUNCT = {
    b"=>": "ARROW",
    b"{": "LBRACE",
    b"}": "RBRACE",
    b"(": "LPAREN",
    b")": "RPAREN",
    b"[": "LBRACKET",
    b"]": "RBRACKET",
    b",": "COMMA",
    b";": "SEMI",
    b":": "COLON",
    b"=": "EQ",
    b".": "DOT",
}

_ESCAPES = {ord('"'): '"', ord("\\"): "\\", ord("n"): "\n", ord("t"): "\t", ord("r"): "\r"}


class TokenKind(Enum):
    NAME = "name"
    KEYWORD = "keyword"
    STRING = "string"
    NUMBER = "number"
    DURATION = "duration"
    PUNCT = "punct"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    value: object
    start: int
    end: int

    @property
    def punct(self) -> str | None:
        return self.value if self.kind is TokenKind.PUNCT else None


def _is_name_start(b: int) -> bool:
    return 0x41 <= b <= 0x5A or 0x61 <= b <= 0x7A or b == 0x5F


def _is_name_char(b: int) -> bool:
    return _is_name_start(b) or 0x30 <= b <= 0x39


def tokenize(data: bytes, index: LineIndex | None = None) -> list[Token]:
    if index is None:
        index = LineIndex(data)
    tokens: list[Token] = []
    i = 0
    n = len(data)
    while i < n:
        b = data[i]
        if b in (0x20, 0x09, 0x0D, 0x0A):
            i += 1
            continue
        if b == 0x2F and i + 1 < n and data[i + 1] == 0x2F:
            while i < n and data[i] != 0x0A:
                i += 1
            continue
        if _is_name_start(b):
            j = i
            while j < n and _is_name_char(data[j]):
                j += 1
            text = data[i:j].decode("utf-8")
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.NAME
            tokens.append(Token(kind, text, text, i, j))
            i = j
            continue
        if 0x30 <= b <= 0x39:
            j = i
            while j < n and 0x30 <= data[j] <= 0x39:
                j += 1
            is_decimal = False
            if j < n and data[j] == 0x2E and j + 1 < n and 0x30 <= data[j + 1] <= 0x39:
                is_decimal = True
                j += 1
                while j < n and 0x30 <= data[j] <= 0x39:
                    j += 1
            if j < n and _is_name_start(data[j]):
                k = j
                while k < n and _is_name_char(data[k]):
                    k += 1
                unit = data[j:k].decode("utf-8")
                if is_decimal or unit not in DURATION_UNITS:
                    raise ParseError(
                        f"unknown duration unit {unit!r}",
                        span=index.span(i, k),
                        expected="one of s, m, h, d after an integer",
                        found=unit,
                    )
                seconds = int(data[i:j]) * DURATION_UNITS[unit]
                tokens.append(Token(TokenKind.DURATION, data[i:k].decode("utf-8"), seconds, i, k))
                i = k
                continue
            text = data[i:j].decode("utf-8")
            value: object = Fraction(text) if is_decimal else int(text)
            tokens.append(Token(TokenKind.NUMBER, text, value, i, j))
            i = j
            continue
        if b == 0x22:
            j = i + 1
            chars: list[str] = []
            while True:
                if j >= n:
                    raise ParseError(
                        "unterminated string literal",
                        span=index.span(i, n),
                        expected='closing "',
                        found="end of file",
                    )
                c = data[j]
                if c == 0x22:
                    j += 1
                    break
                if c == 0x5C:
                    if j + 1 >= n or data[j + 1] not in _ESCAPES:
                        raise ParseError(
                            "unsupported escape sequence",
                            span=index.span(j, min(j + 2, n)),
                            expected='one of \\" \\\\ \\n \\t \\r',
                            found=data[j : j + 2].decode("utf-8", "replace"),
                        )
                    chars.append(_ESCAPES[data[j + 1]])
                    j += 2
                    continue
                if c == 0x0A:
                    raise ParseError(
                        "newline inside string literal",
                        span=index.span(i, j),
                        expected='closing "',
                        found="newline",
                    )
                # Copy a full UTF-8 sequence so multi-byte characters survive.
                width = 1
                if c >= 0xF0:
                    width = 4
                elif c >= 0xE0:
                    width = 3
                elif c >= 0xC0:
                    width = 2
                chars.append(data[j : j + width].decode("utf-8"))
                j += width
            tokens.append(Token(TokenKind.STRING, data[i:j].decode("utf-8"), "".join(chars), i, j))
            i = j
            continue
        two = data[i : i + 2]
        if two in PUNCT:
            tokens.append(Token(TokenKind.PUNCT, two.decode(), two.decode(), i, i + 2))
            i += 2
            continue
        one = data[i : i + 1]
        if one in PUNCT:
            tokens.append(Token(TokenKind.PUNCT, one.decode(), one.decode(), i, i + 1))
            i += 1
            continue
        raise ParseError(
            f"unexpected character {chr(b)!r}",
            span=index.span(i, i + 1),
            expected="a token of the documented grammar",
            found=chr(b),
        )
    tokens.append(Token(TokenKind.EOF, "", None, n, n))
    return tokens
