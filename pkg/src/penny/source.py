"""Source files and byte spans.

All offsets are byte offsets into the UTF-8 encoding of the text, with
1-based line/column positions computed over the same bytes. Byte
addressing keeps spans stable under any later re-encoding and makes
splicing edits trivial.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

__all__ = ["Span", "SourceFile", "LineIndex"]


@dataclass(frozen=True)
class Span:
    start_byte: int
    end_byte: int
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if self.start_byte > self.end_byte:
            raise ValueError(f"span start {self.start_byte} after end {self.end_byte}")

    def contains(self, other: "Span") -> bool:
        return self.start_byte <= other.start_byte and other.end_byte <= self.end_byte

    def to_doc(self) -> dict:
        return {
            "start": self.start_byte,
            "end": self.end_byte,
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


class LineIndex:
    """Maps byte offsets to 1-based (line, col) pairs."""

    def __init__(self, data: bytes) -> None:
        self._starts = [0]
        for i, b in enumerate(data):
            if b == 0x0A:
                self._starts.append(i + 1)

    def position(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self._starts, offset) - 1
        return line + 1, offset - self._starts[line] + 1

    def span(self, start: int, end: int) -> Span:
        sl, sc = self.position(start)
        el, ec = self.position(end)
        return Span(start, end, sl, sc, el, ec)


@dataclass(frozen=True)
class SourceFile:
    text: str
    path: str | None = None
    version: int = 1
    data: bytes = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", self.text.encode("utf-8"))

    def slice(self, span: Span) -> str:
        return self.data[span.start_byte : span.end_byte].decode("utf-8")
