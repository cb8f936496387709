"""Source positions and text edits."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .policy import FacilityId


@dataclass(frozen=True, order=True)
class SourceSpan:
    """Half-open ``[start, end)`` offset range plus 1-based line/column of both ends."""

    start: int
    end: int
    line: int = 1
    col: int = 1
    end_line: int = 1
    end_col: int = 1

    def __len__(self) -> int:
        return self.end - self.start

    def overlaps(self, other: SourceSpan) -> bool:
        if self.start == self.end or other.start == other.end:
            # an insertion point only conflicts with a span strictly containing it
            if self.start == self.end == other.start == other.end:
                return True
            point, span = (self, other) if self.start == self.end else (other, self)
            return span.start < point.start < span.end
        return self.start < other.end and other.start < self.end


class LineMap:
    """Offset to line/column conversion for one source text."""

    def __init__(self, text: str) -> None:
        self.text = text
        self._starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self._starts.append(i + 1)

    def position(self, offset: int) -> tuple[int, int]:
        index = bisect.bisect_right(self._starts, offset) - 1
        return index + 1, offset - self._starts[index] + 1

    def span(self, start: int, end: int) -> SourceSpan:
        line, col = self.position(start)
        end_line, end_col = self.position(end)
        return SourceSpan(start, end, line, col, end_line, end_col)


@dataclass(frozen=True)
class Edit:
    """Replace the text under ``span`` with ``replacement``."""

    span: SourceSpan
    replacement: str
    facility: FacilityId | None = None
    note: str = ""
