from __future__ import annotations


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


class UnsupportedFeature(Exception):
    """Construct outside the language subset (goto, pointers, recursion, ...)."""


class MiniRuntimeError(Exception):
    """Read past end of input, division by zero, out-of-bounds index."""


class Nontermination(Exception):
    """Step budget exhausted."""
