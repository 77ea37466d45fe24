"""Minimal S-expression reader for solver replies."""
from __future__ import annotations

import re

_TOKEN = re.compile(r'\s*(?:(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()"|]+))')


class SexprError(ValueError):
    pass


def parse_all(text: str) -> list:
    out = []
    stack = [out]
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SexprError(f"bad s-expression near {text[pos:pos + 30]!r}")
        pos = m.end()
        lp, rp, string, quoted, atom = m.groups()
        if lp:
            stack.append([])
        elif rp:
            if len(stack) == 1:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        elif string is not None:
            stack[-1].append(string)
        elif quoted is not None:
            stack[-1].append(quoted[1:-1])
        else:
            stack[-1].append(atom)
    if len(stack) != 1:
        raise SexprError("unbalanced '('")
    return out


def parse_one(text: str):
    items = parse_all(text)
    if len(items) != 1:
        raise SexprError(f"expected one s-expression, got {len(items)}")
    return items[0]


def balanced(text: str) -> bool:
    """True when every '(' outside strings has been closed."""
    depth = 0
    in_string = False
    for ch in text:
        if in_string:
            if ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
    return depth <= 0 and not in_string
