"""Canonical source rendering (4-space indent, braces everywhere)."""
from __future__ import annotations

from . import ast as A

_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_UNARY = 7
_ATOM = 8


def _prec(e) -> int:
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, (A.Unary, A.Cast)):
        return _UNARY
    if isinstance(e, A.IntLit) and e.value < 0:
        return _UNARY
    if isinstance(e, A.FloatLit) and e.value < 0:
        return _UNARY
    return _ATOM


def expr(e) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.FloatLit):
        return e.text or repr(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Index):
        return f"{e.name}[{expr(e.index)}]"
    if isinstance(e, A.Read):
        return "read()"
    if isinstance(e, A.Call):
        return f"{e.name}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.Cast):
        return f"({e.type}) {_wrap(e.operand, _UNARY)}"
    if isinstance(e, A.Unary):
        inner = _wrap(e.operand, _UNARY)
        if isinstance(e.operand, A.Unary) or inner.startswith("-"):
            inner = f"({expr(e.operand)})"
        return f"{e.op}{inner}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        left = _wrap(e.left, p)
        right = _wrap(e.right, p + 1)
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e, min_prec: int) -> str:
    text = expr(e)
    return f"({text})" if _prec(e) < min_prec else text


def _simple(s) -> str:
    if isinstance(s, A.Decl):
        text = f"{s.type} {s.name}"
        if s.size is not None:
            text += f"[{s.size}]"
        if s.init is not None:
            text += f" = {expr(s.init)}"
        return text
    if isinstance(s, A.Assign):
        return f"{expr(s.target)} = {expr(s.value)}"
    raise TypeError(f"not a simple statement: {s!r}")


def _block(b: A.Block, depth: int, out: list):
    for s in b.body:
        stmt(s, depth, out)


def stmt(s, depth: int, out: list):
    pad = "    " * depth
    if isinstance(s, (A.Decl, A.Assign)):
        out.append(f"{pad}{_simple(s)};")
    elif isinstance(s, A.Print):
        out.append(f"{pad}print({expr(s.value)});")
    elif isinstance(s, A.Break):
        out.append(f"{pad}break;")
    elif isinstance(s, A.Return):
        out.append(f"{pad}return;" if s.value is None else f"{pad}return {expr(s.value)};")
    elif isinstance(s, A.Empty):
        out.append(f"{pad};")
    elif isinstance(s, A.Block):
        out.append(f"{pad}{{")
        _block(s, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.If):
        out.append(f"{pad}if ({expr(s.cond)}) {{")
        _block(s.then, depth + 1, out)
        orelse = s.orelse
        while orelse is not None:
            if len(orelse.body) == 1 and isinstance(orelse.body[0], A.If):
                inner = orelse.body[0]
                out.append(f"{pad}}} else if ({expr(inner.cond)}) {{")
                _block(inner.then, depth + 1, out)
                orelse = inner.orelse
            else:
                out.append(f"{pad}}} else {{")
                _block(orelse, depth + 1, out)
                orelse = None
        out.append(f"{pad}}}")
    elif isinstance(s, A.While):
        out.append(f"{pad}while ({expr(s.cond)}) {{")
        _block(s.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.For):
        init = _simple(s.init) if s.init is not None else ""
        step = _simple(s.step) if s.step is not None else ""
        out.append(f"{pad}for ({init}; {expr(s.cond)}; {step}) {{")
        _block(s.body, depth + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def function(fn: A.Function) -> str:
    params = ", ".join(f"{p.type} {p.name}" for p in fn.params)
    out = [f"{fn.ret_type} {fn.name}({params}) {{"]
    _block(fn.body, 1, out)
    out.append("}")
    return "\n".join(out)


def render(program: A.Program) -> str:
    return "\n\n".join(function(f) for f in program.functions) + "\n"
