"""Static checks and expression typing."""
from __future__ import annotations

from . import ast as A
from .errors import ParseError, UnsupportedFeature


def _err(node: A.Node, message: str) -> ParseError:
    line, col = node.pos
    return ParseError(message, line, col)


def expr_type(e: A.Node, env: dict, functions: dict | None = None) -> str:
    """One of ``int``, ``float`` or ``bool``.  ``env`` maps names to VarInfo."""
    if isinstance(e, A.IntLit):
        return "int"
    if isinstance(e, A.FloatLit):
        return "float"
    if isinstance(e, A.BoolLit):
        return "bool"
    if isinstance(e, A.Var):
        return env[e.name].type
    if isinstance(e, A.Index):
        return "int"
    if isinstance(e, A.Read):
        return "int"
    if isinstance(e, A.Cast):
        return e.type
    if isinstance(e, A.Call):
        return functions[e.name].ret_type if functions else "int"
    if isinstance(e, A.Unary):
        if e.op == "!":
            return "bool"
        t = expr_type(e.operand, env, functions)
        return "int" if t == "bool" else t
    if isinstance(e, A.Binary):
        if e.op in ("&&", "||", "<", "<=", ">", ">=", "==", "!="):
            return "bool"
        lt = expr_type(e.left, env, functions)
        rt = expr_type(e.right, env, functions)
        return "float" if "float" in (lt, rt) else "int"
    raise TypeError(f"not an expression: {e!r}")


class _FunctionChecker:
    def __init__(self, fn: A.Function, known: dict):
        self.fn = fn
        self.known = known
        self.info = {}
        self.scopes = [set()]
        self.loop_depth = 0

    def declare(self, node, name, info):
        if name in self.info:
            old = self.info[name]
            # a closed scope's name may be reused with the same type; storage is shared
            if not self.visible(name) and (old.type, old.size) == (info.type, info.size):
                self.scopes[-1].add(name)
                return
            raise UnsupportedFeature(
                f"redeclaration or shadowing of {name!r} at {node.pos[0]}:{node.pos[1]}")
        if name in ("ret", "__out", "__cur", "__in"):
            raise _err(node, f"reserved name {name!r}")
        self.info[name] = info
        self.scopes[-1].add(name)

    def visible(self, name):
        return any(name in s for s in self.scopes)

    def run(self):
        for p in self.fn.params:
            self.declare(p, p.name, A.VarInfo(p.name, p.type, None, True))
        self.block(self.fn.body, new_scope=False)

    def block(self, b: A.Block, new_scope=True):
        if new_scope:
            self.scopes.append(set())
        for s in b.body:
            self.stmt(s)
        if new_scope:
            self.scopes.pop()

    def stmt(self, s):
        if isinstance(s, A.Decl):
            if s.init is not None:
                self.expr(s.init, top=True)
            self.declare(s, s.name, A.VarInfo(s.name, s.type, s.size))
        elif isinstance(s, A.Assign):
            self.target(s.target)
            self.expr(s.value, top=True)
        elif isinstance(s, A.Print):
            self.expr(s.value)
        elif isinstance(s, A.Block):
            self.block(s)
        elif isinstance(s, A.If):
            self.expr(s.cond)
            self.block(s.then)
            if s.orelse is not None:
                self.block(s.orelse)
        elif isinstance(s, A.While):
            self.expr(s.cond)
            self.loop_depth += 1
            self.block(s.body)
            self.loop_depth -= 1
        elif isinstance(s, A.For):
            self.scopes.append(set())
            if s.init is not None:
                self.stmt(s.init)
            self.expr(s.cond)
            self.loop_depth += 1
            self.block(s.body)
            self.loop_depth -= 1
            if s.step is not None:
                self.stmt(s.step)
            self.scopes.pop()
        elif isinstance(s, A.Break):
            if not self.loop_depth:
                raise _err(s, "break outside a loop")
        elif isinstance(s, A.Return):
            if s.value is None and self.fn.ret_type != "void":
                raise _err(s, "missing return value")
            if s.value is not None:
                if self.fn.ret_type == "void":
                    raise _err(s, "return value in a void function")
                self.expr(s.value)
        elif isinstance(s, A.Empty):
            pass
        else:
            raise UnsupportedFeature(f"statement {type(s).__name__}")

    def target(self, t):
        if not self.visible(t.name):
            raise _err(t, f"undeclared variable {t.name!r}")
        info = self.info[t.name]
        if isinstance(t, A.Var) and info.is_array:
            raise _err(t, f"cannot assign whole array {t.name!r}")
        if isinstance(t, A.Index):
            if not info.is_array:
                raise _err(t, f"{t.name!r} is not an array")
            self.expr(t.index)

    def expr(self, e, top=False):
        if isinstance(e, A.Read):
            if not top:
                raise UnsupportedFeature(
                    f"read() nested inside an expression at {e.pos[0]}:{e.pos[1]}")
            return
        if isinstance(e, (A.Var, A.Index)):
            if not self.visible(e.name):
                raise _err(e, f"undeclared variable {e.name!r}")
            info = self.info[e.name]
            if isinstance(e, A.Var) and info.is_array:
                raise _err(e, f"array {e.name!r} used as a scalar")
            if isinstance(e, A.Index):
                if not info.is_array:
                    raise _err(e, f"{e.name!r} is not an array")
                self.expr(e.index)
            return
        if isinstance(e, A.Call):
            if e.name == self.fn.name:
                raise UnsupportedFeature(f"recursive call to {e.name!r}")
            if e.name not in self.known:
                raise _err(e, f"call to undefined function {e.name!r} (define callees first)")
            callee = self.known[e.name]
            if callee.ret_type == "void":
                raise _err(e, f"void function {e.name!r} used as a value")
            if len(callee.params) != len(e.args):
                raise _err(e, f"wrong number of arguments to {e.name!r}")
            for a in e.args:
                self.expr(a)
            return
        for child in e.children():
            self.expr(child)
        if isinstance(e, A.Binary) and e.op == "%":
            env = self.info
            if "float" in (expr_type(e.left, env), expr_type(e.right, env)):
                raise _err(e, "'%' needs integer operands")


def check_program(program: A.Program) -> None:
    known = {}
    for fn in program.functions:
        if fn.name in known:
            raise ParseError(f"duplicate function {fn.name!r}", *fn.pos)
        _FunctionChecker(fn, known).run()
        known[fn.name] = fn
    for fn in program.functions:
        for node in fn.body.walk():
            if isinstance(node, A.Call) and _does_io(known[node.name], known):
                raise UnsupportedFeature(
                    f"call to {node.name!r}, which performs input/output")


def _does_io(fn: A.Function, known: dict) -> bool:
    for node in fn.body.walk():
        if isinstance(node, (A.Read, A.Print)):
            return True
        if isinstance(node, A.Call) and _does_io(known[node.name], known):
            return True
    return False
