"""Recursive-descent parser for the teaching language.

Compound assignments and increments are desugared on the way in
(``i++`` becomes ``i = i + 1``), so the pretty-printer always emits the
canonical long form.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import ast as A
from .errors import ParseError, UnsupportedFeature

KEYWORDS = {
    "int", "float", "void", "if", "else", "while", "for", "break", "return",
    "print", "read", "true", "false",
}
UNSUPPORTED_WORDS = {
    "goto": "goto", "continue": "continue", "do": "do-while", "switch": "switch",
    "case": "switch", "char": "char type", "double": "double type",
    "long": "long type", "struct": "struct", "unsigned": "unsigned type",
    "scanf": "scanf (use read())", "printf": "printf (use print())",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|//[^\n]*|/\*.*?\*/)
  | (?P<nl>\n)
  | (?P<floatlit>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<intlit>\d+)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>\+\+|--|\+=|-=|\*=|/=|%=|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}\[\];,&#?:])
""", re.VERBOSE | re.DOTALL)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(source):
        m = _TOKEN.match(source, i)
        if not m:
            raise ParseError(f"unexpected character {source[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ws":
            if "\n" in text:
                line += text.count("\n")
                line_start = i + text.rindex("\n") + 1
        elif kind == "string":
            raise UnsupportedFeature(f"string literal at {line}:{col}")
        else:
            if kind == "name" and text in KEYWORDS:
                kind = text
            elif kind == "op":
                kind = text
            tokens.append(Token(kind, text, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)
_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0
        self._nid = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, *kinds) -> bool:
        return self.tok.kind in kinds

    def accept(self, kind: str) -> Optional[Token]:
        if self.tok.kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail(f"expected {kind!r}, found {self.tok.text or 'end of input'!r}", (kind,))
        return self.advance()

    def fail(self, message: str, expected=()):
        t = self.tok
        if t.kind == "name" and t.text in UNSUPPORTED_WORDS:
            raise UnsupportedFeature(f"{UNSUPPORTED_WORDS[t.text]} at {t.line}:{t.col}")
        raise ParseError(message, t.line, t.col, expected)

    def node(self, cls, tok: Token, *args, **kw):
        self._nid += 1
        return cls(*args, nid=self._nid, pos=(tok.line, tok.col), **kw)

    def check_unsupported(self):
        t = self.tok
        if t.kind == "name" and t.text in UNSUPPORTED_WORDS:
            raise UnsupportedFeature(f"{UNSUPPORTED_WORDS[t.text]} at {t.line}:{t.col}")
        if t.kind in ("&", "#", "?", ":"):
            raise UnsupportedFeature(f"operator {t.text!r} at {t.line}:{t.col}")

    # top level

    def program(self) -> A.Program:
        start = self.tok
        functions = []
        while not self.at("eof"):
            functions.append(self.function())
        if not functions:
            self.fail("expected a function definition", ("int", "float", "void"))
        return self.node(A.Program, start, tuple(functions))

    def function(self) -> A.Function:
        self.check_unsupported()
        start = self.tok
        if not self.at("int", "float", "void"):
            self.fail("expected a return type", ("int", "float", "void"))
        ret_type = self.advance().kind
        if self.at("*"):
            raise UnsupportedFeature(f"pointer at {self.tok.line}:{self.tok.col}")
        name = self.expect("name").text
        self.expect("(")
        params = []
        if self.at("void") and self.peek().kind == ")":
            self.advance()
        elif not self.at(")"):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
        self.expect(")")
        body = self.block()
        return self.node(A.Function, start, ret_type, name, tuple(params), body)

    def param(self) -> A.Param:
        self.check_unsupported()
        start = self.tok
        if not self.at("int", "float"):
            self.fail("expected a parameter type", ("int", "float"))
        type_ = self.advance().kind
        if self.at("*"):
            raise UnsupportedFeature(f"pointer parameter at {self.tok.line}:{self.tok.col}")
        name = self.expect("name").text
        if self.at("["):
            raise UnsupportedFeature(f"array parameter at {self.tok.line}:{self.tok.col}")
        return self.node(A.Param, start, type_, name)

    # statements

    def block(self) -> A.Block:
        start = self.expect("{")
        body = []
        while not self.at("}"):
            if self.at("eof"):
                self.fail("expected '}'", ("}",))
            body.extend(self.statement())
        self.advance()
        return self.node(A.Block, start, tuple(body))

    def as_block(self, stmts: list, tok: Token) -> A.Block:
        if len(stmts) == 1 and isinstance(stmts[0], A.Block):
            return stmts[0]
        return self.node(A.Block, tok, tuple(stmts))

    def statement(self) -> list:
        self.check_unsupported()
        t = self.tok
        k = t.kind
        if k == ";":
            self.advance()
            return [self.node(A.Empty, t)]
        if k == "{":
            return [self.block()]
        if k in ("int", "float"):
            decls = self.declaration()
            self.expect(";")
            return decls
        if k == "void":
            self.fail("unexpected 'void'")
        if k == "if":
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.as_block(self.statement(), self.tok)
            orelse = None
            if self.accept("else"):
                orelse = self.as_block(self.statement(), self.tok)
            return [self.node(A.If, t, cond, then, orelse)]
        if k == "while":
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            body = self.as_block(self.statement(), self.tok)
            return [self.node(A.While, t, cond, body)]
        if k == "for":
            return [self.for_statement()]
        if k == "break":
            self.advance()
            self.expect(";")
            return [self.node(A.Break, t)]
        if k == "return":
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return [self.node(A.Return, t, value)]
        if k == "print":
            self.advance()
            self.expect("(")
            value = self.expr()
            self.expect(")")
            self.expect(";")
            return [self.node(A.Print, t, value)]
        stmt = self.simple()
        self.expect(";")
        return [stmt]

    def for_statement(self) -> A.For:
        t = self.advance()
        self.expect("(")
        init = None
        if self.at("int", "float"):
            decls = self.declaration()
            if len(decls) != 1:
                raise UnsupportedFeature(f"multiple declarations in for-init at {t.line}:{t.col}")
            init = decls[0]
        elif not self.at(";"):
            init = self.simple()
        self.expect(";")
        cond = self.node(A.BoolLit, self.tok, True) if self.at(";") else self.expr()
        self.expect(";")
        step = None if self.at(")") else self.simple()
        self.expect(")")
        body = self.as_block(self.statement(), self.tok)
        return self.node(A.For, t, init, cond, step, body)

    def declaration(self) -> list:
        type_ = self.advance().kind
        decls = [self.declarator(type_)]
        while self.accept(","):
            decls.append(self.declarator(type_))
        return decls

    def declarator(self, type_: str) -> A.Decl:
        if self.at("*"):
            raise UnsupportedFeature(f"pointer at {self.tok.line}:{self.tok.col}")
        t = self.expect("name")
        size = None
        if self.accept("["):
            if type_ != "int":
                raise UnsupportedFeature(f"non-integer array at {t.line}:{t.col}")
            size_tok = self.expect("intlit")
            size = int(size_tok.text)
            if size <= 0:
                raise ParseError("array size must be positive", size_tok.line, size_tok.col)
            self.expect("]")
            if self.at("["):
                raise UnsupportedFeature(f"multi-dimensional array at {t.line}:{t.col}")
        init = None
        if self.accept("="):
            if size is not None:
                raise UnsupportedFeature(f"array initializer at {t.line}:{t.col}")
            init = self.expr()
        return self.node(A.Decl, t, type_, t.text, size, init)

    def simple(self) -> A.Assign:
        t = self.tok
        if self.at("++", "--"):
            op = self.advance().kind
            target = self.target()
            return self.node(A.Assign, t, target, self._bump(target, op, t))
        if not self.at("name"):
            self.fail("expected a statement", ("name",))
        if self.peek().kind == "(":
            raise UnsupportedFeature(f"call used as a statement at {t.line}:{t.col}")
        target = self.target()
        if self.at("++", "--"):
            op = self.advance().kind
            return self.node(A.Assign, t, target, self._bump(target, op, t))
        if self.at(*_COMPOUND):
            op = _COMPOUND[self.advance().kind]
            rhs = self.expr()
            return self.node(A.Assign, t, target, self.node(A.Binary, t, op, self._copy(target, t), rhs))
        self.expect("=")
        return self.node(A.Assign, t, target, self.expr())

    def target(self):
        t = self.expect("name")
        if self.accept("["):
            index = self.expr()
            self.expect("]")
            return self.node(A.Index, t, t.text, index)
        return self.node(A.Var, t, t.text)

    def _copy(self, target, t):
        if isinstance(target, A.Var):
            return self.node(A.Var, t, target.name)
        return self.node(A.Index, t, target.name, target.index)

    def _bump(self, target, op, t):
        one = self.node(A.IntLit, t, 1)
        return self.node(A.Binary, t, "+" if op == "++" else "-", self._copy(target, t), one)

    # expressions

    def expr(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.at(*_BINARY_LEVELS[level]):
            t = self.advance()
            right = self.expr(level + 1)
            left = self.node(A.Binary, t, t.kind, left, right)
        return left

    def unary(self):
        self.check_unsupported()
        t = self.tok
        if self.at("-", "!"):
            self.advance()
            return self.node(A.Unary, t, t.kind, self.unary())
        if self.at("+"):
            self.advance()
            return self.unary()
        if self.at("++", "--"):
            raise UnsupportedFeature(f"increment inside expression at {t.line}:{t.col}")
        if self.at("(") and self.peek().kind in ("int", "float"):
            self.advance()
            type_ = self.advance().kind
            self.expect(")")
            return self.node(A.Cast, t, type_, self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if self.accept("intlit"):
            return self.node(A.IntLit, t, int(t.text))
        if self.accept("floatlit"):
            return self.node(A.FloatLit, t, float(t.text), t.text)
        if self.accept("true"):
            return self.node(A.BoolLit, t, True)
        if self.accept("false"):
            return self.node(A.BoolLit, t, False)
        if self.accept("read"):
            self.expect("(")
            self.expect(")")
            return self.node(A.Read, t)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.at("name"):
            self.advance()
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return self.node(A.Call, t, t.text, tuple(args))
            if self.accept("["):
                index = self.expr()
                self.expect("]")
                return self.node(A.Index, t, t.text, index)
            if self.at("++", "--"):
                raise UnsupportedFeature(f"increment inside expression at {t.line}:{t.col}")
            return self.node(A.Var, t, t.text)
        self.fail(f"unexpected {t.text or 'end of input'!r}", ("expression",))


def parse(source: str) -> A.Program:
    """Parse and check ``source``; raises ParseError or UnsupportedFeature."""
    program = Parser(source).program()
    from .check import check_program
    check_program(program)
    return program
