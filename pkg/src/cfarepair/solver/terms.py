"""Typed SMT terms, SMT-LIB rendering and a few smart constructors."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

INT = "Int"
REAL = "Real"
BOOL = "Bool"
VAL = "Val"
OUT_SEQ = "(Seq Val)"
IN_SEQ = "(Seq Real)"
ARRAY = "(Array Int Int)"

PREAMBLE = """\
(declare-datatypes ((Val 0)) (((I (ival Int)) (F (fval Real)))))
(define-fun cdiv ((a Int) (b Int)) Int
  (ite (>= a 0) (ite (> b 0) (div a b) (- (div a (- b))))
                (ite (> b 0) (- (div (- a) b)) (div (- a) (- b)))))
(define-fun cmod ((a Int) (b Int)) Int (- a (* b (cdiv a b))))
(define-fun ctrunc ((x Real)) Int (ite (>= x 0.0) (to_int x) (- (to_int (- x)))))
"""
BUILTIN_FUNS = ("cdiv", "cmod", "ctrunc")


@dataclass(frozen=True)
class Term:
    sort: str


@dataclass(frozen=True)
class Const(Term):
    name: str

    def __str__(self):
        return _symbol(self.name)


@dataclass(frozen=True)
class Lit(Term):
    value: object

    def __str__(self):
        return render_value(self.value, self.sort)


@dataclass(frozen=True)
class App(Term):
    op: str
    args: tuple

    def __str__(self):
        if not self.args:
            return _symbol(self.op)
        return f"({_symbol(self.op)} {' '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class FunDef:
    """Interpreted function (from a model): ``name(params) = body``."""
    name: str
    params: tuple      # of Const
    body: Term


_SIMPLE = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789~!@$%^&*_-+=<>.?/")


def _symbol(name: str) -> str:
    if name and all(c in _SIMPLE for c in name) and not name[0].isdigit():
        return name
    return f"|{name}|"


def render_value(value, sort: str) -> str:
    if sort == BOOL:
        return "true" if value else "false"
    if sort == INT:
        return str(value) if value >= 0 else f"(- {-value})"
    if sort == REAL:
        f = Fraction(value)
        mag = abs(f)
        text = f"{mag.numerator}.0" if mag.denominator == 1 else f"(/ {mag.numerator}.0 {mag.denominator}.0)"
        return text if f >= 0 else f"(- {text})"
    if sort in (OUT_SEQ, IN_SEQ):
        elem = VAL if sort == OUT_SEQ else REAL
        if not value:
            return f"(as seq.empty {sort})"
        units = [f"(seq.unit {render_value(v, elem)})" for v in value]
        return units[0] if len(units) == 1 else f"(seq.++ {' '.join(units)})"
    if sort == VAL:
        tag, x = value
        return f"(I {render_value(x, INT)})" if tag == "I" else f"(F {render_value(x, REAL)})"
    if sort == ARRAY:
        default, entries = value
        text = f"((as const {ARRAY}) {render_value(default, INT)})"
        for k, v in sorted(entries.items()):
            text = f"(store {text} {render_value(k, INT)} {render_value(v, INT)})"
        return text
    raise ValueError(f"cannot render a value of sort {sort}")


# constructors

TRUE = Lit(BOOL, True)
FALSE = Lit(BOOL, False)


def const(name: str, sort: str) -> Const:
    return Const(sort, name)


def lit(value, sort: str) -> Lit:
    if sort == REAL:
        value = Fraction(value)
    return Lit(sort, value)


def int_lit(v: int) -> Lit:
    return Lit(INT, int(v))


def real_lit(v) -> Lit:
    return Lit(REAL, Fraction(v))


def app(op: str, sort: str, *args: Term) -> App:
    return App(sort, op, tuple(args))


def and_(*ts: Term) -> Term:
    parts = []
    for t in ts:
        if t == TRUE:
            continue
        if t == FALSE:
            return FALSE
        if isinstance(t, App) and t.op == "and":
            parts.extend(t.args)
        else:
            parts.append(t)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return App(BOOL, "and", tuple(parts))


def or_(*ts: Term) -> Term:
    parts = []
    for t in ts:
        if t == FALSE:
            continue
        if t == TRUE:
            return TRUE
        parts.append(t)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return App(BOOL, "or", tuple(parts))


def not_(t: Term) -> Term:
    if t == TRUE:
        return FALSE
    if t == FALSE:
        return TRUE
    if isinstance(t, App) and t.op == "not":
        return t.args[0]
    return App(BOOL, "not", (t,))


def implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return App(BOOL, "=>", (a, b))


def iff(a: Term, b: Term) -> Term:
    if a == b:
        return TRUE
    return App(BOOL, "=", (a, b))


def eq(a: Term, b: Term) -> Term:
    if a == b:
        return TRUE
    return App(BOOL, "=", (a, b))


def ite(c: Term, a: Term, b: Term) -> Term:
    if c == TRUE or a == b:
        return a
    if c == FALSE:
        return b
    return App(a.sort, "ite", (c, a, b))


def conj(ts: Iterable[Term]) -> Term:
    return and_(*list(ts))


def free_consts(t: Term, acc=None) -> dict:
    """Name -> sort for every Const in ``t``."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Const):
            acc[x.name] = x.sort
        elif isinstance(x, App):
            stack.extend(x.args)
    return acc


def uf_symbols(t: Term, acc=None) -> dict:
    """Uninterpreted function applications: name -> (arg sorts, result sort)."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, App):
            if x.op.startswith("uf:"):
                acc[x.op] = (tuple(a.sort for a in x.args), x.sort)
            stack.extend(x.args)
    return acc


def substitute(t: Term, mapping: dict) -> Term:
    """Replace constants by name."""
    if isinstance(t, Const):
        return mapping.get(t.name, t)
    if isinstance(t, App):
        args = tuple(substitute(a, mapping) for a in t.args)
        return App(t.sort, t.op, args) if args != t.args else t
    return t


def rename_funs(t: Term, mapping: dict) -> Term:
    if isinstance(t, App):
        args = tuple(rename_funs(a, mapping) for a in t.args)
        return App(t.sort, mapping.get(t.op, t.op), args)
    return t
