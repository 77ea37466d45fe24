"""In-repo evaluator for SMT terms.

Used to validate solver models and to test formulas on concrete stores
without a solver.  Values: int, Fraction, bool, tuples for sequences,
``("I", n)``/``("F", q)`` for output items, ArrayValue for arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from .terms import App, Const, FunDef, Lit, Term, INT, REAL, BOOL, IN_SEQ, OUT_SEQ, ARRAY


class Undefined(Exception):
    """The value is left open by the theory (division by zero, seq.nth out of range)."""


@dataclass
class ArrayValue:
    default: object = 0
    entries: dict = field(default_factory=dict)
    fn: object = None

    def get(self, i):
        if self.fn is not None:
            return self.fn(i)
        return self.entries.get(i, self.default)

    def set(self, i, v) -> "ArrayValue":
        if self.fn is not None:
            base = self.fn
            return ArrayValue(fn=lambda k, base=base, i=i, v=v: v if k == i else base(k))
        entries = dict(self.entries)
        entries[i] = v
        return ArrayValue(self.default, entries)

    def __eq__(self, other):
        if not isinstance(other, ArrayValue):
            return NotImplemented
        if self.fn is not None or other.fn is not None:
            raise Undefined("cannot compare functional arrays")
        keys = set(self.entries) | set(other.entries)
        return self.default == other.default and all(self.get(k) == other.get(k) for k in keys)

    def __hash__(self):
        return hash((self.default, tuple(sorted(self.entries.items()))))


def _trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise Undefined("cdiv by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _euclid_div(a: int, b: int) -> int:
    if b == 0:
        raise Undefined("div by zero")
    q = a // b
    if a - b * q < 0:  # Python floors; SMT-LIB keeps the remainder non-negative
        q += 1
    return q


class Evaluator:
    def __init__(self, env: dict | None = None, funs: dict | None = None):
        self.env = dict(env or {})
        self.funs = dict(funs or {})

    def __call__(self, t: Term):
        return self.eval(t, self.env)

    def eval(self, t: Term, env: dict):
        if isinstance(t, Lit):
            if t.sort == ARRAY:
                default, entries = t.value
                return ArrayValue(default, dict(entries))
            return t.value
        if isinstance(t, Const):
            if t.name not in env:
                raise KeyError(f"no value for {t.name}")
            return env[t.name]
        if isinstance(t, App):
            return self.apply(t, env)
        raise TypeError(f"not a term: {t!r}")

    def apply(self, t: App, env: dict):
        op = t.op
        # lazy connectives first
        if op == "and":
            return all(self.eval(a, env) for a in t.args)
        if op == "or":
            return any(self.eval(a, env) for a in t.args)
        if op == "=>":
            return (not self.eval(t.args[0], env)) or self.eval(t.args[1], env)
        if op == "ite":
            return self.eval(t.args[1] if self.eval(t.args[0], env) else t.args[2], env)
        args = [self.eval(a, env) for a in t.args]
        if op == "not":
            return not args[0]
        if op == "=":
            return all(args[0] == a for a in args[1:])
        if op == "distinct":
            return len(set(map(_key, args))) == len(args)
        if op == "xor":
            return args[0] != args[1]
        if op == "+":
            return sum(args[1:], args[0])
        if op == "-":
            if len(args) == 1:
                return -args[0]
            out = args[0]
            for a in args[1:]:
                out = out - a
            return out
        if op == "*":
            out = args[0]
            for a in args[1:]:
                out = out * a
            return out
        if op == "/":
            if args[1] == 0:
                raise Undefined("real division by zero")
            return Fraction(args[0]) / Fraction(args[1])
        if op == "div":
            return _euclid_div(args[0], args[1])
        if op == "mod":
            return args[0] - args[1] * _euclid_div(args[0], args[1])
        if op == "abs":
            return abs(args[0])
        if op == "cdiv":
            return _trunc_div(args[0], args[1])
        if op == "cmod":
            return args[0] - args[1] * _trunc_div(args[0], args[1])
        if op == "ctrunc":
            x = Fraction(args[0])
            return floor(x) if x >= 0 else -floor(-x)
        if op == "to_real":
            return Fraction(args[0])
        if op == "to_int":
            return floor(Fraction(args[0]))
        if op == "is_int":
            return Fraction(args[0]).denominator == 1
        if op == "<":
            return args[0] < args[1]
        if op == "<=":
            return args[0] <= args[1]
        if op == ">":
            return args[0] > args[1]
        if op == ">=":
            return args[0] >= args[1]
        if op == "seq.unit":
            return (args[0],)
        if op == "seq.++":
            out = ()
            for a in args:
                out = out + tuple(a)
            return out
        if op == "seq.len":
            return len(args[0])
        if op == "seq.nth":
            s, i = args
            if not 0 <= i < len(s):
                raise Undefined("seq.nth out of range")
            return s[i]
        if op == "I":
            return ("I", args[0])
        if op == "F":
            return ("F", Fraction(args[0]))
        if op == "ival":
            if args[0][0] != "I":
                raise Undefined("ival of a non-integer item")
            return args[0][1]
        if op == "fval":
            if args[0][0] != "F":
                raise Undefined("fval of a non-real item")
            return args[0][1]
        if op == "is-I":
            return args[0][0] == "I"
        if op == "is-F":
            return args[0][0] == "F"
        if op == "select":
            return args[0].get(args[1])
        if op == "store":
            return args[0].set(args[1], args[2])
        if op == "const-array":
            return ArrayValue(args[0], {})
        if op in self.funs:
            return self.call(self.funs[op], args)
        raise Undefined(f"no interpretation for {op}")

    def call(self, fun, args):
        if callable(fun):
            return fun(*args)
        if isinstance(fun, FunDef):
            inner = {p.name: v for p, v in zip(fun.params, args)}
            return self.eval(fun.body, inner)
        raise TypeError(f"bad function interpretation {fun!r}")


def _key(v):
    return v if not isinstance(v, ArrayValue) else hash(v)


def evaluate(t: Term, env: dict, funs: dict | None = None):
    return Evaluator(env, funs).eval(t, env)


# reading solver output back into terms

def _sort_text(sx) -> str:
    if isinstance(sx, str):
        return sx
    return "(" + " ".join(_sort_text(x) for x in sx) + ")"


def term_of_sexpr(sx, scope: dict | None = None) -> Term:
    """Convert a reply s-expression into a Term.  ``scope`` maps bound names to sorts."""
    scope = scope or {}
    if isinstance(sx, str):
        if sx in ("true", "false"):
            return Lit(BOOL, sx == "true")
        if sx in scope:
            return Const(scope[sx], sx)
        try:
            if "." in sx:
                return Lit(REAL, Fraction(sx))
            return Lit(INT, int(sx))
        except ValueError:
            return App("?", sx, ())
    head = sx[0]
    if isinstance(head, list):
        # ((as const (Array Int Int)) v)
        if head[:2] == ["as", "const"]:
            return App(_sort_text(head[2]), "const-array", (term_of_sexpr(sx[1], scope),))
        raise ValueError(f"unsupported application head {head!r}")
    if head == "as" and sx[1] == "seq.empty":
        return Lit(_sort_text(sx[2]), ())
    if head == "lambda":
        params = tuple(Const(_sort_text(s), n) for n, s in sx[1])
        inner = dict(scope)
        inner.update({p.name: p.sort for p in params})
        body = term_of_sexpr(sx[2], inner)
        return App(ARRAY, "lambda", (Lit("fun", FunDef("lambda", params, body)),))
    if head == "let":
        inner = dict(scope)
        bindings = []
        for name, value in sx[1]:
            v = term_of_sexpr(value, scope)
            bindings.append((name, v))
            inner[name] = v.sort
        body = term_of_sexpr(sx[2], inner)
        from .terms import substitute
        return substitute(body, dict(bindings))
    if head == "_" and len(sx) == 3 and sx[1] == "as-array":
        return App(ARRAY, "as-array", (Lit("name", sx[2]),))
    args = tuple(term_of_sexpr(a, scope) for a in sx[1:])
    if head == "-" and len(args) == 1 and isinstance(args[0], Lit) and args[0].sort in (INT, REAL):
        return Lit(args[0].sort, -args[0].value)
    if head == "/" and all(isinstance(a, Lit) for a in args):
        return Lit(REAL, Fraction(args[0].value) / Fraction(args[1].value))
    return App("?", head, args)


class ModelEvaluator(Evaluator):
    """Evaluator that also understands lambda and as-array values."""

    def apply(self, t: App, env: dict):
        if t.op == "lambda":
            fun = t.args[0].value
            return ArrayValue(fn=lambda i, fun=fun: self.call(fun, [i]))
        if t.op == "as-array":
            name = t.args[0].value
            return ArrayValue(fn=lambda i, name=name: self.call(self.funs[name], [i]))
        return super().apply(t, env)


def value_of_sexpr(sx, funs: dict | None = None):
    return ModelEvaluator({}, funs).eval(term_of_sexpr(sx), {})
