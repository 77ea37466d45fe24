"""Verification conditions for aligned automaton edges.

A label (list of guarded actions) becomes an SSA formula: each segment
``[g] x = e`` contributes ``(g => x_{k+1} = e) and (not g => x_{k+1} = x_k)``
with ``g`` read at the segment's entry indices.  Besides the SSA clauses each
side records when its edge is taken (the conjunction of its branch guards)
and when it is defined (no zero divisor, no index out of bounds, no read
past the end of the input).

The edge condition is satisfiable exactly when, from states related by the
alignment predicate, the two sides disagree on taking the edge, or the
student side hits an undefined operation the reference avoids, or both take
the edge and end in states the target predicate does not relate.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .cfa import CUR, OUT, RET, SKIP, Action
from .minilang import ast as A
from .solver.terms import (ARRAY, BOOL, FALSE, IN_SEQ, INT, OUT_SEQ, REAL, TRUE, VAL, App, Const, Lit,
                           Term, and_, app, conj, const, eq, iff, implies, int_lit, ite, lit, not_, or_,
                           real_lit)

IN = "__in"
PRIME = "'"

_SORT = {"int": INT, "float": REAL, "array": ARRAY, "out": OUT_SEQ}


class UnsupportedExpression(Exception):
    """An expression outside the encodable fragment."""


@dataclass(frozen=True)
class Hole:
    """A placeholder chosen from ``space`` by an integer selector; ``space[0]``
    is the original expression."""
    id: int
    kind: str                 # conditional | update | print
    space: tuple
    target: object = None    # assignment target of update holes

    @property
    def original(self):
        return self.space[0]

    @property
    def selector(self) -> Const:
        return const(f"h{self.id}", INT)

    def domain(self) -> Term:
        s = self.selector
        return and_(app("<=", BOOL, int_lit(0), s), app("<", BOOL, s, int_lit(len(self.space))))

    def __str__(self):
        return f"h{self.id}"


@dataclass
class Vocabulary:
    """Variables, sorts and SSA names of one side of an edge."""
    variables: dict                                   # name -> VarInfo; special variables excluded
    ret_type: str = "int"
    prime: str = ""
    functions: dict = field(default_factory=dict)     # callee name -> Function
    symbols: dict = field(default_factory=dict)       # callee name -> shared function symbol

    def names(self) -> list:
        return list(self.variables) + [RET, OUT, CUR]

    def type_of(self, name: str) -> str:
        if name == RET:
            return "float" if self.ret_type == "float" else "int"
        if name == OUT:
            return "out"
        if name == CUR:
            return "int"
        info = self.variables[name]
        return "array" if info.is_array else info.type

    def sort(self, name: str) -> str:
        return _SORT[self.type_of(name)]

    def name(self, var: str, k: int, suffix: str = "") -> str:
        return f"{var}{self.prime}@{k}{suffix}"

    def const(self, var: str, k: int, suffix: str = "") -> Const:
        return Const(self.sort(var), self.name(var, k, suffix))


def vocabulary(fn: A.Function, prime: str = "", functions: Optional[dict] = None,
               symbols: Optional[dict] = None) -> Vocabulary:
    functions = dict(functions or {})
    symbols = dict(symbols or {name: name for name in functions})
    return Vocabulary(A.variables_of(fn), fn.ret_type, prime, functions, symbols)


def input_const(suffix: str = "") -> Const:
    return Const(IN_SEQ, IN + suffix)


# expressions

def convert(t: Term, have: str, want: str) -> Term:
    if have == want:
        return t
    if want == "int":
        if have == "bool":
            return ite(t, int_lit(1), int_lit(0))
        return app("ctrunc", INT, t)
    if want == "float":
        if have == "bool":
            return ite(t, real_lit(1), real_lit(0))
        return app("to_real", REAL, t)
    if want == "bool":
        zero = int_lit(0) if have == "int" else real_lit(0)
        return not_(eq(t, zero))
    raise UnsupportedExpression(f"cannot convert {have} to {want}")


def _select(selector: Const, values: list) -> Term:
    out = values[-1]
    for i in range(len(values) - 2, -1, -1):
        out = ite(eq(selector, int_lit(i)), values[i], out)
    return out


_CMP = {"<": "<", "<=": "<=", ">": ">", ">=": ">="}


class _Encoder:
    def __init__(self, vocab: Vocabulary, state: dict, suffix: str):
        self.vocab = vocab
        self.state = state
        self.suffix = suffix

    def expr(self, e) -> tuple:
        """``(term, type, defined)``."""
        if isinstance(e, A.IntLit):
            return int_lit(e.value), "int", TRUE
        if isinstance(e, A.FloatLit):
            return real_lit(Fraction(e.text) if e.text else Fraction(e.value)), "float", TRUE
        if isinstance(e, A.BoolLit):
            return lit(e.value, BOOL), "bool", TRUE
        if isinstance(e, A.Var):
            ty = self.vocab.type_of(e.name)
            if ty in ("array", "out"):
                raise UnsupportedExpression(f"{e.name} used as a scalar")
            return self.state[e.name], ty, TRUE
        if isinstance(e, A.Index):
            idx, d = self._index(e.name, e.index)
            return app("select", INT, self.state[e.name], idx), "int", d
        if isinstance(e, A.Cast):
            t, ty, d = self.expr(e.operand)
            return convert(t, ty, e.type), e.type, d
        if isinstance(e, A.Unary):
            t, ty, d = self.expr(e.operand)
            if e.op == "!":
                return not_(convert(t, ty, "bool")), "bool", d
            if ty == "bool":
                t, ty = convert(t, ty, "int"), "int"
            if isinstance(t, Lit):
                return Lit(t.sort, -t.value), ty, d
            return app("-", _SORT[ty], t), ty, d
        if isinstance(e, A.Binary):
            return self._binary(e)
        if isinstance(e, A.Call):
            return self._call(e)
        if isinstance(e, A.Read):
            raise UnsupportedExpression("read() is only encodable as the whole right-hand side")
        raise UnsupportedExpression(f"cannot encode {type(e).__name__}")

    def _index(self, name: str, index) -> tuple:
        t, ty, d = self.expr(index)
        t = convert(t, ty, "int")
        size = self.vocab.variables[name].size
        bounds = and_(app("<=", BOOL, int_lit(0), t), app("<", BOOL, t, int_lit(size)))
        return t, and_(d, bounds)

    def _binary(self, e: A.Binary) -> tuple:
        a, at, da = self.expr(e.left)
        b, bt, db = self.expr(e.right)
        if e.op in ("&&", "||"):
            a, b = convert(a, at, "bool"), convert(b, bt, "bool")
            if e.op == "&&":
                return and_(a, b), "bool", and_(da, implies(a, db))
            return or_(a, b), "bool", and_(da, implies(not_(a), db))
        d = and_(da, db)
        if e.op in ("==", "!=") and at == bt == "bool":
            t = iff(a, b)
            return (t if e.op == "==" else not_(t)), "bool", d
        ty = "float" if "float" in (at, bt) else "int"
        a, b = convert(a, at, ty), convert(b, bt, ty)
        sort = _SORT[ty]
        if e.op in ("+", "-", "*"):
            return app(e.op, sort, a, b), ty, d
        if e.op in ("/", "%"):
            nonzero = not_(eq(b, int_lit(0) if ty == "int" else real_lit(0)))
            if ty == "float":
                if e.op == "%":
                    raise UnsupportedExpression("% on reals")
                return app("/", REAL, a, b), ty, and_(d, nonzero)
            return app("cdiv" if e.op == "/" else "cmod", INT, a, b), ty, and_(d, nonzero)
        if e.op in _CMP:
            return app(_CMP[e.op], BOOL, a, b), "bool", d
        if e.op == "==":
            return eq(a, b), "bool", d
        if e.op == "!=":
            return not_(eq(a, b)), "bool", d
        raise UnsupportedExpression(f"operator {e.op}")

    def _call(self, e: A.Call) -> tuple:
        fn = self.vocab.functions.get(e.name)
        if fn is None:
            raise UnsupportedExpression(f"call to unknown function {e.name}")
        args, defs = [], []
        for p, arg in zip(fn.params, e.args):
            t, ty, d = self.expr(arg)
            args.append(convert(t, ty, p.type))
            defs.append(d)
        ret = "float" if fn.ret_type == "float" else "int"
        symbol = "uf:" + self.vocab.symbols.get(e.name, e.name)
        return app(symbol, _SORT[ret], *args), ret, conj(defs)

    # guards and actions

    def guard(self, g) -> tuple:
        if isinstance(g, Hole):
            terms, defs = [], []
            for cand in g.space:
                t, ty, d = self.expr(cand)
                terms.append(convert(t, ty, "bool"))
                defs.append(d)
            sel = g.selector
            return _select(sel, terms), conj(implies(eq(sel, int_lit(i)), d) for i, d in enumerate(defs))
        t, ty, d = self.expr(g)
        return convert(t, ty, "bool"), d

    def action(self, act: Action) -> tuple:
        """``(updates, defined)`` with updates computed from the current state."""
        if isinstance(act.value, Hole):
            per = [self._effects(replace(act, value=c)) for c in act.value.space]
            keys = []
            for upd, _ in per:
                keys += [k for k in upd if k not in keys]
            sel = act.value.selector
            merged = {k: _select(sel, [upd.get(k, self.state[k]) for upd, _ in per]) for k in keys}
            defined = conj(implies(eq(sel, int_lit(i)), d) for i, (_, d) in enumerate(per))
            return merged, defined
        return self._effects(act)

    def _effects(self, act: Action) -> tuple:
        if is_frame(act):
            return {}, TRUE
        if act.is_print:
            if act.value == SKIP:
                return {}, TRUE
            t, ty, d = self.expr(act.value)
            item = app("F", VAL, t) if ty == "float" else app("I", VAL, convert(t, ty, "int"))
            out = app("seq.++", OUT_SEQ, self.state[OUT], app("seq.unit", OUT_SEQ, item))
            return {OUT: out}, d
        updates = {}
        if isinstance(act.value, A.Read):
            cur = self.state[CUR]
            stream = input_const(self.suffix)
            d = and_(app("<=", BOOL, int_lit(0), cur),
                     app("<", BOOL, cur, app("seq.len", INT, stream)))
            value, vty = app("seq.nth", REAL, stream, cur), "float"
            updates[CUR] = app("+", INT, cur, int_lit(1))
        else:
            value, vty, d = self.expr(act.value)
        target = act.target
        if isinstance(target, A.Var):
            want = self.vocab.type_of(target.name)
            if want in ("array", "out"):
                raise UnsupportedExpression(f"assignment to {target.name}")
            updates[target.name] = convert(value, vty, want)
        elif isinstance(target, A.Index):
            idx, di = self._index(target.name, target.index)
            d = and_(d, di)
            updates[target.name] = app("store", ARRAY, self.state[target.name], idx,
                                       convert(value, vty, "int"))
        else:
            raise UnsupportedExpression(f"assignment target {target!r}")
        return updates, d


def encodable(vocab: Vocabulary, hole: Hole, candidate) -> bool:
    """Whether ``candidate`` can fill ``hole`` on this side."""
    enc = _Encoder(vocab, {n: vocab.const(n, 0) for n in vocab.names()}, "")
    try:
        if hole.kind == "conditional":
            enc.guard(candidate)
        else:
            is_print = hole.kind == "print"
            enc.action(Action(None if is_print else hole.target, candidate, None, is_print=is_print))
    except (UnsupportedExpression, KeyError):
        return False
    return True


def is_frame(act: Action) -> bool:
    """``x = x`` and print-skip leave the state alone (no bounds check either)."""
    if act.is_print:
        return act.value == SKIP
    return act.value == act.target


# SSA

@dataclass
class SsaFormula:
    namespace: str
    clauses: list
    entry: dict          # variable -> Const at index 0
    exit: dict           # variable -> Const at its last index
    taken: Term          # the edge's branch guards all hold
    defined: Term        # no undefined operation on the taken prefix

    @property
    def formula(self) -> Term:
        return conj(self.clauses)

    def indices(self) -> dict:
        return {v: int(c.name.split("@")[1].split("#")[0]) for v, c in self.exit.items()}


def to_ssa(label, vocab: Vocabulary, suffix: str = "") -> SsaFormula:
    names = vocab.names()
    index = {n: 0 for n in names}
    entry = {n: vocab.const(n, 0, suffix) for n in names}
    state = dict(entry)
    enc = _Encoder(vocab, state, suffix)
    clauses, defs = [], []
    prefix = TRUE
    for seg in label:
        g, gdef = enc.guard(seg.guard)
        defs.append(implies(prefix, gdef))
        runs = and_(prefix, g)
        for act in seg.actions:
            updates, d = enc.action(act)
            defs.append(implies(runs, d))
            for var, value in updates.items():
                index[var] += 1
                new = vocab.const(var, index[var], suffix)
                clauses.append(implies(g, eq(new, value)))
                clauses.append(implies(not_(g), eq(new, state[var])))
                state[var] = new
        if seg.branch:
            prefix = runs
    taken = prefix if label else FALSE
    return SsaFormula(vocab.prime, clauses, entry, dict(state), taken, conj(defs))


# alignment predicates and edge conditions

EXIT_VARIABLES = (RET, OUT, CUR)


def alignment_predicate(pairs, student: dict, reference: dict) -> Term:
    """Equalities ``student[s] = reference[r]`` for every pair ``(s, r)``."""
    return conj(eq(student[s], reference[r]) for s, r in pairs)


@dataclass
class EdgeVc:
    pre: Term
    student: SsaFormula
    reference: SsaFormula
    post: Term
    pairs: tuple
    suffix: str = ""

    @property
    def background(self) -> Term:
        return and_(self.pre, self.student.formula, self.reference.formula, self.reference.defined)

    @property
    def obligation(self) -> Term:
        s, r = self.student, self.reference
        return and_(iff(s.taken, r.taken), implies(r.taken, self.post), s.defined)

    @property
    def formula(self) -> Term:
        return and_(self.background, not_(self.obligation))

    def stages(self) -> list:
        """Control (taken conditions and definedness) first, then data."""
        s, r = self.student, self.reference
        control = and_(self.background, not_(and_(iff(s.taken, r.taken), s.defined)))
        data = and_(self.background, r.taken, s.taken, s.defined, not_(self.post))
        return [control, data]

    def entry_consts(self) -> list:
        consts = list(self.reference.entry.values()) + list(self.student.entry.values())
        return consts + [input_const(self.suffix)]

    @property
    def theories(self) -> set:
        return theories(self.formula)


def edge_vc(student_label, reference_label, student: Vocabulary, reference: Vocabulary,
            pairs, at_exit: bool = False, suffix: str = "") -> EdgeVc:
    """``pairs`` lists (student variable, reference variable); at the function
    exit only the return value, output and cursor are related."""
    s = to_ssa(student_label, student, suffix)
    r = to_ssa(reference_label, reference, suffix)
    pairs = tuple(pairs)
    pre = alignment_predicate(pairs, s.entry, r.entry)
    post_pairs = [(a, b) for a, b in pairs if b in EXIT_VARIABLES] if at_exit else pairs
    post = alignment_predicate(post_pairs, s.exit, r.exit)
    return EdgeVc(pre, s, r, post, pairs, suffix)


def theories(t: Term) -> set:
    """Theory tags: LIA/NIA, LRA/NRA, SEQ, ARRAY, UF."""
    tags = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if x.sort == INT:
            tags.add("LIA")
        elif x.sort == REAL:
            tags.add("LRA")
        elif x.sort in (OUT_SEQ, IN_SEQ):
            tags.add("SEQ")
        elif x.sort == ARRAY:
            tags.add("ARRAY")
        if isinstance(x, App):
            if x.op.startswith("uf:"):
                tags.add("UF")
            symbolic = [a for a in x.args if not isinstance(a, Lit)]
            if x.op == "*" and len(symbolic) > 1:
                tags.add("NIA" if x.sort == INT else "NRA")
            if x.op in ("cdiv", "cmod", "/") and not isinstance(x.args[1], Lit):
                tags.add("NIA" if x.sort == INT else "NRA")
            stack.extend(x.args)
    return tags
