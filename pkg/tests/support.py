"""Shared oracles and generators for the test-suite."""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from hypothesis import strategies as st

from cfarepair.align import align_edges, align_nodes, ast_skeleton, variable_alignment
from cfarepair.cfa import CUR, FUNC_EXIT, OUT, RET, build_cfa, execute_label
from cfarepair.minilang import ast as A, parse
from cfarepair.minilang.interp import fresh_frame
from cfarepair.minilang.treedist import LTree
from cfarepair.repair.edge import EdgeTask
from cfarepair.solver.evaluate import evaluate
from cfarepair.solver.terms import Lit
from cfarepair.vcgen import IN, PRIME, vocabulary

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"


def source(*parts: str) -> str:
    return (CORPUS.joinpath(*parts)).read_text()


# brute-force ordered tree edit distance over forests (unit costs)

def _forest(t: LTree) -> tuple:
    return ((t.label, tuple(_forest(k)[0] for k in t.kids)),)


@lru_cache(maxsize=None)
def _fd(f: tuple, g: tuple) -> int:
    if not f and not g:
        return 0
    if not g:
        (lab, kids) = f[-1]
        return _fd(f[:-1] + kids, g) + 1
    if not f:
        (lab, kids) = g[-1]
        return _fd(f, g[:-1] + kids) + 1
    (lv, kv), (lw, kw) = f[-1], g[-1]
    return min(
        _fd(f[:-1] + kv, g) + 1,
        _fd(f, g[:-1] + kw) + 1,
        _fd(kv, kw) + _fd(f[:-1], g[:-1]) + (lv != lw),
    )


def brute_ted(a: LTree, b: LTree) -> int:
    return _fd(_forest(a), _forest(b))


@st.composite
def ltrees(draw, depth: int = 3, labels: str = "abc"):
    label = draw(st.sampled_from(labels))
    if depth == 0:
        return LTree(label)
    kids = draw(st.lists(ltrees(depth=depth - 1, labels=labels), max_size=2))
    return LTree(label, tuple(kids))


# random loop-bounded programs over two parameters and two locals

SCALARS = ("a", "b", "x", "y")


@st.composite
def exprs(draw, depth: int = 2):
    if depth == 0 or draw(st.booleans()):
        if draw(st.booleans()):
            return draw(st.sampled_from(SCALARS))
        return str(draw(st.integers(-3, 3)))
    op = draw(st.sampled_from(["+", "-", "*"]))
    return f"({draw(exprs(depth - 1))} {op} {draw(exprs(depth - 1))})"


@st.composite
def conds(draw):
    op = draw(st.sampled_from(["<", "<=", "==", "!=", ">"]))
    c = f"{draw(exprs(1))} {op} {draw(exprs(1))}"
    if draw(st.integers(0, 3)) == 0:
        c = f"{c} && {draw(exprs(1))} != {draw(exprs(1))}"
    return c


@st.composite
def stmts(draw, depth: int, loops: list, in_loop: bool):
    out = []
    for _ in range(draw(st.integers(1, 3))):
        kind = draw(st.sampled_from(
            ["assign", "assign", "print", "if", "loop", "return", "break"]))
        if kind == "assign":
            out.append(f"{draw(st.sampled_from(['x', 'y', 'a']))} = {draw(exprs())};")
        elif kind == "print":
            out.append(f"print({draw(exprs(1))});")
        elif kind == "return":
            out.append(f"if ({draw(conds())}) return {draw(exprs(1))};")
        elif kind == "break" and in_loop:
            out.append(f"if ({draw(conds())}) break;")
        elif kind == "if" and depth > 0:
            then = " ".join(draw(stmts(depth - 1, loops, in_loop)))
            text = f"if ({draw(conds())}) {{ {then} }}"
            if draw(st.booleans()):
                text += f" else {{ {' '.join(draw(stmts(depth - 1, loops, in_loop)))} }}"
            out.append(text)
        elif kind == "loop" and depth > 0:
            k = f"k{len(loops)}"
            loops.append(k)
            body = " ".join(draw(stmts(depth - 1, loops, True)))
            bound = draw(st.integers(0, 3))
            if draw(st.booleans()):
                out.append(f"for (int {k} = 0; {k} < {bound}; {k}++) {{ {body} }}")
            else:
                out.append(f"int {k} = 0; while ({k} < {bound}) {{ {k} = {k} + 1; {body} }}")
    return out


@st.composite
def programs(draw, depth: int = 2):
    body = " ".join(draw(stmts(depth, [], False)))
    return (f"int f(int a, int b) {{ int x = 0; int y = {draw(st.integers(-2, 2))}; "
            f"{body} return x + y; }}")


def run_cfa(cfa, args: tuple, max_steps: int = 1000) -> tuple:
    """Walk the automaton edge by edge with the interpreter's semantics.
    Every visited node must have exactly one taken outgoing edge."""
    env = cfa.variables
    store = fresh_frame(cfa.function, env)
    for p, v in zip(cfa.function.params, args):
        store[p.name] = v
    store[OUT], store[CUR] = (), 0
    node = cfa.entry
    for _ in range(max_steps):
        if node.kind == FUNC_EXIT:
            return store[RET], tuple(store[OUT])
        taken = []
        for e in cfa.out_edges(node):
            ok, after = execute_label(e.label, store, env)
            if ok:
                taken.append((e, after))
        assert len(taken) == 1, f"{len(taken)} edges taken at {node}"
        edge, store = taken[0]
        node = edge.target
    raise AssertionError("automaton walk did not reach the exit")


@st.composite
def program_pairs(draw):
    """A random program and a variant with the same loop structure: the two
    locals are possibly swapped and some literals changed."""
    src = draw(programs())
    variant = src
    if draw(st.booleans()):
        variant = re.sub(r"\b[xy]\b", lambda m: "y" if m.group() == "x" else "x", variant)

    def relit(m):
        return str(draw(st.integers(0, 3))) if draw(st.integers(0, 3)) == 0 else m.group()

    # literals only, never the digits inside names such as k0
    variant = re.sub(r"(?<![\w])\d+", relit, variant)
    return src, variant


def branch_program(var: str, n: int, base: int) -> str:
    """``n`` distinct paths from entry to exit."""
    if n == 1:
        return f"int f(int a, int b) {{ int x = {base}; return x; }}"
    parts = [f"if ({var} == {i}) {{ x = {base + i}; }}" for i in range(n - 1)]
    chain = " else ".join(parts) + f" else {{ x = {base + n}; }}"
    return f"int f(int a, int b) {{ int x = 0; {chain} return x; }}"


# concrete evaluation of SSA formulas

TRUE_TERM = Lit("Bool", True)


def item(x):
    """Interpreter output item as a term-evaluator value."""
    kind, v = x
    return ("I", v) if kind == "int" else ("F", Fraction(v))


def run_ssa(ssa, env: dict) -> dict:
    """Values of every SSA name, obtained by evaluating the clauses in order."""
    env = dict(env)
    for clause in ssa.clauses:
        if isinstance(clause, Lit):
            continue
        cond, body = clause.args if clause.op == "=>" else (TRUE_TERM, clause)
        if evaluate(cond, env):
            new, value = body.args
            env[new.name] = evaluate(value, env)
    return env


def entry_env(ssa, store: dict) -> dict:
    env = {IN: ()}
    for var, c in ssa.entry.items():
        env[c.name] = tuple(item(x) for x in store[OUT]) if var == OUT else store[var]
    return env


def interpreter_store(fn, values: list) -> dict:
    store = {name: v for name, v in zip(A.variables_of(fn), values)}
    store.update({RET: values[-1], OUT: (), CUR: 0})
    return store


# one aligned edge of a student/reference pair

def edge_task(student_src: str, reference_src: str, edge_id: str):
    fs, fr = parse(student_src).functions[0], parse(reference_src).functions[0]
    cs, cr = build_cfa(fs), build_cfa(fr)
    v = align_nodes(ast_skeleton(fs), ast_skeleton(fr), cs, cr)
    af = next(align_edges(cs, cr, v))
    pred = variable_alignment(af)
    vs = vocabulary(fs, PRIME)
    for m in pred.minted:
        vs.variables.setdefault(m.name, m)
    e = next(e for e in af.edges if e.id == edge_id)
    return EdgeTask(e.student_label, e.reference_label, vs, vocabulary(fr), pred.pairs,
                    e.target[1].kind == FUNC_EXIT, pred.renaming())
