"""Control-flow automata.

States are the entry and exit points of functions and loops.  Each
loop-free path between two consecutive states becomes one edge whose label
is a list of guarded actions, one per branch segment of the path.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .minilang import ast as A
from .minilang.errors import UnsupportedFeature

FUNC_ENTRY = "Func-Entry"
FUNC_EXIT = "Func-Exit"
LOOP_ENTRY = "Loop-Entry"
LOOP_EXIT = "Loop-Exit"

NORMAL = "normal"
BREAK = "break"
RETURN = "return"

OUT = "__out"
CUR = "__cur"
RET = "ret"

MAX_PATHS_PER_NODE = 512

TRUE = A.BoolLit(True)
FALSE = A.BoolLit(False)
SKIP = A.Empty()  # print value that emits nothing; the frame action for the output sequence

_FLIP = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "==": "!=", "!=": "=="}


def negate(e):
    """Logical negation with comparison flipping and double-negation removal."""
    if isinstance(e, A.BoolLit):
        return A.BoolLit(not e.value)
    if isinstance(e, A.Unary) and e.op == "!":
        inner = e.operand
        if isinstance(inner, (A.Unary, A.BoolLit)) or (
                isinstance(inner, A.Binary) and (inner.op in _FLIP or inner.op in ("&&", "||"))):
            return inner
        return A.Binary("!=", inner, A.IntLit(0))
    if isinstance(e, A.Binary) and e.op in _FLIP:
        return A.Binary(_FLIP[e.op], e.left, e.right)
    return A.Unary("!", e)


def show(e) -> str:
    """Source text of an expression; non-syntax placeholders use their own str."""
    from .minilang.pretty import expr
    if e == SKIP:
        return "skip"
    return expr(e) if isinstance(e, A.Node) else str(e)


@dataclass(frozen=True)
class Action:
    """``target = value``; a print is ``__out = value`` with ``is_print``."""
    target: object
    value: object
    origin: Optional[int] = None
    is_print: bool = False

    @property
    def lhs(self) -> str:
        if self.is_print:
            return OUT
        return self.target.name

    def __str__(self):
        if self.is_print:
            return "skip" if self.value == SKIP else f"print({show(self.value)})"
        return f"{show(self.target)}={show(self.value)}"


@dataclass(frozen=True)
class GuardedAction:
    """``[guard] actions``.  ``branch`` guards decide whether the edge is taken;
    non-branch guards only decide whether the actions run."""
    guard: object
    actions: tuple = ()
    origin: Optional[tuple] = None
    branch: bool = True

    def __str__(self):
        acts = "; ".join(str(a) for a in self.actions)
        return f"[{show(self.guard)}] {acts}".rstrip()


@dataclass(frozen=True)
class CfaNode:
    id: str
    kind: str
    owner: int

    def __str__(self):
        return self.id


@dataclass(frozen=True)
class CfaEdge:
    id: str
    source: CfaNode
    target: CfaNode
    kind: str
    label: tuple

    def __str__(self):
        return f"{self.id}: {self.source} -> {self.target} ({self.kind})"


@dataclass
class Cfa:
    function: A.Function
    nodes: list
    edges: list
    entry: CfaNode
    exit: CfaNode
    omega: dict
    variables: dict = field(default_factory=dict)
    loops: dict = field(default_factory=dict)

    def node(self, node_id: str) -> CfaNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def out_edges(self, node: CfaNode) -> list:
        return [e for e in self.edges if e.source == node]

    def edges_between(self, u: CfaNode, v: CfaNode, kind: Optional[str] = None) -> list:
        return [e for e in self.edges
                if e.source == u and e.target == v and (kind is None or e.kind == kind)]

    def dump(self) -> str:
        lines = [f"cfa {self.function.name}"]
        for n in self.nodes:
            lines.append(f"  node {n.id} {n.kind}")
        for e in self.edges:
            lines.append(f"  edge {e.id} {e.source.id}->{e.target.id} {e.kind}")
            for ga in e.label:
                lines.append(f"    {ga}")
        return "\n".join(lines)

    def to_dot(self) -> str:
        lines = [f'digraph "{self.function.name}" {{']
        for n in self.nodes:
            lines.append(f'  {n.id} [label="{n.id}\\n{n.kind}"];')
        for e in self.edges:
            text = "\\n".join(str(g).replace('"', '\\"') for g in e.label)
            lines.append(f'  {e.source.id} -> {e.target.id} [label="{e.id} ({e.kind})\\n{text}"];')
        lines.append("}")
        return "\n".join(lines)


# path enumeration

@dataclass(frozen=True)
class _Frame:
    stmts: tuple
    index: int
    loop: Optional[A.Node] = None   # set on loop-body frames
    is_function: bool = False


def _edge_letters():
    n = 0
    while True:
        q, r = divmod(n, 26)
        yield chr(ord("a") + r) + (str(q + 1) if q else "")
        n += 1


class _Builder:
    def __init__(self, fn: A.Function):
        self.fn = fn
        self.loops = []            # pre-order
        self.after = {}            # loop nid -> continuation stack after the loop
        self.enclosing = {}        # loop nid -> stack in which the loop body runs
        self._scan(fn.body.body, (), True)

    def _scan(self, stmts, stack, top=False):
        for i, s in enumerate(stmts):
            rest = stack + (_Frame(stmts, i + 1, is_function=top),)
            self._scan_stmt(s, rest)

    def _scan_stmt(self, s, rest):
        if isinstance(s, A.Block):
            self._scan(s.body, rest)
        elif isinstance(s, A.If):
            self._scan(s.then.body, rest)
            if s.orelse is not None:
                self._scan(s.orelse.body, rest)
        elif A.is_loop(s):
            self.loops.append(s)
            self.after[s.nid] = rest
            self.enclosing[s.nid] = rest + (_Frame(s.body.body, 0, loop=s),)
            self._scan(s.body.body, rest + (_Frame((), 0, loop=s),))

    def build(self) -> Cfa:
        count = 1
        entry = CfaNode("q1", FUNC_ENTRY, self.fn.nid)
        nodes = [entry]
        self.le, self.lx, omega = {}, {}, {}
        for loop in self.loops:
            le = CfaNode(f"q{count + 1}", LOOP_ENTRY, loop.nid)
            lx = CfaNode(f"q{count + 2}", LOOP_EXIT, loop.nid)
            count += 2
            self.le[loop.nid], self.lx[loop.nid] = le, lx
            nodes += [le, lx]
            omega[le] = lx
        exit_ = CfaNode(f"q{count + 1}", FUNC_EXIT, self.fn.nid)
        nodes.append(exit_)
        omega[entry] = exit_
        self.exit = exit_

        raw = []
        start = GuardedAction(TRUE, (), None)
        raw += [(entry, *p) for p in self._walk(((_Frame(self.fn.body.body, 0, is_function=True),)), [start])]
        for loop in self.loops:
            le, lx = self.le[loop.nid], self.lx[loop.nid]
            into = GuardedAction(loop.cond, (), (loop.nid, True))
            raw += [(le, *p) for p in self._walk(self.enclosing[loop.nid], [into])]
            raw.append((le, lx, NORMAL, (GuardedAction(negate(loop.cond), (), (loop.nid, False)),)))
            raw += [(lx, *p) for p in self._walk(self.after[loop.nid], [start])]

        order = {n: i for i, n in enumerate(nodes)}
        raw.sort(key=lambda r: order[r[0]])  # stable: keeps path order per source
        letters = _edge_letters()
        edges = [CfaEdge(next(letters), src, dst, kind, label) for src, dst, kind, label in raw]
        variables = A.variables_of(self.fn)
        return Cfa(self.fn, nodes, edges, entry, exit_, omega, variables,
                   {lp.nid: lp for lp in self.loops})

    def _walk(self, stack, segs):
        results = []
        self._step(tuple(stack), list(segs), results)
        if len(results) > MAX_PATHS_PER_NODE:
            raise UnsupportedFeature("too many paths between two automaton states")
        return results

    def _emit(self, results, target, kind, segs):
        results.append((target, kind, tuple(segs)))
        if len(results) > MAX_PATHS_PER_NODE:
            raise UnsupportedFeature("too many paths between two automaton states")

    @staticmethod
    def _add(segs, action):
        last = segs[-1]
        segs[-1] = GuardedAction(last.guard, last.actions + (action,), last.origin, last.branch)

    @staticmethod
    def _branch(segs, guard, origin):
        last = segs[-1]
        if last.origin is None and not last.actions and last.guard == TRUE:
            return segs[:-1] + [GuardedAction(guard, (), origin)]
        return segs + [GuardedAction(guard, (), origin)]

    def _innermost_loop(self, stack):
        for frame in reversed(stack):
            if frame.loop is not None:
                return frame.loop
        raise UnsupportedFeature("break outside a loop")

    def _step(self, stack, segs, results):
        while True:
            if not stack:
                raise AssertionError("fell off the continuation stack")
            top = stack[-1]
            if top.index >= len(top.stmts):
                stack = stack[:-1]
                if top.loop is not None:
                    if isinstance(top.loop, A.For) and top.loop.step is not None:
                        self._add_stmt(segs, top.loop.step)
                    self._emit(results, self.le[top.loop.nid], NORMAL, segs)
                    return
                if top.is_function:
                    self._emit(results, self.exit, NORMAL, segs)
                    return
                continue
            s = top.stmts[top.index]
            stack = stack[:-1] + (_Frame(top.stmts, top.index + 1, top.loop, top.is_function),)
            if isinstance(s, (A.Decl, A.Assign, A.Print)):
                self._add_stmt(segs, s)
            elif isinstance(s, A.Empty):
                pass
            elif isinstance(s, A.Block):
                stack = stack + (_Frame(s.body, 0),)
            elif isinstance(s, A.If):
                then_segs = self._branch(segs, s.cond, (s.nid, True))
                self._step(stack + (_Frame(s.then.body, 0),), then_segs, results)
                else_segs = self._branch(segs, negate(s.cond), (s.nid, False))
                else_stack = stack if s.orelse is None else stack + (_Frame(s.orelse.body, 0),)
                self._step(else_stack, else_segs, results)
                return
            elif A.is_loop(s):
                if isinstance(s, A.For) and s.init is not None:
                    self._add_stmt(segs, s.init)
                self._emit(results, self.le[s.nid], NORMAL, segs)
                return
            elif isinstance(s, A.Break):
                loop = self._innermost_loop(stack)
                self._emit(results, self.lx[loop.nid], BREAK, segs)
                return
            elif isinstance(s, A.Return):
                if s.value is not None:
                    self._add(segs, Action(A.Var(RET), s.value, s.nid))
                # a return in the function's own top-level body just flows into the exit
                top_level = len(stack) == 1 and stack[0].is_function
                self._emit(results, self.exit, NORMAL if top_level else RETURN, segs)
                return
            else:
                raise UnsupportedFeature(f"no automaton encoding for {type(s).__name__}")

    def _add_stmt(self, segs, s):
        if isinstance(s, A.Decl):
            if s.init is not None:
                self._add(segs, Action(A.Var(s.name), s.init, s.nid))
        elif isinstance(s, A.Assign):
            self._add(segs, Action(s.target, s.value, s.nid))
        elif isinstance(s, A.Print):
            self._add(segs, Action(None, s.value, s.nid, is_print=True))


def build_cfa(fn: A.Function) -> Cfa:
    return _Builder(fn).build()


def build_cfas(program: A.Program) -> list:
    """One automaton per function, in definition order."""
    return [build_cfa(fn) for fn in program.functions]


def guarded_actions_of_path(cfa: Cfa, source: CfaNode, target: CfaNode) -> list:
    """Labels of all edges from ``source`` to ``target`` (one per path)."""
    return [e.label for e in cfa.edges_between(source, target)]


def taken_on(label: tuple) -> bool:
    return bool(label)


def execute_label(label, store: dict, env: dict, program: Optional[A.Program] = None,
                  inputs=()) -> tuple:
    """Run a label on a concrete store with the interpreter.

    ``store`` maps variables (plus ``ret``, the output list and the cursor) to
    values; ``env`` maps variables to VarInfo.  Stops at the first false branch
    guard.  Returns ``(taken, new_store)``; undefined operations raise
    MiniRuntimeError.
    """
    from .minilang.check import expr_type
    from .minilang.interp import Machine, output_item, truthy

    if RET not in env:
        env = {**env, RET: A.VarInfo(RET, "float" if isinstance(store.get(RET), float) else "int")}
    m = Machine(program, inputs)
    m.cursor = store.get(CUR, 0)
    m.output = list(store.get(OUT, ()))
    frame = {k: (list(v) if isinstance(v, list) else v) for k, v in store.items()
             if k not in (OUT, CUR)}
    for seg in label:
        holds = truthy(m.eval(seg.guard, frame, env))
        if seg.branch and not holds:
            return False, None
        if not holds:
            continue
        for act in seg.actions:
            if act.value == act.target:
                continue
            if act.is_print:
                if act.value != SKIP:
                    m.output.append(output_item(m.eval(act.value, frame, env),
                                                expr_type(act.value, env, m.functions)))
            else:
                m.assign(act.target, m.eval(act.value, frame, env), frame, env)
    if not label:
        return False, None
    frame[OUT] = tuple(m.output)
    frame[CUR] = m.cursor
    return True, frame
