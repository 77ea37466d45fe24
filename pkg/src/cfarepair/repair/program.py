"""Whole-program repair.

Each function pair is handled in definition order, so callees are settled
before their callers.  For one pair the aligned-automaton candidates are
tried in order; within a candidate the edges are visited breadth-first from
the entry pair and each is verified or repaired once.  A successful
candidate is written back into the student's syntax tree, re-rendered and
verified again from scratch.
"""
from __future__ import annotations

import difflib
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

from ..align import (AlignedAutomaton, CombinatoricsExceeded, Pred, StructuralMismatch, align_edges,
                     align_nodes, ast_skeleton, function_pairs, variable_alignment)
from ..cfa import (BREAK, FALSE, FUNC_ENTRY, FUNC_EXIT, LOOP_ENTRY, LOOP_EXIT, RET, RETURN, SKIP, TRUE,
                   GuardedAction, build_cfa, negate, show)
from ..minilang import ast as A
from ..minilang.check import check_program
from ..minilang.errors import ParseError, UnsupportedFeature
from ..minilang.parser import parse
from ..minilang.pretty import render
from ..minilang.treedist import ast_size, tree_edit_distance
from ..solver.session import ModelValidationError, Session, SolverCrash, SolverProtocolError
from ..vcgen import PRIME, UnsupportedExpression, vocabulary
from .edge import (COMBINATORICS, FAILED, NO_REPAIR, REPAIRED, SM, SMT_ISSUE, TIMEOUT_REASON, UNSUPPORTED,
                   VERIFIED, Budget, EdgeResult, EdgeTask, counterexample_text, repair_edge, verify_edge)
from .sketch import extend

SCHEMA = "cfarepair-report/1"
NOT_EQUIVALENT = "NotEquivalent"


@dataclass
class Config:
    timeout: float = 300.0          # whole program, seconds
    query_budget: float = 10.0      # one solver query, seconds
    k: int = 4
    max_pairings: int = 24
    max_rounds: int = 32
    passes: int = 3                 # repair / concretize / re-verify rounds
    solver: Optional[list] = None
    dump_smt: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        for name in ("timeout", "query_budget"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("k", "max_pairings", "max_rounds", "passes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


# reports

@dataclass
class EdgeReport:
    id: str
    source: str
    target: str
    kind: str
    outcome: str
    reason: Optional[str]
    message: str
    label: list
    changes: list
    counterexamples: list
    rounds: int

    def to_json(self) -> dict:
        return {
            "id": self.id, "source": self.source, "target": self.target, "kind": self.kind,
            "outcome": self.outcome, "reason": self.reason, "message": self.message,
            "label": self.label, "changes": self.changes,
            "counterexamples": self.counterexamples, "rounds": self.rounds,
        }


@dataclass
class FunctionReport:
    student: str
    reference: str
    status: str
    candidate: Optional[int] = None
    pred: list = field(default_factory=list)
    minted: list = field(default_factory=list)
    phantoms: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    passes: int = 0

    def to_json(self) -> dict:
        return {
            "student": self.student, "reference": self.reference, "status": self.status,
            "candidate": self.candidate, "pred": self.pred, "minted": self.minted,
            "phantoms": self.phantoms, "passes": self.passes,
            "edges": [e.to_json() for e in self.edges],
        }


@dataclass
class RepairReport:
    status: str                          # verified | repaired | failed
    reason: Optional[str] = None
    message: str = ""
    functions: list = field(default_factory=list)
    original_source: str = ""
    repaired_source: Optional[str] = None
    diff: str = ""
    tree_distance: Optional[int] = None
    rps: Optional[float] = None
    elapsed: float = 0.0                 # wall time; kept out of the JSON so reports are reproducible
    solver_queries: int = 0

    @property
    def ok(self) -> bool:
        return self.status in (VERIFIED, REPAIRED)

    @property
    def changed_expressions(self) -> int:
        return sum(len(e.changes) for f in self.functions for e in f.edges)

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "schema": SCHEMA, "status": self.status, "reason": self.reason, "message": self.message,
            "functions": [f.to_json() for f in self.functions],
            "original_source": self.original_source, "repaired_source": self.repaired_source,
            "diff": self.diff, "tree_distance": self.tree_distance, "rps": self.rps,
            "changed_expressions": self.changed_expressions,
        }
        if timings:
            out["elapsed"] = round(self.elapsed, 3)
        return out


def unified_diff(before: str, after: str, old: str = "student", new: str = "repaired") -> str:
    lines = difflib.unified_diff(before.splitlines(keepends=True), after.splitlines(keepends=True),
                                 fromfile=old, tofile=new)
    return "".join(lines)


# one function


class _Failure(Exception):
    def __init__(self, reason: str, message: str, report: Optional[FunctionReport] = None):
        super().__init__(message)
        self.reason = reason
        self.message = message
        self.report = report


@dataclass
class _Outcome:
    ok: bool
    reason: Optional[str]
    message: str
    af: AlignedAutomaton
    pred: Pred
    results: dict           # edge index -> EdgeResult
    originals: dict         # edge index -> student label before repair

    @property
    def changed(self) -> bool:
        return any(r.changes for r in self.results.values())


def bfs_order(af: AlignedAutomaton) -> list:
    """Edge indices in breadth-first order from the entry pair; unreachable
    edges follow in their listed order."""
    order, seen = [], {af.entry}
    queue = deque([af.entry])
    while queue:
        node = queue.popleft()
        for i, e in enumerate(af.edges):
            if e.source == node and i not in order:
                order.append(i)
                if e.target not in seen:
                    seen.add(e.target)
                    queue.append(e.target)
    return order + [i for i in range(len(af.edges)) if i not in order]


def _guard_origins(label) -> set:
    return {g.origin[0] for g in label if g.origin is not None}


def _action_origins(label) -> set:
    return {a.origin for g in label for a in g.actions if a.origin is not None}


def _frozen_positions(label, guards: set, actions: set) -> frozenset:
    out = set()
    for i, seg in enumerate(label):
        if seg.origin is not None and seg.origin[0] in guards:
            out.add((i, None))
        for j, act in enumerate(seg.actions):
            if act.origin is not None and act.origin in actions:
                out.add((i, j))
    return frozenset(out)


def _propagate(labels: dict, pending: set, extended, result: EdgeResult):
    """Copy changes at source-backed positions into the labels of edges still
    waiting; the opposite branch of a changed condition gets its negation."""
    guard_map, action_map = {}, {}
    for c in result.changes:
        seg = extended[c.segment]
        if c.action is None:
            if seg.origin is not None:
                nid, polarity = seg.origin
                guard_map[nid] = c.after if polarity else negate(c.after)
        else:
            act = seg.actions[c.action]
            if act.origin is not None:
                action_map[act.origin] = c.after
    if not guard_map and not action_map:
        return
    for i in pending:
        new = []
        for seg in labels[i]:
            guard = seg.guard
            if seg.origin is not None and seg.origin[0] in guard_map:
                g = guard_map[seg.origin[0]]
                guard = g if seg.origin[1] else negate(g)
            acts = tuple(replace(a, value=action_map[a.origin]) if a.origin in action_map else a
                         for a in seg.actions)
            new.append(GuardedAction(guard, acts, seg.origin, seg.branch))
        labels[i] = tuple(new)


class _FunctionContext:
    """Vocabularies and call-symbol tables for one function pair."""

    def __init__(self, student: A.Program, reference: A.Program, index: int):
        self.fs = student.functions[index]
        self.fr = reference.functions[index]
        earlier_s = student.functions[:index]
        earlier_r = reference.functions[:index]
        self.callees_s = {f.name: f for f in earlier_s}
        self.callees_r = {f.name: f for f in earlier_r}
        # paired callees share one uninterpreted symbol, named after the reference
        self.symbols_s = {s.name: r.name for s, r in zip(earlier_s, earlier_r)}
        self.symbols_r = {r.name: r.name for r in earlier_r}
        self.functions = {r.name: s.name for s, r in zip(earlier_s, earlier_r)}

    def vocabularies(self, pred: Pred):
        vs = vocabulary(self.fs, PRIME, self.callees_s, self.symbols_s)
        for m in pred.minted:
            vs.variables.setdefault(m.name, m)
        vr = vocabulary(self.fr, "", self.callees_r, self.symbols_r)
        return vs, vr


def _run_automaton(ctx: _FunctionContext, af: AlignedAutomaton, pred: Pred, session: Session,
                   budget: Budget, config: Config, verify_only: bool) -> _Outcome:
    vs, vr = ctx.vocabularies(pred)
    labels = {i: e.student_label for i, e in enumerate(af.edges)}
    originals = dict(labels)
    pending = set(labels)
    frozen_guards, frozen_actions = set(), set()
    results = {}
    for i in bfs_order(af):
        e = af.edges[i]
        pending.discard(i)
        label = labels[i]
        originals[i] = label
        task = EdgeTask(label, e.reference_label, vs, vr, pred.pairs, e.target[1].kind == FUNC_EXIT,
                        pred.renaming(), ctx.functions,
                        _frozen_positions(label, frozen_guards, frozen_actions))
        if budget.exhausted:
            return _Outcome(False, TIMEOUT_REASON, "global budget exhausted", af, pred, results, originals)
        try:
            if verify_only:
                res = verify_edge(task, session, budget)
                if not res.ok and res.reason == NO_REPAIR:
                    res.reason, res.message = NOT_EQUIVALENT, "edge is not equivalent"
            else:
                res = repair_edge(task, session, budget, config.k, config.max_rounds)
        except UnsupportedExpression as exc:
            res = EdgeResult(FAILED, label, UNSUPPORTED, str(exc))
        except (SolverCrash, SolverProtocolError, ModelValidationError) as exc:
            res = EdgeResult(FAILED, label, SMT_ISSUE, str(exc))
        results[i] = res
        if not res.ok:
            return _Outcome(False, res.reason, f"edge {e.id}: {res.message}", af, pred, results, originals)
        if res.changes:
            _propagate(labels, pending, extend(label, e.reference_label, pred.renaming()), res)
        frozen_guards |= _guard_origins(label)
        frozen_actions |= _action_origins(label)
    return _Outcome(True, None, "", af, pred, results, originals)


def _edge_reports(outcome: _Outcome) -> list:
    out = []
    for i, e in enumerate(outcome.af.edges):
        res = outcome.results.get(i)
        if res is None:
            continue
        out.append(EdgeReport(
            e.id, f"{e.source[1]}/{e.source[0]}'", f"{e.target[1]}/{e.target[0]}'", e.kind,
            res.status, res.reason, res.message,
            [str(g) for g in res.label],
            [{"hole": c.hole, "segment": c.segment, "action": c.action, "kind": c.kind,
              "before": show(c.before), "after": show(c.after)} for c in res.changes],
            [counterexample_text(ce) for ce in res.counterexamples],
            res.rounds))
    return out


def _function_report(ctx: _FunctionContext, outcome: Optional[_Outcome], status: str,
                     candidate: Optional[int]) -> FunctionReport:
    rep = FunctionReport(ctx.fs.name, ctx.fr.name, status, candidate)
    if outcome is not None:
        rep.pred = [[s, r] for s, r in outcome.pred.pairs]
        rep.minted = [m.name for m in outcome.pred.minted]
        rep.phantoms = list(outcome.pred.phantoms)
        rep.edges = _edge_reports(outcome)
    return rep


def _candidates(ctx: _FunctionContext, config: Config):
    try:
        cs, cr = build_cfa(ctx.fs), build_cfa(ctx.fr)
    except UnsupportedFeature as exc:
        raise _Failure(UNSUPPORTED, str(exc))
    try:
        v = align_nodes(ast_skeleton(ctx.fs), ast_skeleton(ctx.fr), cs, cr)
    except StructuralMismatch as exc:
        raise _Failure(SM, str(exc))
    return align_edges(cs, cr, v, config.max_pairings)


def _search(ctx: _FunctionContext, session: Session, budget: Budget, config: Config,
            verify_only: bool, pred: Optional[Pred] = None) -> tuple:
    """First candidate whose edges all succeed, as ``(index, outcome)``."""
    first = None
    try:
        for index, af in enumerate(_candidates(ctx, config)):
            p = pred if pred is not None else variable_alignment(af)
            outcome = _run_automaton(ctx, af, p, session, budget, config, verify_only)
            if outcome.ok:
                return index, outcome
            if first is None:
                first = (index, outcome)
            if outcome.reason == TIMEOUT_REASON:
                break
    except CombinatoricsExceeded as exc:
        raise _Failure(COMBINATORICS, str(exc))
    if first is None:
        raise _Failure(UNSUPPORTED, "no aligned automaton")
    index, outcome = first
    raise _Failure(outcome.reason, outcome.message, _function_report(ctx, outcome, FAILED, index))


# concretization


class _Patches:
    def __init__(self, fn: A.Function):
        self.fn = fn
        self.nodes = {n.nid: n for n in fn.walk()}
        self.loop_of_part = {}        # nid of a for-loop init/step -> (loop, "init" | "step")
        for n in fn.walk():
            if isinstance(n, A.For):
                if n.init is not None:
                    self.loop_of_part[n.init.nid] = (n, "init")
                if n.step is not None:
                    self.loop_of_part[n.step.nid] = (n, "step")
        self.cond = {}
        self.rhs = {}                  # nid -> expression, or None to delete
        self.before, self.after = {}, {}
        self.start, self.end = {}, {}  # (owner nid, part) -> statements
        self.declare = []

    # anchors

    def after_action(self, origin: int, stmts: list):
        if origin in self.loop_of_part:
            loop, part = self.loop_of_part[origin]
            if part == "init":
                self.before.setdefault(loop.nid, []).extend(stmts)
            else:
                self.end.setdefault((loop.nid, "body"), []).extend(stmts)
            return
        node = self.nodes[origin]
        if isinstance(node, A.Return):
            self.before.setdefault(origin, []).extend(stmts)
        else:
            self.after.setdefault(origin, []).extend(stmts)

    def at_segment(self, seg: GuardedAction, source_node, stmts: list):
        """Place statements where the segment's region begins."""
        if seg.origin is not None:
            nid, polarity = seg.origin
            node = self.nodes[nid]
            if isinstance(node, A.If):
                self.start.setdefault((nid, "then" if polarity else "else"), []).extend(stmts)
            elif polarity:
                self.start.setdefault((nid, "body"), []).extend(stmts)
            else:
                self.after.setdefault(nid, []).extend(stmts)
            return
        self.at_node(source_node, stmts)

    def at_node(self, node, stmts: list):
        if node.kind == FUNC_ENTRY:
            self.start.setdefault((self.fn.nid, "body"), []).extend(stmts)
        elif node.kind == LOOP_EXIT:
            self.after.setdefault(node.owner, []).extend(stmts)
        elif node.kind == LOOP_ENTRY:
            self.start.setdefault((node.owner, "body"), []).extend(stmts)
        else:
            raise _Failure(UNSUPPORTED, f"cannot place new statements at {node}")

    # rewriting

    def apply(self) -> A.Function:
        body = self._stmts(self.fn.body.body, (self.fn.nid, "body"))
        return replace(self.fn, body=replace(self.fn.body, body=tuple(self.declare) + body))

    def _stmts(self, stmts, key) -> tuple:
        out = list(self.start.get(key, ()))
        for s in stmts:
            out += self.before.get(s.nid, ())
            out += self._stmt(s)
            out += self.after.get(s.nid, ())
        out += self.end.get(key, ())
        return tuple(out)

    def _block(self, block: Optional[A.Block], key) -> Optional[A.Block]:
        if block is None:
            extra = tuple(self.start.get(key, ())) + tuple(self.end.get(key, ()))
            return A.Block(extra) if extra else None
        return replace(block, body=self._stmts(block.body, key))

    def _simple(self, s):
        """Patched simple statement, or None when it was deleted."""
        if s is None or s.nid not in self.rhs:
            return s
        new = self.rhs[s.nid]
        if isinstance(s, A.Decl):
            return replace(s, init=new)
        if new is None:
            return None
        return replace(s, value=new)

    def _stmt(self, s) -> list:
        if isinstance(s, (A.Decl, A.Assign, A.Print)):
            new = self._simple(s)
            return [] if new is None else [new]
        if isinstance(s, A.Return):
            if s.nid in self.rhs and self.rhs[s.nid] is not None:
                return [replace(s, value=self.rhs[s.nid])]
            return [s]
        if isinstance(s, A.Block):
            return [self._block(s, (s.nid, "body"))]
        if isinstance(s, A.If):
            cond = self.cond.get(s.nid, s.cond)
            return [replace(s, cond=cond, then=self._block(s.then, (s.nid, "then")),
                            orelse=self._block(s.orelse, (s.nid, "else")))]
        if isinstance(s, A.While):
            return [replace(s, cond=self.cond.get(s.nid, s.cond), body=self._block(s.body, (s.nid, "body")))]
        if isinstance(s, A.For):
            return [replace(s, cond=self.cond.get(s.nid, s.cond), init=self._simple(s.init),
                            step=self._simple(s.step), body=self._block(s.body, (s.nid, "body")))]
        return [s]


def _identity(act) -> bool:
    return act.value == SKIP if act.is_print else act.value == act.target


def _action_stmt(act):
    if act.is_print:
        return A.Print(act.value)
    if isinstance(act.target, A.Var) and act.target.name == RET:
        raise _Failure(UNSUPPORTED, "a new return value has no statement to live in")
    return A.Assign(act.target, act.value)


def _conj(a, b):
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return A.Binary("&&", a, b)


def _inserted_edge(label, kind: str) -> list:
    """Nested conditionals that take the inserted path and then leave."""
    if kind == RETURN:
        value = None
        for seg in label:
            for act in seg.actions:
                if not act.is_print and isinstance(act.target, A.Var) and act.target.name == RET:
                    value = act.value
        if value is None:
            raise _Failure(UNSUPPORTED, "inserted return edge without a return value")
        inner = [A.Return(value)]
    elif kind == BREAK:
        inner = [A.Break()]
    else:
        raise _Failure(UNSUPPORTED, "cannot realize an inserted fall-through edge")
    for seg in reversed(label):
        acts = [_action_stmt(a) for a in seg.actions
                if not _identity(a) and not (not a.is_print and isinstance(a.target, A.Var)
                                             and a.target.name == RET)]
        body = acts + inner
        if seg.guard == TRUE:
            inner = body
        elif not acts and len(inner) == 1 and isinstance(inner[0], A.If) and inner[0].orelse is None:
            inner = [A.If(_conj(seg.guard, inner[0].cond), inner[0].then)]
        else:
            inner = [A.If(seg.guard, A.Block(tuple(body)))]
    return inner


def concretize(fn: A.Function, outcome: _Outcome) -> A.Function:
    """Write the repaired edges back into ``fn``."""
    patches = _Patches(fn)
    af = outcome.af
    for i, e in enumerate(af.edges):
        res = outcome.results.get(i)
        if res is None or not res.changes:
            continue
        original = outcome.originals[i]
        repaired = res.label
        if e.inserted:
            patches.at_node(e.source[0], _inserted_edge(repaired, e.kind))
            continue
        extended = extend(original, e.reference_label, outcome.pred.renaming())
        changed = {(c.segment, c.action) for c in res.changes}
        padded_tail = []
        for s, seg in enumerate(repaired):
            if s >= len(original):
                acts = [_action_stmt(a) for a in seg.actions if not _identity(a)]
                if seg.guard == FALSE or not acts:
                    continue
                padded_tail += acts if seg.guard == TRUE else [A.If(seg.guard, A.Block(tuple(acts)))]
                continue
            ext_seg = extended[s]
            if (s, None) in changed and ext_seg.origin is not None:
                nid, polarity = ext_seg.origin
                patches.cond[nid] = seg.guard if polarity else negate(seg.guard)
            new_acts = []
            for j, act in enumerate(seg.actions):
                if (s, j) not in changed:
                    continue
                if j < len(original[s].actions):
                    origin = original[s].actions[j].origin
                    patches.rhs[origin] = None if _identity(act) else act.value
                elif not _identity(act):
                    new_acts.append(_action_stmt(act))
            if new_acts:
                _place_after_segment(patches, original, s, e, new_acts)
        if padded_tail:
            _place_after_segment(patches, original, len(original) - 1, e, padded_tail)
    fn2 = patches.apply()
    used = {n.name for n in fn2.walk() if isinstance(n, (A.Var, A.Index))}
    decls = tuple(A.Decl(m.type, m.name, m.size) for m in outcome.pred.minted if m.name in used)
    if decls:
        fn2 = replace(fn2, body=replace(fn2.body, body=decls + fn2.body.body))
    return fn2


def _place_after_segment(patches: _Patches, label, s: int, e, stmts: list):
    seg = label[s]
    if seg.actions:
        patches.after_action(seg.actions[-1].origin, stmts)
    else:
        patches.at_segment(seg, e.source[0], stmts)


def hoist_declarations(fn: A.Function) -> A.Function:
    """Move every declaration to the top of the function body; initializers
    stay behind as assignments."""
    decls = {}

    def strip(stmts) -> tuple:
        out = []
        for s in stmts:
            if isinstance(s, A.Decl):
                decls.setdefault(s.name, A.Decl(s.type, s.name, s.size))
                if s.init is not None:
                    out.append(A.Assign(A.Var(s.name), s.init))
            else:
                out.append(visit(s))
        return tuple(out)

    def visit(s):
        if isinstance(s, A.Block):
            return replace(s, body=strip(s.body))
        if isinstance(s, A.If):
            return replace(s, then=visit(s.then), orelse=visit(s.orelse) if s.orelse else None)
        if isinstance(s, (A.While, A.For)):
            if isinstance(s, A.For) and isinstance(s.init, A.Decl):
                d = s.init
                decls.setdefault(d.name, A.Decl(d.type, d.name, d.size))
                s = replace(s, init=A.Assign(A.Var(d.name), d.init) if d.init is not None else None)
            return replace(s, body=visit(s.body))
        return s

    body = strip(fn.body.body)
    return replace(fn, body=replace(fn.body, body=tuple(decls.values()) + body))


def _reparse(program: A.Program) -> A.Program:
    text = render(program)
    try:
        out = parse(text)
        check_program(out)
        return out
    except (ParseError, UnsupportedFeature):
        pass
    hoisted = replace(program, functions=tuple(hoist_declarations(f) for f in program.functions))
    try:
        out = parse(render(hoisted))
        check_program(out)
        return out
    except (ParseError, UnsupportedFeature) as exc:
        raise _Failure(UNSUPPORTED, f"repaired program does not compile: {exc}")


# entry points


def _load(src: str, what: str) -> A.Program:
    try:
        program = parse(src)
        check_program(program)
        return program
    except (ParseError, UnsupportedFeature) as exc:
        raise _Failure(UNSUPPORTED, f"{what}: {exc}")


def _open_session(config: Config) -> Session:
    return Session(config.solver, config.dump_smt, config.seed)


def repair_program(ref_src: str, student_src: str, config: Optional[Config] = None,
                   session: Optional[Session] = None, verify_only: bool = False) -> RepairReport:
    """Repair ``student_src`` against ``ref_src`` (or only check them when
    ``verify_only``)."""
    config = config or Config()
    start = time.monotonic()
    budget = Budget(config.query_budget, start + config.timeout)
    own = session is None
    session = session or _open_session(config)
    before = session.queries
    report = RepairReport(FAILED)
    try:
        report = _repair(ref_src, student_src, config, session, budget, verify_only)
    except SolverCrash as exc:
        report = RepairReport(FAILED, SMT_ISSUE, str(exc))
    finally:
        report.solver_queries = session.queries - before
        if own:
            session.close()
    report.elapsed = time.monotonic() - start
    return report


def _repair(ref_src, student_src, config, session, budget, verify_only) -> RepairReport:
    try:
        reference = _load(ref_src, "reference")
        student = _load(student_src, "student")
    except _Failure as f:
        return RepairReport(FAILED, f.reason, f.message)
    original_text = render(student)
    report = RepairReport(FAILED, original_source=original_text)
    try:
        function_pairs(student, reference)
    except StructuralMismatch as exc:
        report.reason, report.message = SM, str(exc)
        return report
    current = student
    changed = False
    for index in range(len(reference.functions)):
        try:
            current, fn_report = _repair_function(current, reference, index, session, budget, config,
                                                  verify_only)
        except _Failure as f:
            report.reason, report.message = f.reason, f.message
            if f.report is not None:
                report.functions.append(f.report)
            return report
        changed |= fn_report.status == REPAIRED
        report.functions.append(fn_report)
    report.status = REPAIRED if changed else VERIFIED
    report.repaired_source = render(current)
    report.diff = unified_diff(original_text, report.repaired_source)
    report.tree_distance = tree_edit_distance(student, current)
    report.rps = report.tree_distance / ast_size(student)
    return report


def _repair_function(program: A.Program, reference: A.Program, index: int, session: Session,
                     budget: Budget, config: Config, verify_only: bool) -> tuple:
    ctx = _FunctionContext(program, reference, index)
    cand, outcome = _search(ctx, session, budget, config, verify_only)
    if verify_only or not outcome.changed:
        return program, _function_report(ctx, outcome, VERIFIED, cand)
    first = _function_report(ctx, outcome, REPAIRED, cand)
    for attempt in range(1, config.passes + 1):
        fn = concretize(ctx.fs, outcome)
        functions = list(program.functions)
        functions[index] = fn
        program = _reparse(replace(program, functions=tuple(functions)))
        ctx = _FunctionContext(program, reference, index)
        try:
            _search(ctx, session, budget, config, True, outcome.pred)
            first.passes = attempt
            return program, first
        except _Failure as f:
            if f.reason == TIMEOUT_REASON:
                raise
        # another round on the partly repaired function
        try:
            cand, outcome = _search(ctx, session, budget, config, False)
        except _Failure:
            break
        if not outcome.changed:
            first.passes = attempt
            return program, first
        first.edges += _function_report(ctx, outcome, REPAIRED, cand).edges
    raise _Failure(UNSUPPORTED, f"{ctx.fs.name}: the repaired source does not verify",
                   replace(first, status=FAILED))
