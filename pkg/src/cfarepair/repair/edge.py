"""Counter-example guided repair of one aligned edge."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..solver.evaluate import ArrayValue
from ..solver.session import SAT, TIMEOUT, UNSAT, Session, WeightedQuery
from ..solver.terms import (ARRAY, IN_SEQ, INT, OUT_SEQ, REAL, Const, FunDef, Lit, and_, eq, int_lit, lit,
                            rename_funs, render_value, substitute, uf_symbols)
from ..vcgen import EdgeVc, Vocabulary, edge_vc, encodable
from .sketch import extend, impl_space, repair_sketch

W_ORIGINAL = 2
W_ALTERNATIVE = 1
DEFAULT_K = 4
DEFAULT_ROUNDS = 32

VERIFIED, REPAIRED, FAILED = "verified", "repaired", "failed"
# failure reasons
SM, TIMEOUT_REASON, SMT_ISSUE, UNSUPPORTED, COMBINATORICS, NO_REPAIR = (
    "SM", "Timeout", "SmtIssue", "Unsupported", "CombinatoricsExceeded", "NoRepair")


@dataclass
class Budget:
    """Per-query budget capped by a global deadline."""
    per_query: float = 10.0
    deadline: float = float("inf")

    def next(self) -> float:
        return max(0.0, min(self.per_query, self.deadline - time.monotonic()))

    @property
    def exhausted(self) -> bool:
        return time.monotonic() >= self.deadline


@dataclass(frozen=True)
class Change:
    hole: str
    segment: int
    action: Optional[int]
    kind: str
    before: object
    after: object


@dataclass
class CounterExample:
    values: dict          # entry constant name (no suffix) -> value
    funs: dict            # function symbol -> FunDef

    def key(self) -> tuple:
        return tuple(sorted((k, _text(v)) for k, v in self.values.items()))


def _text(v) -> str:
    if isinstance(v, ArrayValue):
        return f"array({v.default}, {sorted(v.entries.items())})"
    return repr(v)


@dataclass
class EdgeResult:
    status: str
    label: tuple                       # student label after repair (or as given)
    reason: Optional[str] = None
    message: str = ""
    changes: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    rounds: int = 0
    candidates: list = field(default_factory=list)     # per round: list of hole choices

    @property
    def ok(self) -> bool:
        return self.status in (VERIFIED, REPAIRED)


@dataclass
class EdgeTask:
    """Everything needed to verify or repair one aligned edge."""
    student_label: tuple
    reference_label: tuple
    student: Vocabulary
    reference: Vocabulary
    pairs: tuple
    at_exit: bool
    renaming: dict                      # reference variable -> student variable
    functions: dict = field(default_factory=dict)   # reference function -> student function
    frozen: frozenset = frozenset()     # (segment, action) positions whose expression must stay

    def vc(self, student_label=None, suffix: str = "") -> EdgeVc:
        label = self.student_label if student_label is None else student_label
        return edge_vc(label, self.reference_label, self.student, self.reference,
                       self.pairs, self.at_exit, suffix)


# verification

def _default(sort: str):
    if sort == INT:
        return 0
    if sort == REAL:
        return Fraction(0)
    if sort in (OUT_SEQ, IN_SEQ):
        return ()
    if sort == ARRAY:
        return ArrayValue(0, {})
    raise ValueError(sort)


def _concrete(value, sort: str, size: Optional[int]):
    if sort == ARRAY and isinstance(value, ArrayValue) and value.fn is not None:
        return ArrayValue(0, {i: value.get(i) for i in range(size or 0)})
    return value


def extract(vc: EdgeVc, verdict, task: EdgeTask) -> CounterExample:
    """Entry values of both sides; values the model leaves open are completed
    through the alignment pairs or defaulted."""
    model = verdict.model or {}
    values = {}
    sizes = {}
    for vocab, ssa in ((task.student, vc.student), (task.reference, vc.reference)):
        for var, c in ssa.entry.items():
            info = vocab.variables.get(var)
            sizes[c.name] = info.size if info is not None else None
    for c in vc.entry_consts():
        if c.name in model:
            values[c.name] = _concrete(model[c.name], c.sort, sizes.get(c.name))
    for s, r in task.pairs:
        cs, cr = vc.student.entry[s], vc.reference.entry[r]
        if cs.name in values and cr.name not in values:
            values[cr.name] = values[cs.name]
        elif cr.name in values and cs.name not in values:
            values[cs.name] = values[cr.name]
    for c in vc.entry_consts():
        values.setdefault(c.name, _default(c.sort))
    funs = {k: v for k, v in verdict.funs.items() if k.startswith("uf:")}
    return CounterExample(values, funs)


def check(task: EdgeTask, session: Session, budget: Budget, label=None) -> tuple:
    """``(status, counterexample)``; control mismatches are looked for first."""
    vc = task.vc(label)
    for stage in vc.stages():
        b = budget.next()
        v = session.check_sat(stage, b)
        if v.status == SAT:
            return SAT, extract(vc, v, task)
        if v.status != UNSAT:
            return v.status, None
    return UNSAT, None


def verify_edge(task: EdgeTask, session: Session, budget: Budget) -> EdgeResult:
    status, ce = check(task, session, budget)
    if status == UNSAT:
        return EdgeResult(VERIFIED, task.student_label)
    if status == SAT:
        return EdgeResult(FAILED, task.student_label, NO_REPAIR, "verification failed",
                          counterexamples=[ce])
    return _solver_failure(status, task.student_label)


def _solver_failure(status: str, label) -> EdgeResult:
    if status == TIMEOUT:
        return EdgeResult(FAILED, label, TIMEOUT_REASON, "solver budget exhausted")
    return EdgeResult(FAILED, label, SMT_ISSUE, f"solver answered {status}")


# synthesis

def _instantiate(task: EdgeTask, sketch_label, ce: CounterExample, index: int) -> tuple:
    """Hard constraint: the sketch agrees with the reference on ``ce``."""
    suffix = f"#{index}"
    vc = task.vc(sketch_label, suffix)
    body = and_(vc.student.formula, vc.reference.formula, vc.reference.defined, vc.obligation)
    values = {}
    for c in vc.entry_consts():
        v = ce.values[c.name[: -len(suffix)]]
        values[c.name] = Lit(c.sort, _literal(v, c.sort))
    body = substitute(body, values)
    rename = {}
    defs = []
    for name in sorted(uf_symbols(body)):
        local = f"{name}{suffix}"
        rename[name] = local
        fun = ce.funs.get(name)
        if fun is None:
            args, res = uf_symbols(body)[name]

            params = tuple(Const(s, f"x!{i}") for i, s in enumerate(args))
            fun = FunDef(name, params, lit(_default(res), res))
        defs.append(FunDef(local, fun.params, fun.body))
    return rename_funs(body, rename), defs


def _literal(v, sort: str):
    if sort == ARRAY:
        return (v.default, dict(v.entries))
    if sort == REAL:
        return Fraction(v)
    return v


def spaces_for(task: EdgeTask, form) -> dict:
    """Implementation spaces; frozen positions keep their singleton space and
    candidates the encoder rejects (wrong sort, unknown name) are dropped."""
    spaces = {}
    for hole, pos in zip(form.holes, form.positions):
        if (pos.segment, pos.action) in task.frozen:
            continue
        space = impl_space(hole, task.student_label, task.reference_label,
                           task.renaming, task.functions)
        spaces[hole.id] = (space[0],) + tuple(c for c in space[1:] if encodable(task.student, hole, c))
    return spaces


def repair_edge(task: EdgeTask, session: Session, budget: Budget,
                k: int = DEFAULT_K, max_rounds: int = DEFAULT_ROUNDS) -> EdgeResult:
    status, ce = check(task, session, budget)
    if status == UNSAT:
        return EdgeResult(VERIFIED, task.student_label)
    if status != SAT:
        return _solver_failure(status, task.student_label)

    extended = extend(task.student_label, task.reference_label, task.renaming)
    form = repair_sketch(extended)
    form = form.with_spaces(spaces_for(task, form))
    log = [ce]
    seen = {ce.key()}
    hard_parts, defs = [], []
    result = EdgeResult(FAILED, task.student_label, NO_REPAIR, "")
    for rnd in range(1, max_rounds + 1):
        result.rounds = rnd
        for i in range(len(hard_parts), len(log)):
            h, d = _instantiate(task, form.label, log[i], i + 1)
            hard_parts.append(h)
            defs += d
        hard = [h.domain() for h in form.holes] + hard_parts
        soft = []
        for h in form.holes:
            soft.append((eq(h.selector, int_lit(0)), W_ORIGINAL))
            soft += [(eq(h.selector, int_lit(i)), W_ALTERNATIVE) for i in range(1, len(h.space))]
        if budget.exhausted:
            return _finish(result, TIMEOUT_REASON, "global budget exhausted", log)
        q = WeightedQuery(hard, soft, budget.next(), tuple(h.selector for h in form.holes), tuple(defs))
        status, models = session.optimize(q, k)
        if status == UNSAT:
            return _finish(result, NO_REPAIR, "no candidate in the implementation space", log)
        if status != SAT:
            reason = TIMEOUT_REASON if status == TIMEOUT else SMT_ISSUE
            return _finish(result, reason, f"optimization answered {status}", log)
        choices = [{h.id: int(m.model.get(h.selector.name, 0)) for h in form.holes} for m in models]
        result.candidates.append(choices)
        for choice in choices:
            label = form.fill(choice)
            status, ce = check(task, session, budget, label)
            if status == UNSAT:
                result.status, result.reason, result.label = REPAIRED, None, label
                result.changes = _changes(form, choice)
                result.counterexamples = log
                return result
            if status != SAT:
                reason = TIMEOUT_REASON if status == TIMEOUT else SMT_ISSUE
                return _finish(result, reason, f"verification answered {status}", log)
            if ce.key() not in seen:
                seen.add(ce.key())
                log.append(ce)
    return _finish(result, NO_REPAIR, f"no verified candidate after {max_rounds} rounds", log)


def _finish(result: EdgeResult, reason: str, message: str, log: list) -> EdgeResult:
    result.status, result.reason, result.message = FAILED, reason, message
    result.counterexamples = log
    return result


def _changes(form, choice: dict) -> list:
    out = []
    for h, pos in zip(form.holes, form.positions):
        i = choice.get(h.id, 0)
        if i:
            out.append(Change(str(h), pos.segment, pos.action, h.kind, h.original, h.space[i]))
    return out


def counterexample_text(ce: CounterExample) -> dict:
    """Deterministic rendering for reports."""
    out = {}
    for name in sorted(ce.values):
        v = ce.values[name]
        sort = _sort_of_value(name, v)
        out[name] = render_value(_literal(v, sort), sort) if sort else repr(v)
    return out


def _sort_of_value(name: str, v):
    if isinstance(v, ArrayValue):
        return ARRAY
    if isinstance(v, bool):
        return None
    if isinstance(v, int):
        return INT
    if isinstance(v, Fraction):
        return REAL
    if isinstance(v, tuple):
        return OUT_SEQ if name.startswith("__out") else IN_SEQ
    return None
