"""SMT-LIB 2 sessions over a child-process pipe."""
from __future__ import annotations

import itertools
import os
import queue
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import sexpr
from .evaluate import ModelEvaluator, Undefined, term_of_sexpr, value_of_sexpr
from .terms import (BUILTIN_FUNS, PREAMBLE, FunDef, Term, Const, conj, free_consts, uf_symbols, render_value)

SOLVER_ENV = "CFAREPAIR_SOLVER"
DEFAULT_QUERY_BUDGET = 10.0
GRACE = 3.0  # seconds allowed beyond the solver's own timeout before the process is killed

SAT, UNSAT, UNKNOWN, TIMEOUT = "sat", "unsat", "unknown", "timeout"


class SolverCrash(RuntimeError):
    """The solver process died or produced no reply."""


class SolverProtocolError(RuntimeError):
    """The solver answered with an error message."""


class ModelValidationError(RuntimeError):
    """A model returned by the solver does not satisfy the asserted formulas."""


@dataclass
class Verdict:
    status: str
    model: Optional[dict] = None
    funs: dict = field(default_factory=dict)
    cost: Optional[int] = None
    wall_time: float = 0.0
    solver: str = ""
    reason: str = ""

    @property
    def sat(self) -> bool:
        return self.status == SAT


@dataclass
class WeightedQuery:
    hard: list
    soft: list                      # (term, weight)
    budget: float = DEFAULT_QUERY_BUDGET
    distinguish: tuple = ()         # consts whose values identify a model (hole selectors)
    defs: tuple = ()                # FunDefs emitted as define-fun before the constraints

    def __post_init__(self):
        if not self.hard:
            raise ValueError("a weighted query needs at least one hard constraint")
        if any(w <= 0 for _, w in self.soft):
            raise ValueError("soft constraint weights must be positive")


def solver_command() -> list:
    path = os.environ.get(SOLVER_ENV) or shutil.which("z3") or "z3"
    return [path, "-in", "-smt2"]


def declarations(terms: Sequence[Term], skip: Sequence[str] = ()) -> list:
    consts, ufs = {}, {}
    for t in terms:
        free_consts(t, consts)
        uf_symbols(t, ufs)
    out = []
    for name in sorted(consts):
        if name not in skip:
            out.append(f"(declare-const {Const(consts[name], name)} {consts[name]})")
    for name in sorted(ufs):
        if name not in skip:
            args, res = ufs[name]
            out.append(f"(declare-fun |{name}| ({' '.join(args)}) {res})")
    return out


def define_funs(defs: Sequence[FunDef]) -> list:
    out = []
    for d in defs:
        params = " ".join(f"({p} {p.sort})" for p in d.params)
        out.append(f"(define-fun |{d.name}| ({params}) {d.body.sort} {d.body})")
    return out


class Session:
    """One solver process.  Every query runs inside push/pop so the base
    context only ever holds the shared preamble."""

    _ids = itertools.count()

    def __init__(self, command: Optional[list] = None, dump_dir: Optional[str] = None,
                 seed: int = 0, use_assert_soft: bool = True):
        self.command = command or solver_command()
        self.dump_dir = Path(dump_dir) if dump_dir else None
        self.seed = seed
        self.use_assert_soft = use_assert_soft
        self.proc = None
        self.depth = 0
        self.queries = 0
        self._marker = 0
        self._name = None
        self._lines: queue.Queue = queue.Queue()
        self.tag = f"s{next(self._ids)}"

    # process management

    def start(self):
        try:
            self.proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT, text=True, bufsize=1)
        except OSError as exc:
            raise SolverCrash(f"cannot start solver {self.command[0]!r}: {exc}") from exc
        self._lines = queue.Queue()
        threading.Thread(target=self._pump, args=(self.proc, self._lines), daemon=True).start()
        self.depth = 0
        self._send(self._header())
        self._roundtrip("", 30.0)

    def _header(self) -> str:
        return (
            "(set-option :print-success false)\n"
            "(set-option :produce-models true)\n"
            f"(set-option :random-seed {self.seed})\n"
            "(set-logic ALL)\n" + PREAMBLE)

    @staticmethod
    def _pump(proc, lines):
        for line in proc.stdout:
            lines.put(line)
        lines.put(None)

    def close(self):
        if self.proc is not None:
            try:
                self.proc.stdin.write("(exit)\n")
                self.proc.stdin.flush()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.proc.kill()
            self.proc = None

    def kill(self):
        if self.proc is not None:
            self.proc.kill()
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                pass
            self.proc = None
        self.depth = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def ensure(self):
        if self.proc is None or self.proc.poll() is not None:
            self.start()

    # protocol

    def _send(self, text: str):
        try:
            self.proc.stdin.write(text if text.endswith("\n") else text + "\n")
            self.proc.stdin.flush()
        except (OSError, ValueError) as exc:
            self.proc = None
            raise SolverCrash(f"solver pipe closed: {exc}") from exc

    def _roundtrip(self, commands: str, timeout: float) -> str:
        """Send commands followed by an echo marker; return everything before it."""
        self._marker += 1
        marker = f"__done_{self._marker}__"
        self._send(commands + f'\n(echo "{marker}")')
        deadline = time.monotonic() + timeout
        out = []
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("solver did not answer in time")
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                raise TimeoutError("solver did not answer in time") from None
            if line is None:
                self.proc = None
                raise SolverCrash("solver process exited")
            if line.strip().strip('"') == marker:
                break
            out.append(line)
        text = "".join(out)
        for item in _errors(text):
            raise SolverProtocolError(item)
        return text

    def version(self) -> str:
        if self._name is None:
            self.ensure()
            reply = self._roundtrip("(get-info :name)\n(get-info :version)", 10.0)
            parts = [x for x in sexpr.parse_all(reply)]
            name = parts[0][1].strip('"') if parts else "?"
            ver = parts[1][1].strip('"') if len(parts) > 1 else "?"
            self._name = f"{name} {ver}"
        return self._name

    # scripts

    def _dump(self, kind: str, body: str):
        if self.dump_dir is None:
            return
        self.dump_dir.mkdir(parents=True, exist_ok=True)
        path = self.dump_dir / f"{self.tag}-{self.queries:05d}-{kind}.smt2"
        path.write_text(self._header() + body + "(exit)\n")

    def _push(self):
        self.depth += 1
        return "(push 1)\n"

    def _pop(self):
        self.depth -= 1
        return "(pop 1)"

    def _finish(self):
        try:
            self._roundtrip(self._pop(), 10.0)
        except (TimeoutError, SolverCrash):
            self.kill()
        assert self.depth == 0

    # queries

    def check_sat(self, formulas, budget: float = DEFAULT_QUERY_BUDGET,
                  defs: Sequence[FunDef] = (), validate: bool = True) -> Verdict:
        """Satisfiability of the conjunction of ``formulas``."""
        if isinstance(formulas, Term):
            formulas = [formulas]
        formulas = list(formulas)
        if budget <= 0:
            return Verdict(TIMEOUT, reason="no budget")
        self.ensure()
        self.queries += 1
        names = [d.name for d in defs]
        decls = define_funs(defs) + declarations(formulas, skip=names)
        asserts = [f"(assert {f})" for f in formulas]
        body = "\n".join(decls + asserts) + "\n"
        self._dump("check", body + "(check-sat)\n")
        ms = max(1, int(budget * 1000))
        start = time.monotonic()
        try:
            self._roundtrip(f"(set-option :timeout {ms})\n" + self._push() + body, 30.0)
            answer = self._roundtrip("(check-sat)", budget + GRACE).strip()
        except TimeoutError:
            self.kill()
            return Verdict(TIMEOUT, wall_time=time.monotonic() - start, reason="killed")
        try:
            verdict = self._interpret(answer, formulas, start, validate, defs)
        finally:
            if self.proc is not None:
                self._finish()
        return verdict

    def _interpret(self, answer, formulas, start, validate, defs) -> Verdict:
        elapsed = time.monotonic() - start
        if answer == "unsat":
            return Verdict(UNSAT, wall_time=elapsed, solver=self._name or "")
        if answer == "sat":
            model, funs = self._model(formulas)
            for d in defs:
                funs[d.name] = d
            if validate:
                validate_model(formulas, model, funs)
            return Verdict(SAT, model, funs, wall_time=elapsed, solver=self._name or "")
        if answer == "unknown":
            reason = self._reason()
            status = TIMEOUT if ("timeout" in reason or "canceled" in reason) else UNKNOWN
            return Verdict(status, wall_time=elapsed, reason=reason)
        raise SolverProtocolError(f"unexpected answer {answer!r}")

    def _reason(self) -> str:
        try:
            reply = self._roundtrip("(get-info :reason-unknown)", 10.0)
            return str(sexpr.parse_one(reply)[1]).strip('"')
        except (SolverProtocolError, sexpr.SexprError, IndexError, TimeoutError):
            return "unknown"

    def _model(self, formulas) -> tuple:
        consts = {}
        ufs = {}
        for f in formulas:
            free_consts(f, consts)
            uf_symbols(f, ufs)
        funs = {}
        text = ""
        if consts:
            names = " ".join(str(Const(consts[n], n)) for n in sorted(consts))
            text = self._roundtrip(f"(get-value ({names}))", 30.0)
        need_model = bool(ufs) or "as-array" in text
        if need_model:
            funs = self._functions()
        model = {}
        if consts:
            for name, value in sexpr.parse_one(text):
                model[name] = value_of_sexpr(value, funs)
        return model, funs

    def _functions(self) -> dict:
        reply = self._roundtrip("(get-model)", 30.0)
        items = sexpr.parse_one(reply)
        funs = {}
        for item in items:
            if not isinstance(item, list) or not item or item[0] != "define-fun":
                continue
            _, name, params, _sort, body = item
            if not params or name in BUILTIN_FUNS:
                continue
            scope = {p[0]: _sort_of(p[1]) for p in params}
            consts = tuple(Const(scope[p[0]], p[0]) for p in params)
            funs[name] = FunDef(name, consts, term_of_sexpr(body, scope))
        return funs

    def optimize(self, q: WeightedQuery, k: int = 4) -> tuple:
        """Up to ``k`` models of minimal violated soft weight.

        Returns ``(status, [Verdict...])``; later models differ from earlier
        ones on ``q.distinguish`` and have the same cost."""
        if q.budget <= 0:
            return TIMEOUT, []
        if self.use_assert_soft:
            try:
                return self._optimize_soft(q, k)
            except SolverProtocolError:
                self.use_assert_soft = False
                self.ensure()
        return self._optimize_linear(q, k)

    def _optimize_soft(self, q: WeightedQuery, k: int):
        self.ensure()
        self.queries += 1
        names = [d.name for d in q.defs]
        decls = define_funs(q.defs) + declarations(list(q.hard) + [t for t, _ in q.soft], skip=names)
        lines = decls + [f"(assert {h})" for h in q.hard]
        lines += [f"(assert-soft {t} :weight {w} :id cost)" for t, w in q.soft]
        body = "\n".join(lines) + "\n"
        self._dump("opt", body + "(check-sat)\n(get-objectives)\n")
        deadline = time.monotonic() + q.budget
        results, best = [], None
        ms = max(1, int(q.budget * 1000))
        try:
            self._roundtrip(f"(set-option :timeout {ms})\n" + self._push() + body, 30.0)
            while len(results) < k:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                answer = self._roundtrip("(check-sat)", remaining + GRACE).strip()
                if answer != "sat":
                    if not results:
                        if answer == "unsat":
                            return UNSAT, []
                        reason = self._reason()
                        timed_out = "timeout" in reason or "canceled" in reason
                        return (TIMEOUT if timed_out else UNKNOWN), []
                    break
                cost = self._objective()
                if best is not None and cost > best:
                    break
                best = cost
                model, funs = self._model(list(q.hard))
                funs.update({d.name: d for d in q.defs})
                validate_model(q.hard, model, funs)
                results.append(Verdict(SAT, model, funs, cost=cost))
                self._roundtrip(_block(q.distinguish, model), 10.0)
        except TimeoutError:
            self.kill()
            return (SAT, results) if results else (TIMEOUT, [])
        finally:
            if self.proc is not None and self.depth:
                self._finish()
        return SAT, results

    def _objective(self) -> int:
        reply = self._roundtrip("(get-objectives)", 10.0)
        parsed = sexpr.parse_one(reply)
        # (objectives (cost 3)) or (objectives (3))
        for entry in parsed[1:]:
            value = entry[-1]
            return int(value_of_sexpr(value))
        return 0

    def _optimize_linear(self, q: WeightedQuery, k: int):
        from .terms import App, INT, int_lit, ite, app
        cost = app("+", INT, int_lit(0), *[ite(t, int_lit(0), int_lit(w)) for t, w in q.soft])
        total = sum(w for _, w in q.soft)
        deadline = time.monotonic() + q.budget
        for bound in range(total + 1):
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return TIMEOUT, []
            bounded = list(q.hard) + [app("<=", "Bool", cost, int_lit(bound))]
            v = self.check_sat(bounded, remaining, q.defs)
            if v.status == UNSAT:
                continue
            if v.status != SAT:
                return v.status, []
            results = [Verdict(SAT, v.model, v.funs, cost=bound)]
            blocks = []
            while len(results) < k:
                blocks.append(_block_term(q.distinguish, results[-1].model))
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                v = self.check_sat(bounded + blocks, remaining, q.defs)
                if v.status != SAT:
                    break
                results.append(Verdict(SAT, v.model, v.funs, cost=bound))
            return SAT, results
        return UNSAT, []


def _sort_of(sx) -> str:
    return sx if isinstance(sx, str) else "(" + " ".join(_sort_of(x) for x in sx) + ")"


def _errors(text: str) -> list:
    out = []
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("(error"):
            out.append(s)
    return out


def _block_term(consts, model):
    from .terms import eq, lit, not_, and_
    return not_(and_(*[eq(c, lit(model[c.name], c.sort)) for c in consts]))


def _block(consts, model) -> str:
    if not consts:
        return "(assert false)"
    return f"(assert {_block_term(consts, model)})"


def validate_model(formulas, model: dict, funs: dict):
    """Re-evaluate every formula under ``model`` with the in-repo evaluator."""
    ev = ModelEvaluator(model, funs)
    for f in formulas:
        try:
            ok = ev.eval(f, model)
        except Undefined:
            continue
        if ok is not True:
            raise ModelValidationError(f"model does not satisfy {str(f)[:200]}")
