"""Concrete interpreter.  This is the reference oracle for equivalence claims,
so it shares no code with the formula encoder."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import ast as A
from .check import expr_type
from .errors import MiniRuntimeError, Nontermination

DEFAULT_FUEL = 100_000


@dataclass(frozen=True)
class IoTrace:
    input: tuple
    output: tuple
    cursor: int


@dataclass(frozen=True)
class Result:
    ret: object
    trace: IoTrace


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


def c_div(a: int, b: int) -> int:
    if b == 0:
        raise MiniRuntimeError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_mod(a: int, b: int) -> int:
    return a - b * c_div(a, b)


def convert(value, type_: str):
    if type_ == "int":
        if isinstance(value, float):
            if not math.isfinite(value):
                raise MiniRuntimeError("non-finite value converted to int")
            return int(value)  # truncates toward zero
        return int(value)
    if type_ == "float":
        return float(value)
    return value


def truthy(value) -> bool:
    return bool(value)


def output_item(value, type_: str):
    if type_ == "float":
        return ("float", float(value))
    return ("int", int(value))


class Machine:
    """Evaluates expressions and statements over a flat per-call frame."""

    def __init__(self, program: Optional[A.Program], inputs: Sequence = (), fuel: int = DEFAULT_FUEL):
        self.functions = {f.name: f for f in program.functions} if program else {}
        self.inputs = tuple(inputs)
        self.cursor = 0
        self.output = []
        self.fuel = fuel

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise Nontermination("step budget exhausted")

    # expressions

    def eval(self, e, frame: dict, env: dict):
        if isinstance(e, (A.IntLit, A.FloatLit, A.BoolLit)):
            return e.value
        if isinstance(e, A.Var):
            return frame[e.name]
        if isinstance(e, A.Index):
            i = self.eval(e.index, frame, env)
            arr = frame[e.name]
            i = convert(i, "int")
            if not 0 <= i < len(arr):
                raise MiniRuntimeError(f"index {i} out of bounds for {e.name}")
            return arr[i]
        if isinstance(e, A.Read):
            if self.cursor >= len(self.inputs):
                raise MiniRuntimeError("read past end of input")
            v = self.inputs[self.cursor]
            self.cursor += 1
            return v
        if isinstance(e, A.Cast):
            return convert(self.eval(e.operand, frame, env), e.type)
        if isinstance(e, A.Unary):
            v = self.eval(e.operand, frame, env)
            if e.op == "!":
                return not truthy(v)
            return -v if not isinstance(v, bool) else -int(v)
        if isinstance(e, A.Binary):
            return self.binary(e, frame, env)
        if isinstance(e, A.Call):
            args = [self.eval(a, frame, env) for a in e.args]
            return self.call(self.functions[e.name], args)
        raise TypeError(f"cannot evaluate {e!r}")

    def binary(self, e: A.Binary, frame, env):
        op = e.op
        if op == "&&":
            return truthy(self.eval(e.left, frame, env)) and truthy(self.eval(e.right, frame, env))
        if op == "||":
            return truthy(self.eval(e.left, frame, env)) or truthy(self.eval(e.right, frame, env))
        a = self.eval(e.left, frame, env)
        b = self.eval(e.right, frame, env)
        a = int(a) if isinstance(a, bool) else a
        b = int(b) if isinstance(b, bool) else b
        is_float = isinstance(a, float) or isinstance(b, float)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if is_float:
                if b == 0:
                    raise MiniRuntimeError("division by zero")
                return a / b
            return c_div(a, b)
        if op == "%":
            return c_mod(a, b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        raise TypeError(f"unknown operator {op}")

    # statements

    def assign(self, target, value, frame, env):
        info = env[target.name]
        if isinstance(target, A.Var):
            frame[target.name] = convert(value, info.type)
        else:
            i = convert(self.eval(target.index, frame, env), "int")
            arr = frame[target.name]
            if not 0 <= i < len(arr):
                raise MiniRuntimeError(f"index {i} out of bounds for {target.name}")
            arr[i] = convert(value, "int")

    def exec_block(self, block: A.Block, frame, env):
        for s in block.body:
            self.exec(s, frame, env)

    def exec(self, s, frame, env):
        self.tick()
        if isinstance(s, A.Decl):
            if s.init is not None:
                frame[s.name] = convert(self.eval(s.init, frame, env), s.type)
        elif isinstance(s, A.Assign):
            self.assign(s.target, self.eval(s.value, frame, env), frame, env)
        elif isinstance(s, A.Print):
            value = self.eval(s.value, frame, env)
            self.output.append(output_item(value, expr_type(s.value, env, self.functions)))
        elif isinstance(s, A.Block):
            self.exec_block(s, frame, env)
        elif isinstance(s, A.If):
            if truthy(self.eval(s.cond, frame, env)):
                self.exec_block(s.then, frame, env)
            elif s.orelse is not None:
                self.exec_block(s.orelse, frame, env)
        elif isinstance(s, A.While):
            try:
                while truthy(self.eval(s.cond, frame, env)):
                    self.tick()
                    self.exec_block(s.body, frame, env)
            except _Break:
                pass
        elif isinstance(s, A.For):
            if s.init is not None:
                self.exec(s.init, frame, env)
            try:
                while truthy(self.eval(s.cond, frame, env)):
                    self.tick()
                    self.exec_block(s.body, frame, env)
                    if s.step is not None:
                        self.exec(s.step, frame, env)
            except _Break:
                pass
        elif isinstance(s, A.Break):
            raise _Break()
        elif isinstance(s, A.Return):
            value = None if s.value is None else self.eval(s.value, frame, env)
            raise _Return(value)
        elif isinstance(s, A.Empty):
            pass
        else:
            raise TypeError(f"cannot execute {s!r}")

    def call(self, fn: A.Function, args):
        env = A.variables_of(fn)
        frame = fresh_frame(fn, env)
        for p, v in zip(fn.params, args):
            frame[p.name] = convert(v, p.type)
        try:
            self.exec_block(fn.body, frame, env)
        except _Return as r:
            if r.value is not None:
                frame["ret"] = convert(r.value, fn.ret_type)
        return frame["ret"]


def zero(info: A.VarInfo):
    if info.is_array:
        return [0] * info.size
    return 0.0 if info.type == "float" else 0


def fresh_frame(fn: A.Function, env: dict) -> dict:
    frame = {name: zero(info) for name, info in env.items()}
    frame["ret"] = 0.0 if fn.ret_type == "float" else 0
    return frame


def interpret(program: A.Program, inputs: Sequence = (), fuel: int = DEFAULT_FUEL) -> Result:
    """Run the entry function.  Its parameters take the leading inputs; read()
    consumes the rest.  Raises Nontermination or MiniRuntimeError."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    m = Machine(program, inputs, fuel)
    fn = program.entry
    if len(m.inputs) < len(fn.params):
        raise MiniRuntimeError("not enough inputs for the entry parameters")
    m.cursor = len(fn.params)
    ret = m.call(fn, list(m.inputs[: len(fn.params)]))
    if fn.ret_type == "void":
        ret = None
    return Result(ret, IoTrace(m.inputs, tuple(m.output), m.cursor))


def observe(program: A.Program, inputs: Sequence = (), fuel: int = DEFAULT_FUEL) -> tuple:
    """Comparable summary of one run: ok/error/nontermination."""
    try:
        r = interpret(program, inputs, fuel)
    except Nontermination:
        return ("nontermination",)
    except MiniRuntimeError as exc:
        return ("error", str(exc))
    return ("ok", r.ret, r.trace.output)
