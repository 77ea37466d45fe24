"""Differential checking of a repaired program against the reference with
the interpreter."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import prod
from typing import Optional, Sequence

from ..minilang import ast as A
from ..minilang.interp import DEFAULT_FUEL, observe
from ..minilang.parser import parse

MAX_EXHAUSTIVE = 262_144
SAMPLES = 10_000


@dataclass(frozen=True)
class Slot:
    """Values for one input position: an inclusive integer range or an
    explicit list."""
    lo: int = 0
    hi: int = 0
    values: Optional[tuple] = None

    @property
    def width(self) -> int:
        return len(self.values) if self.values is not None else self.hi - self.lo + 1

    def all(self):
        return self.values if self.values is not None else range(self.lo, self.hi + 1)

    def sample(self, rng: random.Random):
        if self.values is not None:
            return rng.choice(self.values)
        return rng.randint(self.lo, self.hi)

    @classmethod
    def parse(cls, spec) -> "Slot":
        if isinstance(spec, dict):
            if "values" in spec:
                return cls(values=tuple(spec["values"]))
            return cls(int(spec["lo"]), int(spec["hi"]))
        lo, hi = spec
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return cls(int(lo), int(hi))


@dataclass(frozen=True)
class Domain:
    """Input vectors for the oracle.  ``sequences`` lists whole input vectors
    and takes precedence over ``slots``."""
    slots: tuple = ()
    sequences: Optional[tuple] = None
    seed: int = 0

    @property
    def exhaustive(self) -> bool:
        if self.sequences is not None:
            return True
        return prod(s.width for s in self.slots) <= MAX_EXHAUSTIVE

    def inputs(self):
        if self.sequences is not None:
            yield from (tuple(s) for s in self.sequences)
        elif self.exhaustive:
            yield from itertools.product(*(s.all() for s in self.slots))
        else:
            rng = random.Random(self.seed)
            for _ in range(SAMPLES):
                yield tuple(s.sample(rng) for s in self.slots)

    @classmethod
    def parse(cls, spec: dict) -> "Domain":
        if "sequences" in spec:
            return cls(sequences=tuple(tuple(x) for x in spec["sequences"]), seed=spec.get("seed", 0))
        return cls(tuple(Slot.parse(s) for s in spec.get("slots", ())), seed=spec.get("seed", 0))

    def to_json(self) -> dict:
        if self.sequences is not None:
            return {"sequences": [list(s) for s in self.sequences]}
        return {"slots": [{"values": list(s.values)} if s.values is not None else [s.lo, s.hi]
                          for s in self.slots], "seed": self.seed}


@dataclass
class Evidence:
    checked: int = 0
    skipped: int = 0                    # inputs on which the reference itself fails
    exhaustive: bool = True
    divergences: list = field(default_factory=list)   # (inputs, reference, candidate)

    @property
    def passed(self) -> bool:
        return not self.divergences

    def to_json(self, limit: int = 5) -> dict:
        return {
            "checked": self.checked, "skipped": self.skipped, "exhaustive": self.exhaustive,
            "passed": self.passed, "divergences": len(self.divergences),
            "examples": [{"input": list(i), "reference": repr(r), "candidate": repr(c)}
                         for i, r, c in self.divergences[:limit]],
        }


def soundness_check(reference, candidate, domain: Domain, fuel: int = DEFAULT_FUEL,
                    stop_after: Optional[int] = None) -> Evidence:
    """Compare observable behavior (return value and output) on every input
    where the reference terminates normally."""
    ref = parse(reference) if isinstance(reference, str) else reference
    cand = parse(candidate) if isinstance(candidate, str) else candidate
    ev = Evidence(exhaustive=domain.exhaustive)
    for inputs in domain.inputs():
        expected = observe(ref, inputs, fuel)
        if expected[0] != "ok":
            ev.skipped += 1
            continue
        ev.checked += 1
        got = observe(cand, inputs, fuel)
        if got != expected:
            ev.divergences.append((tuple(inputs), expected, got))
            if stop_after is not None and len(ev.divergences) >= stop_after:
                break
    return ev


def entry_arity(program: A.Program) -> int:
    return len(program.entry.params)


def divergent_inputs(reference: A.Program, candidate: A.Program, inputs: Sequence) -> list:
    return [i for i in inputs if observe(reference, i) != observe(candidate, i)]
