"""Extend, sketching and implementation spaces for one aligned edge."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from ..cfa import FALSE, SKIP, TRUE, Action, GuardedAction
from ..minilang import ast as A
from ..vcgen import Hole

CONDITIONAL, UPDATE, PRINT = "conditional", "update", "print"


def rename(e, variables: dict, functions: Optional[dict] = None):
    """Rewrite reference names into student names."""
    functions = functions or {}
    if isinstance(e, A.Var):
        return replace(e, name=variables.get(e.name, e.name))
    if isinstance(e, A.Index):
        return replace(e, name=variables.get(e.name, e.name), index=rename(e.index, variables, functions))
    if isinstance(e, A.Unary):
        return replace(e, operand=rename(e.operand, variables, functions))
    if isinstance(e, A.Binary):
        return replace(e, left=rename(e.left, variables, functions), right=rename(e.right, variables, functions))
    if isinstance(e, A.Cast):
        return replace(e, operand=rename(e.operand, variables, functions))
    if isinstance(e, A.Call):
        return replace(e, name=functions.get(e.name, e.name),
                       args=tuple(rename(a, variables, functions) for a in e.args))
    return e


def _frame_for(ref_action: Action, variables: dict) -> Action:
    if ref_action.is_print:
        return Action(None, SKIP, None, is_print=True)
    target = rename(ref_action.target, variables)
    return Action(target, target, None)


def _slot(action: Action, variables: dict) -> tuple:
    if action.is_print:
        return ("print",)
    return ("var", variables.get(action.target.name, action.target.name))


def extend(student, reference, variables: Optional[dict] = None) -> tuple:
    """Pad ``student`` so it has at least as many segments as ``reference``
    and every segment has as many actions as the longest reference segment.

    Padding segments are ``[false]``; padding actions are frames (``x = x``
    or print-skip).  Frames go first to the reference targets the segment
    does not assign yet, then follow the longest reference segment.
    ``variables`` maps reference names to student names.
    """
    variables = variables or {}
    segs = list(student)
    inserted = not segs
    for _ in range(len(segs), len(reference)):
        # on an inserted edge the padding decides whether the edge is taken
        segs.append(GuardedAction(FALSE, (), None, branch=inserted))
    width = max((len(g.actions) for g in reference), default=0)
    widest = next((g for g in reference if len(g.actions) == width), None)
    out = []
    for i, seg in enumerate(segs):
        acts = list(seg.actions)
        if len(acts) < width:
            model = reference[i] if i < len(reference) else widest
            missing = list(model.actions)
            for a in acts:
                key = _slot(a, {})
                hit = next((m for m in missing if _slot(m, variables) == key), None)
                if hit is not None:
                    missing.remove(hit)
            fillers = missing + list(widest.actions)
            for k in range(width - len(acts)):
                acts.append(_frame_for(fillers[k], variables))
        out.append(GuardedAction(seg.guard, tuple(acts), seg.origin, seg.branch))
    return tuple(out)


@dataclass(frozen=True)
class Position:
    """Where a hole sits: segment index, and action index for updates."""
    segment: int
    action: Optional[int] = None


@dataclass(frozen=True)
class RepairSketchForm:
    label: tuple          # guarded actions with holes in place of expressions
    holes: tuple
    positions: tuple      # Position per hole

    def fill(self, choice: Optional[dict] = None) -> tuple:
        """Substitute hole ``id -> index`` choices (default: the originals)."""
        choice = choice or {}
        by_id = {h.id: h for h in self.holes}

        def pick(x):
            if isinstance(x, Hole):
                return by_id[x.id].space[choice.get(x.id, 0)]
            return x

        out = []
        for seg in self.label:
            acts = tuple(replace(a, value=pick(a.value)) for a in seg.actions)
            out.append(GuardedAction(pick(seg.guard), acts, seg.origin, seg.branch))
        return tuple(out)

    def with_spaces(self, spaces: dict) -> "RepairSketchForm":
        holes = tuple(replace(h, space=spaces.get(h.id, h.space)) for h in self.holes)
        by_id = {h.id: h for h in holes}

        def swap(x):
            return by_id[x.id] if isinstance(x, Hole) else x

        label = tuple(GuardedAction(swap(g.guard), tuple(replace(a, value=swap(a.value)) for a in g.actions),
                                    g.origin, g.branch) for g in self.label)
        return RepairSketchForm(label, holes, self.positions)


def repair_sketch(extended, first_id: int = 1) -> RepairSketchForm:
    """Replace every guard and every right-hand side by a fresh hole whose
    space holds only the original expression."""
    holes, positions, label = [], [], []
    next_id = first_id
    for i, seg in enumerate(extended):
        g = Hole(next_id, CONDITIONAL, (seg.guard,))
        next_id += 1
        holes.append(g)
        positions.append(Position(i))
        acts = []
        for j, act in enumerate(seg.actions):
            kind = PRINT if act.is_print else UPDATE
            h = Hole(next_id, kind, (act.value,), act.target)
            next_id += 1
            holes.append(h)
            positions.append(Position(i, j))
            acts.append(replace(act, value=h))
        label.append(GuardedAction(g, tuple(acts), seg.origin, seg.branch))
    return RepairSketchForm(tuple(label), tuple(holes), tuple(positions))


def _dedupe(items) -> tuple:
    out = []
    for x in items:
        if x not in out:
            out.append(x)
    return tuple(out)


def impl_space(hole: Hole, student, reference, variables: dict,
               functions: Optional[dict] = None) -> tuple:
    """Candidate expressions, original first.

    conditional: student guards, renamed reference guards, true, false
    update:      student right-hand sides, renamed reference ones, the target itself
    print:       student print values, renamed reference ones, skip
    """
    ren = lambda e: rename(e, variables, functions)  # noqa: E731
    if hole.kind == CONDITIONAL:
        items = [hole.original]
        items += [g.guard for g in student]
        items += [ren(g.guard) for g in reference]
        items += [TRUE, FALSE]
        return _dedupe(items)
    if hole.kind == PRINT:
        items = [hole.original]
        items += [a.value for g in student for a in g.actions if a.is_print]
        items += [ren(a.value) for g in reference for a in g.actions if a.is_print]
        items.append(SKIP)
        return _dedupe(items)
    items = [hole.original]
    items += [a.value for g in student for a in g.actions if not a.is_print]
    items += [ren(a.value) for g in reference for a in g.actions if not a.is_print]
    items.append(hole.target)
    return _dedupe(items)
