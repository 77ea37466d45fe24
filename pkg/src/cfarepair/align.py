"""Aligning a student automaton with a reference automaton.

Nodes are aligned through the skeleton of function and loop entries, edges
per aligned node pair and kind, and variables by a minimum-cost bijection
over usage-pattern distances.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterator, Optional

from .cfa import CUR, FUNC_ENTRY, FUNC_EXIT, LOOP_ENTRY, OUT, RET, SKIP, Cfa, CfaEdge, CfaNode
from .minilang import ast as A

DEFAULT_MAX_PAIRINGS = 24
EXHAUSTIVE_LIMIT = 8


class StructuralMismatch(Exception):
    """Function/loop skeletons differ; the pair cannot be aligned."""


class CombinatoricsExceeded(Exception):
    """Too many edge pairings for one aligned node pair."""


# skeletons

@dataclass(frozen=True)
class Skeleton:
    label: str
    nid: int
    children: tuple = ()

    def shape(self) -> tuple:
        return (self.label, tuple(c.shape() for c in self.children))

    def preorder(self) -> list:
        out = [self]
        for c in self.children:
            out += c.preorder()
        return out

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)


def ast_skeleton(node: A.Node) -> Skeleton:
    """Keep only function and loop entries, preserving ancestry.  A program
    yields a synthetic root whose children are its functions."""
    if isinstance(node, A.Program):
        return Skeleton("Program", node.nid, tuple(ast_skeleton(f) for f in node.functions))
    return Skeleton(node.label, node.nid, tuple(_labelled_below(node)))


def _labelled_below(node: A.Node) -> list:
    out = []
    for child in node.children():
        if A.labelled(child):
            out.append(Skeleton(child.label, child.nid, tuple(_labelled_below(child))))
        else:
            out += _labelled_below(child)
    return out


@dataclass(frozen=True)
class NodeAlignment:
    pairs: tuple        # (student node, reference node)

    def reference_of(self, node: CfaNode) -> CfaNode:
        for s, r in self.pairs:
            if s == node:
                return r
        raise KeyError(node)

    def student_of(self, node: CfaNode) -> CfaNode:
        for s, r in self.pairs:
            if r == node:
                return s
        raise KeyError(node)

    def inverse(self) -> "NodeAlignment":
        return NodeAlignment(tuple((r, s) for s, r in self.pairs))


def align_nodes(skel_s: Skeleton, skel_r: Skeleton, cfa_s: Cfa, cfa_r: Cfa) -> NodeAlignment:
    if skel_s.shape() != skel_r.shape():
        raise StructuralMismatch(
            f"skeletons differ: {skel_s.depth()} vs {skel_r.depth()} levels, "
            f"{len(skel_s.preorder())} vs {len(skel_r.preorder())} labelled nodes")
    pairs = []
    for ks, kr in zip(skel_s.preorder(), skel_r.preorder()):
        if ks.label == FUNC_ENTRY:
            pairs += [(cfa_s.entry, cfa_r.entry), (cfa_s.exit, cfa_r.exit)]
        elif ks.label == LOOP_ENTRY:
            ls = _loop_nodes(cfa_s, ks.nid)
            lr = _loop_nodes(cfa_r, kr.nid)
            pairs += [(ls[0], lr[0]), (ls[1], lr[1])]
    order = {n: i for i, n in enumerate(cfa_s.nodes)}
    pairs.sort(key=lambda p: order[p[0]])
    return NodeAlignment(tuple(pairs))


def _loop_nodes(cfa: Cfa, nid: int) -> tuple:
    entry = next(n for n in cfa.nodes if n.kind == LOOP_ENTRY and n.owner == nid)
    return entry, cfa.omega[entry]


def function_pairs(student: A.Program, reference: A.Program) -> list:
    """Functions are matched by position; signatures must agree."""
    if len(student.functions) != len(reference.functions):
        raise StructuralMismatch(
            f"{len(student.functions)} student functions vs {len(reference.functions)} reference functions")
    out = []
    for fs, fr in zip(student.functions, reference.functions):
        sig_s = (fs.ret_type, tuple(p.type for p in fs.params))
        sig_r = (fr.ret_type, tuple(p.type for p in fr.params))
        if sig_s != sig_r:
            raise StructuralMismatch(f"signature of {fs.name} differs from {fr.name}")
        out.append((fs, fr))
    return out


# edges

@dataclass(frozen=True)
class AlignedEdge:
    source: tuple           # (student node, reference node)
    target: tuple
    kind: str
    student: Optional[CfaEdge]     # None: inserted empty student edge
    reference: Optional[CfaEdge]   # None: empty reference slot for a surplus student edge

    @property
    def id(self) -> str:
        r = self.reference.id if self.reference else "-"
        s = self.student.id + "'" if self.student else "-"
        return f"{r}/{s}"

    @property
    def student_label(self) -> tuple:
        return self.student.label if self.student else ()

    @property
    def reference_label(self) -> tuple:
        return self.reference.label if self.reference else ()

    @property
    def inserted(self) -> bool:
        return self.student is None

    @property
    def surplus(self) -> bool:
        return self.reference is None


@dataclass
class AlignedAutomaton:
    student: Cfa
    reference: Cfa
    nodes: NodeAlignment
    edges: list
    pred: Optional["Pred"] = None

    @property
    def entry(self) -> tuple:
        return self.student.entry, self.reference.entry

    @property
    def exit(self) -> tuple:
        return self.student.exit, self.reference.exit

    @property
    def has_surplus(self) -> bool:
        return any(e.surplus for e in self.edges)

    def out_edges(self, pair: tuple) -> list:
        return [e for e in self.edges if e.source == pair]


def pairing_count(m: int, n: int) -> int:
    """Injective pairings between groups of m reference and n student edges."""
    lo, hi = min(m, n), max(m, n)
    return comb(hi, lo) * factorial(lo)


def _group_pairings(ref: list, stu: list) -> list:
    """All injective pairings as lists of (student edge | None, reference edge | None)."""
    out = []
    if len(stu) <= len(ref):
        for chosen in itertools.permutations(range(len(ref)), len(stu)):
            pairs = [(stu[i], ref[j]) for i, j in enumerate(chosen)]
            pairs += [(None, ref[j]) for j in range(len(ref)) if j not in chosen]
            out.append(pairs)
    else:
        for chosen in itertools.permutations(range(len(stu)), len(ref)):
            pairs = [(stu[i], ref[j]) for j, i in enumerate(chosen)]
            pairs += [(stu[i], None) for i in range(len(stu)) if i not in chosen]
            out.append(pairs)
    return out


def _same_label(a: CfaEdge, b: CfaEdge) -> bool:
    return A.strip_meta(_label_key(a.label)) == A.strip_meta(_label_key(b.label))


def _label_key(label) -> tuple:
    return tuple((g.guard, tuple((x.target, x.value, x.is_print) for x in g.actions), g.branch)
                 for g in label)


def edge_groups(cfa_s: Cfa, cfa_r: Cfa, v: NodeAlignment) -> list:
    """``(source pair, target pair, kind, reference edges, student edges)`` in
    reference-node order."""
    groups = {}
    for e in cfa_r.edges:
        key = (v.student_of(e.source), e.source, v.student_of(e.target), e.target, e.kind)
        groups.setdefault(key, ([], []))[0].append(e)
    for e in cfa_s.edges:
        key = (e.source, v.reference_of(e.source), e.target, v.reference_of(e.target), e.kind)
        groups.setdefault(key, ([], []))[1].append(e)
    order = {n: i for i, n in enumerate(cfa_r.nodes)}
    kinds = {"normal": 0, "break": 1, "return": 2}
    keys = sorted(groups, key=lambda k: (order[k[1]], order[k[3]], kinds[k[4]]))
    return [((k[0], k[1]), (k[2], k[3]), k[4], groups[k][0], groups[k][1]) for k in keys]


def align_edges(cfa_s: Cfa, cfa_r: Cfa, v: NodeAlignment,
                max_pairings: int = DEFAULT_MAX_PAIRINGS) -> Iterator[AlignedAutomaton]:
    """Candidate aligned automata in lexicographic order of the per-group pairings.

    Edges with identical labels are paired first; the remaining edges of a
    group are paired one-to-one, padded with inserted empty edges, or
    enumerated over all injective pairings."""
    choices = []
    for src, dst, kind, ref, stu in edge_groups(cfa_s, cfa_r, v):
        fixed = []
        ref, stu = list(ref), list(stu)
        for r in list(ref):
            twin = next((s for s in stu if _same_label(s, r)), None)
            if twin is not None:
                fixed.append((twin, r))
                ref.remove(r)
                stu.remove(twin)
        if not ref or not stu:
            options = [[(None, r) for r in ref] + [(s, None) for s in stu]]
        elif len(ref) == len(stu) == 1:
            options = [[(stu[0], ref[0])]]
        else:
            count = pairing_count(len(ref), len(stu))
            if count > max_pairings:
                raise CombinatoricsExceeded(
                    f"{count} pairings between {src[1]} and {dst[1]} ({kind}) exceed the cap {max_pairings}")
            options = _group_pairings(ref, stu)
        choices.append([[AlignedEdge(src, dst, kind, s, r) for s, r in fixed + opt] for opt in options])
    order = {e: i for i, e in enumerate(cfa_r.edges)}
    for combo in itertools.product(*choices):
        edges = [e for group in combo for e in group]
        edges.sort(key=lambda e: (order.get(e.reference, len(order)),
                                  e.student.id if e.student else ""))
        yield AlignedAutomaton(cfa_s, cfa_r, v, edges)


# variables

FEATURES = ("guard", "loop", "lhs", "rhs", "read", "print")


def _vars_in(e) -> list:
    if not isinstance(e, A.Node):
        return []
    return [n.name for n in e.walk() if isinstance(n, (A.Var, A.Index))]


def usage(label, loops: dict) -> dict:
    """Variable -> Counter of usage features on one label."""
    out = {}

    def add(names, feature):
        for name in names:
            out.setdefault(name, Counter())[feature] += 1

    for seg in label:
        in_loop_cond = seg.origin is not None and seg.origin[0] in loops
        add(_vars_in(seg.guard), "loop" if in_loop_cond else "guard")
        for act in seg.actions:
            if act.is_print:
                if act.value != SKIP:
                    add(_vars_in(act.value), "print")
                continue
            add([act.target.name], "read" if isinstance(act.value, A.Read) else "lhs")
            if isinstance(act.target, A.Index):
                add(_vars_in(act.target.index), "rhs")
            add(_vars_in(act.value), "rhs")
    return out


def jaccard(a: Counter, b: Counter) -> Fraction:
    """1 - |a & b| / |a | b| on multisets; 0 for two empty sets."""
    union = sum((a | b).values())
    if union == 0:
        return Fraction(0)
    return 1 - Fraction(sum((a & b).values()), union)


@dataclass(frozen=True)
class Pred:
    """Variable alignment: (student, reference) pairs, including the return
    value, output and cursor.  ``minted`` student variables were created to
    match reference variables; ``phantoms`` are student variables left
    without a partner."""
    pairs: tuple
    minted: tuple = ()
    phantoms: tuple = ()
    cost: Fraction = Fraction(0)

    def reference_of(self, s: str) -> Optional[str]:
        return next((r for a, r in self.pairs if a == s), None)

    def student_of(self, r: str) -> Optional[str]:
        return next((a for a, b in self.pairs if b == r), None)

    def renaming(self) -> dict:
        """Reference name -> student name."""
        return {r: s for s, r in self.pairs}

    def inverse(self) -> "Pred":
        return Pred(tuple((r, s) for s, r in self.pairs), self.minted, self.phantoms, self.cost)

    def __str__(self):
        return "{" + ", ".join(f"{r} <-> {s}'" for s, r in self.pairs) + "}"


def _kind(info: A.VarInfo) -> str:
    return "array" if info.is_array else info.type


@dataclass
class UsageMatrix:
    student: list
    reference: list
    cells: dict = field(default_factory=dict)     # (student, reference) -> Fraction

    def __call__(self, s: str, r: str) -> Fraction:
        return self.cells.get((s, r), Fraction(0))


def usage_matrix(af: AlignedAutomaton, student_vars: list, reference_vars: list) -> UsageMatrix:
    """Average over aligned edges of the per-edge Jaccard distances."""
    m = UsageMatrix(list(student_vars), list(reference_vars))
    if not af.edges:
        return m
    per_edge = []
    for e in af.edges:
        per_edge.append((usage(e.student_label, af.student.loops),
                         usage(e.reference_label, af.reference.loops)))
    empty = Counter()
    for s in student_vars:
        for r in reference_vars:
            total = sum(jaccard(us.get(s, empty), ur.get(r, empty)) for us, ur in per_edge)
            m.cells[(s, r)] = Fraction(total, len(af.edges))
    return m


def min_cost_bijection(rows: list, cols: list, cost) -> tuple:
    """Assign each row a distinct column (len(rows) == len(cols)).  Exhaustive
    up to EXHAUSTIVE_LIMIT, greedy row-by-row beyond.  Equal costs prefer
    more same-name pairs, then the earliest assignment in declaration order."""
    n = len(rows)
    if n == 0:
        return (), Fraction(0)
    if n <= EXHAUSTIVE_LIMIT:
        best, best_key = None, None
        for perm in itertools.permutations(range(n)):
            c = sum((cost(rows[i], cols[perm[i]]) for i in range(n)), Fraction(0))
            key = (c, sum(rows[i] != cols[perm[i]] for i in range(n)))
            if best_key is None or key < best_key:
                best, best_key = perm, key
        return tuple((rows[i], cols[best[i]]) for i in range(n)), best_key[0]
    free = list(range(n))
    out, total = [], Fraction(0)
    for i in range(n):
        j = min(free, key=lambda j: (cost(rows[i], cols[j]), rows[i] != cols[j], j))
        free.remove(j)
        out.append((rows[i], cols[j]))
        total += cost(rows[i], cols[j])
    return tuple(out), total


def _fresh_name(base: str, taken: set) -> str:
    name, k = base, 1
    while name in taken:
        name = f"{base}_{k}"
        k += 1
    return name


@dataclass(frozen=True)
class _Placeholder:
    index: int


def variable_alignment(af: AlignedAutomaton) -> Pred:
    """Parameters pair by position; other variables by a minimum-cost
    bijection per kind (int, float, array)."""
    fs, fr = af.student.function, af.reference.function
    vs, vr = af.student.variables, af.reference.variables
    pairs = [(ps.name, pr.name) for ps, pr in zip(fs.params, fr.params)]
    locals_s = [n for n, i in vs.items() if not i.is_param]
    locals_r = [n for n, i in vr.items() if not i.is_param]
    taken = set(vs)
    minted, phantoms, total = [], [], Fraction(0)
    groups = []
    for kind in ("int", "float", "array"):
        rows = [n for n in locals_s if _kind(vs[n]) == kind]
        cols = [n for n in locals_r if _kind(vr[n]) == kind]
        # placeholders have no usage; they are named once their partner is known
        rows += [_Placeholder(i) for i in range(len(cols) - len(rows))]
        groups.append((rows, cols))
    matrix = usage_matrix(af, locals_s, locals_r)
    for rows, cols in groups:
        padded = cols + [None] * (len(rows) - len(cols))

        def cost(s, r):
            if r is None:
                return jaccard_to_nothing(af, s)
            return matrix(s, r)

        chosen, c = min_cost_bijection(rows, padded, cost)
        total += c
        for s, r in chosen:
            if r is None:
                phantoms.append(s)
                continue
            if isinstance(s, _Placeholder):
                s = _fresh_name(r, taken)
                taken.add(s)
                info = vr[r]
                minted.append(A.VarInfo(s, info.type, info.size, False))
            pairs.append((s, r))
    pairs += [(RET, RET), (OUT, OUT), (CUR, CUR)]
    return Pred(tuple(pairs), tuple(minted), tuple(phantoms), total)


def jaccard_to_nothing(af: AlignedAutomaton, s: str) -> Fraction:
    if not af.edges:
        return Fraction(0)
    used = sum(1 for e in af.edges if s in usage(e.student_label, af.student.loops))
    return Fraction(used, len(af.edges))


def pred_cost(af: AlignedAutomaton, pred: Pred) -> Fraction:
    """Total usage distance of the non-pinned pairs of ``pred``."""
    fs = af.student.function
    params = {p.name for p in fs.params} | {RET, OUT, CUR}
    kept = [(s, r) for s, r in pred.pairs if s not in params]
    matrix = usage_matrix(af, [s for s, _ in kept], [r for _, r in kept])
    total = sum((matrix(s, r) for s, r in kept), Fraction(0))
    return total + sum((jaccard_to_nothing(af, s) for s in pred.phantoms), Fraction(0))
