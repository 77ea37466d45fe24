import itertools
from collections import Counter
from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cfarepair.align import (CombinatoricsExceeded, Pred, StructuralMismatch, align_edges, align_nodes,
                             ast_skeleton, jaccard, pairing_count, pred_cost, variable_alignment)
from cfarepair.cfa import CUR, FUNC_ENTRY, LOOP_ENTRY, OUT, RET, build_cfa
from cfarepair.minilang import parse
from support import branch_program, program_pairs, source


def fn(src):
    return parse(src).functions[0]


def setup(student_src, reference_src):
    fs, fr = fn(student_src), fn(reference_src)
    cs, cr = build_cfa(fs), build_cfa(fr)
    return cs, cr, align_nodes(ast_skeleton(fs), ast_skeleton(fr), cs, cr)


PRIME_R = source("prime", "reference.mc")
PRIME_S = source("prime", "student1.mc")


def test_skeleton_of_prime_is_a_chain():
    sk = ast_skeleton(fn(PRIME_R))
    assert sk.shape() == (FUNC_ENTRY, ((LOOP_ENTRY, ()),),)


def test_skeleton_keeps_nesting():
    sk = ast_skeleton(fn("int f() { int i = 0; while (i < 2) { int j = 0; while (j < 2) { j++; } i++; } "
                         "return 0; }"))
    assert sk.depth() == 3
    assert [k.label for k in sk.preorder()] == [FUNC_ENTRY, LOOP_ENTRY, LOOP_ENTRY]


def test_skeleton_skips_unlabelled_layers():
    sk = ast_skeleton(fn("int f(int a) { if (a > 0) { while (a > 0) { a = a - 1; } } return a; }"))
    assert sk.shape() == (FUNC_ENTRY, ((LOOP_ENTRY, ()),),)


def test_prime_node_alignment():
    cs, cr, v = setup(PRIME_S, PRIME_R)
    assert [(s.id, r.id) for s, r in v.pairs] == [("q1", "q1"), ("q2", "q2"), ("q3", "q3"), ("q4", "q4")]


def test_loop_count_mismatch():
    with pytest.raises(StructuralMismatch):
        setup(source("read_sum", "student2.mc"), source("read_sum", "reference.mc"))


def test_self_alignment_is_identity():
    cs, cr, v = setup(PRIME_R, PRIME_R)
    assert all(s.id == r.id for s, r in v.pairs)
    (af,) = list(align_edges(cs, cr, v))
    assert all(e.student.id == e.reference.id for e in af.edges)
    pred = variable_alignment(af)
    assert all(s == r for s, r in pred.pairs)
    assert pred.cost == 0


def test_prime_edges_insert_the_missing_return():
    cs, cr, v = setup(PRIME_S, PRIME_R)
    afs = list(align_edges(cs, cr, v))
    assert len(afs) == 1
    ids = [e.id for e in afs[0].edges]
    assert ids[0] == "a/-" and afs[0].edges[0].inserted
    assert sorted(ids) == sorted(["a/-", "b/a'", "c/c'", "d/b'", "e/d'", "f/e'"])
    for r in cr.edges:
        assert sum(e.reference == r for e in afs[0].edges) == 1


def test_prime_variable_alignment():
    cs, cr, v = setup(PRIME_S, PRIME_R)
    af = next(align_edges(cs, cr, v))
    pred = variable_alignment(af)
    assert set(pred.pairs) == {("n", "n"), ("i", "j"), (RET, RET), (OUT, OUT), (CUR, CUR)}
    assert pred.minted == () and pred.phantoms == ()


def test_two_reference_edges_against_one():
    cs, cr, v = setup(branch_program("b", 1, 20), branch_program("a", 2, 10))
    afs = list(align_edges(cs, cr, v))
    assert len(afs) == 2
    assert {next(e.reference.id for e in af.edges if not e.inserted) for af in afs} == {"a", "b"}


def test_pairing_cap():
    cs, cr, v = setup(branch_program("b", 3, 20), branch_program("a", 3, 10))
    with pytest.raises(CombinatoricsExceeded):
        list(align_edges(cs, cr, v, max_pairings=5))


def test_missing_temporary_is_minted():
    ref = "int f(int a) { int t = a * 2; int r = t + 1; return r; }"
    stu = "int f(int a) { int r = a * 2 + 1; return r; }"
    cs, cr, v = setup(stu, ref)
    pred = variable_alignment(next(align_edges(cs, cr, v)))
    assert [m.name for m in pred.minted] == ["t"]
    assert ("r", "r") in pred.pairs and ("t", "t") in pred.pairs


def test_jaccard():
    assert jaccard(Counter(), Counter()) == 0
    assert jaccard(Counter(a=2), Counter(a=2)) == 0
    assert jaccard(Counter(a=2), Counter(a=1, b=1)) == Fraction(2, 3)


def matchings(m, n):
    """Brute force: all sets of min(m, n) disjoint (ref, student) pairs."""
    cells = list(itertools.product(range(m), range(n)))
    k = min(m, n)
    count = 0
    for chosen in itertools.combinations(cells, k):
        rows = {r for r, _ in chosen}
        cols = {c for _, c in chosen}
        count += len(rows) == len(cols) == k
    return count


def test_pairing_count_formula():
    for m in range(1, 5):
        for n in range(1, 5):
            lo, hi = min(m, n), max(m, n)
            assert pairing_count(m, n) == matchings(m, n) == comb(hi, lo) * factorial(lo)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 50), st.integers(60, 99))
def test_candidate_enumeration_is_exhaustive(m, n, ref_base, stu_base):
    cs, cr, v = setup(branch_program("b", n, stu_base), branch_program("a", m, ref_base))
    afs = list(align_edges(cs, cr, v))
    lo, hi = min(m, n), max(m, n)
    assert len(afs) == comb(hi, lo) * factorial(lo) == matchings(m, n)
    seen = set()
    for af in afs:
        for r in cr.edges:
            assert sum(e.reference == r for e in af.edges) == 1
        for s in cs.edges:
            assert sum(e.student == s for e in af.edges) == 1
        seen.add(tuple((e.student and e.student.id, e.reference and e.reference.id) for e in af.edges))
    assert len(seen) == len(afs)


def random_preds(pred, af, rng, count):
    """Random bijections between the same student and reference locals."""
    fixed = {p.name for p in af.student.function.params} | {RET, OUT, CUR}
    rows = [s for s, _ in pred.pairs if s not in fixed] + list(pred.phantoms)
    cols = [r for s, r in pred.pairs if s not in fixed]
    cols += [None] * (len(rows) - len(cols))
    for _ in range(count):
        perm = rng.sample(cols, len(cols))
        pairs = tuple((s, r) for s, r in zip(rows, perm) if r is not None)
        phantoms = tuple(s for s, r in zip(rows, perm) if r is None)
        yield Pred(pairs, pred.minted, phantoms)


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(program_pairs(), st.randoms(use_true_random=False))
def test_variable_alignment_beats_random_bijections(pair, rng):
    ref_src, stu_src = pair
    cs, cr, v = setup(stu_src, ref_src)
    af = next(align_edges(cs, cr, v, max_pairings=10 ** 6))
    pred = variable_alignment(af)
    assert pred_cost(af, pred) == pred.cost
    students = [s for s, _ in pred.pairs] + list(pred.phantoms)
    assert len(set(students)) == len(students)
    refs = [r for _, r in pred.pairs]
    assert sorted(refs) == sorted(list(cr.variables) + [RET, OUT, CUR])
    for other in random_preds(pred, af, rng, 50):
        assert pred.cost <= pred_cost(af, other)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(program_pairs())
def test_node_alignment_is_symmetric(pair):
    a, b = pair
    fa, fb = fn(a), fn(b)
    ca, cb = build_cfa(fa), build_cfa(fb)
    forward = align_nodes(ast_skeleton(fa), ast_skeleton(fb), ca, cb)
    backward = align_nodes(ast_skeleton(fb), ast_skeleton(fa), cb, ca)
    assert set(forward.inverse().pairs) == set(backward.pairs)
