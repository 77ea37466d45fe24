from hypothesis import given, settings

from cfarepair.minilang import parse, tree_edit_distance
from cfarepair.minilang.treedist import LTree, to_tree, tree_distance
from support import FIXTURES, brute_ted, ltrees, source


def test_identical_programs():
    p = parse(source("prime", "reference.mc"))
    assert tree_edit_distance(p, p) == 0


def test_one_literal_apart():
    a = parse("int f() { return 1; }")
    b = parse("int f() { return 2; }")
    assert tree_edit_distance(a, b) == 1


def test_prime_student_against_hand_fix_matches_oracle():
    student = parse(source("prime", "student1.mc"))
    fixed = parse((FIXTURES / "prime_fixed.mc").read_text())
    a, b = to_tree(student), to_tree(fixed)
    assert tree_distance(a, b) == brute_ted(a, b)


def test_small_hand_trees():
    t = LTree("a", (LTree("b"), LTree("c")))
    assert brute_ted(t, LTree("a")) == 2
    assert tree_distance(t, LTree("a", (LTree("c"), LTree("b")))) == 2
    assert tree_distance(t, LTree("x", (LTree("b"), LTree("c")))) == 1


@settings(max_examples=200, deadline=None)
@given(ltrees(), ltrees())
def test_zss_agrees_with_brute_force(a, b):
    assert tree_distance(a, b) == brute_ted(a, b)


@settings(max_examples=100, deadline=None)
@given(ltrees(), ltrees(), ltrees())
def test_metric_axioms(a, b, c):
    ab, bc, ac = tree_distance(a, b), tree_distance(b, c), tree_distance(a, c)
    assert ab == tree_distance(b, a)
    assert ac <= ab + bc
    assert (ab == 0) == (a == b)
