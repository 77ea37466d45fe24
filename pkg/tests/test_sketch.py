from cfarepair.cfa import FALSE, SKIP, TRUE, Action, GuardedAction, build_cfa, show
from cfarepair.minilang import ast as A, parse
from cfarepair.repair.sketch import CONDITIONAL, PRINT, UPDATE, extend, impl_space, repair_sketch
from cfarepair.vcgen import Hole
from support import source

REF = build_cfa(parse(source("prime", "reference.mc")).functions[0])
STU = build_cfa(parse(source("prime", "student1.mc")).functions[0])
RENAMING = {"n": "n", "j": "i", "ret": "ret"}


def edge(cfa, letter):
    return next(e for e in cfa.edges if e.id == letter)


def text(label):
    return [str(g) for g in label]


def test_equal_shapes_are_left_alone():
    b, a_ = edge(REF, "b"), edge(STU, "a")
    assert extend(a_.label, b.label, RENAMING) == a_.label


def test_inserted_edge_gets_a_false_segment_with_a_frame():
    a = edge(REF, "a")
    ext = extend((), a.label, RENAMING)
    assert text(ext) == ["[false] ret=ret"]


def test_frames_fill_every_segment_to_the_widest():
    x, y = A.Var("x"), A.Var("y")
    student = (GuardedAction(A.Binary(">", x, A.IntLit(0)), ()),)
    reference = (GuardedAction(TRUE, (Action(x, A.IntLit(1)), Action(y, A.IntLit(2)))),)
    assert text(extend(student, reference)) == ["[x > 0] x=x; y=y"]


def test_missing_print_is_padded_with_skip():
    x = A.Var("x")
    student = (GuardedAction(TRUE, (Action(x, A.IntLit(1)),)),)
    reference = (GuardedAction(TRUE, (Action(None, x, is_print=True), Action(x, A.IntLit(1)))),)
    assert text(extend(student, reference)) == ["[true] x=1; skip"]


def test_sketch_of_unconditional_assignment():
    form = repair_sketch(edge(STU, "a").label)
    assert [str(g) for g in form.label] == ["[h1] i=h2"]
    assert [h.kind for h in form.holes] == [CONDITIONAL, UPDATE]
    assert form.fill() == edge(STU, "a").label


def test_empty_label_has_no_holes():
    assert repair_sketch(()).holes == ()


def test_padding_holes_keep_false_and_the_target():
    form = repair_sketch(extend((), edge(REF, "a").label, RENAMING))
    assert [show(h.original) for h in form.holes] == ["false", "ret"]


def test_update_space_contains_renamed_reference_constant():
    task_label, ref_label = edge(STU, "a").label, edge(REF, "b").label
    form = repair_sketch(task_label)
    update = form.holes[1]
    space = impl_space(update, task_label, ref_label, RENAMING)
    assert [show(e) for e in space] == ["1", "2", "i"]


def test_conditional_space():
    task_label, ref_label = edge(STU, "a").label, edge(REF, "b").label
    guard = repair_sketch(task_label).holes[0]
    space = impl_space(guard, task_label, ref_label, RENAMING)
    assert [show(e) for e in space] == ["true", "n != 1", "false"]


def test_singleton_space():
    x = A.Var("x")
    label = (GuardedAction(TRUE, (Action(x, x),)),)
    hole = Hole(1, UPDATE, (x,), x)
    assert impl_space(hole, label, label, {"x": "x"}) == (x,)


def test_print_space_ends_with_skip():
    x = A.Var("x")
    student = (GuardedAction(TRUE, (Action(None, x, is_print=True),)),)
    reference = (GuardedAction(TRUE, (Action(None, A.Var("z"), is_print=True),)),)
    hole = repair_sketch(student).holes[1]
    assert hole.kind == PRINT
    space = impl_space(hole, student, reference, {"z": "x2"})
    assert [show(e) for e in space] == ["x", "x2", "skip"]
    assert space[-1] == SKIP and FALSE not in space
