from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cfarepair.cfa import CUR, OUT, RET, TRUE, Action, GuardedAction, build_cfa, execute_label
from cfarepair.minilang import ast as A, parse
from cfarepair.solver.evaluate import evaluate
from cfarepair.solver.session import SAT, UNSAT
from cfarepair.solver.terms import App
from cfarepair.vcgen import PRIME, edge_vc, theories, to_ssa, vocabulary
from support import entry_env, interpreter_store, item, programs, run_ssa, source

REF = parse(source("prime", "reference.mc")).functions[0]
STU = parse(source("prime", "student1.mc")).functions[0]


def x_gt_1():
    x = A.Var("x")
    return GuardedAction(A.Binary(">", x, A.IntLit(1)), (Action(x, A.Binary("+", x, A.IntLit(1))),))


def test_guarded_increment():
    fn = parse("int f(int x) { return x; }").functions[0]
    ssa = to_ssa((x_gt_1(),), vocabulary(fn))
    assert [str(c) for c in ssa.clauses] == [
        "(=> (> x@0 1) (= x@1 (+ x@0 1)))",
        "(=> (not (> x@0 1)) (= x@1 x@0))",
    ]
    assert str(ssa.exit["x"]) == "x@1" and str(ssa.exit["ret"]) == "ret@0"


def test_unconditional_assignment_in_student_namespace():
    ssa = to_ssa((GuardedAction(TRUE, (Action(A.Var("i"), A.IntLit(1)),)),), vocabulary(STU, PRIME))
    assert str(ssa.formula) == "(= |i'@1| 1)"


def test_empty_label():
    ssa = to_ssa((), vocabulary(STU, PRIME))
    assert str(ssa.formula) == "true"
    assert str(ssa.taken) == "false"


def test_reference_loop_entry_edge():
    b = build_cfa(REF).edges[1]
    ssa = to_ssa(b.label, vocabulary(REF))
    assert [str(c) for c in ssa.clauses] == [
        "(=> (not (= n@0 1)) (= j@1 2))",
        "(=> (= n@0 1) (= j@1 j@0))",
    ]


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs(), st.lists(st.integers(-4, 4), min_size=8, max_size=8))
def test_ssa_agrees_with_interpreter(src, values):
    fn = parse(src).functions[0]
    vocab = vocabulary(fn)
    env_vars = A.variables_of(fn)
    store = interpreter_store(fn, values)
    for edge in build_cfa(fn).edges:
        ssa = to_ssa(edge.label, vocab)
        env = run_ssa(ssa, entry_env(ssa, store))
        assert evaluate(ssa.formula, env)
        assert evaluate(ssa.defined, env)
        taken, after = execute_label(edge.label, store, env_vars)
        assert evaluate(ssa.taken, env) == taken
        if taken:
            for var, c in ssa.exit.items():
                expected = after[var]
                if var == OUT:
                    expected = tuple(item(x) for x in expected)
                assert env[c.name] == expected, var


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs(), st.lists(st.integers(-4, 4), min_size=8, max_size=8), st.data())
def test_edge_formula_holds_exactly_on_disagreement(src, values, data):
    fn = parse(src).functions[0]
    edges = build_cfa(fn).edges
    edge = data.draw(st.sampled_from(edges))
    other = data.draw(st.sampled_from(edges))
    names = list(A.variables_of(fn)) + [RET, OUT, CUR]
    pairs = [(n, n) for n in names]
    vc = edge_vc(other.label, edge.label, vocabulary(fn, PRIME), vocabulary(fn), pairs)
    store = interpreter_store(fn, values)
    env = entry_env(vc.reference, store)
    env.update(entry_env(vc.student, store))
    env = run_ssa(vc.student, run_ssa(vc.reference, env))
    env_vars = A.variables_of(fn)
    t_r, after_r = execute_label(edge.label, store, env_vars)
    t_s, after_s = execute_label(other.label, store, env_vars)
    agree = t_r == t_s and (not t_r or all(after_r[n] == after_s[n] for n in names))
    assert evaluate(vc.formula, env) == (not agree)
    if other is edge:
        assert agree


def test_self_aligned_edges_are_unsatisfiable(session):
    names = list(A.variables_of(REF)) + [RET, OUT, CUR]
    pairs = [(n, n) for n in names]
    for e in build_cfa(REF).edges:
        vc = edge_vc(e.label, e.label, vocabulary(REF, PRIME), vocabulary(REF), pairs, at_exit=True)
        assert session.check_sat(vc.formula, 10).status == UNSAT


def test_missing_return_edge_is_satisfiable_at_n_equal_1(session):
    a = build_cfa(REF).edges[0]
    pairs = [("n", "n"), ("i", "j"), (RET, RET), (OUT, OUT), (CUR, CUR)]
    vc = edge_vc((), a.label, vocabulary(STU, PRIME), vocabulary(REF), pairs, at_exit=True)
    v = session.check_sat(vc.formula, 10)
    assert v.status == SAT
    assert v.model["n@0"] == v.model["n'@0"] == 1


def test_theory_tags():
    c = build_cfa(REF)
    assert theories(to_ssa(c.edges[1].label, vocabulary(REF)).formula) == {"LIA"}
    avg = parse(source("average", "reference.mc")).functions[0]
    tags = set()
    for e in build_cfa(avg).edges:
        tags |= theories(to_ssa(e.label, vocabulary(avg)).formula)
    assert {"LRA", "SEQ"} <= tags
    assert isinstance(to_ssa(c.edges[1].label, vocabulary(REF)).formula, App)
