from hypothesis import HealthCheck, given, settings

from cfarepair.cfa import (BREAK, FUNC_ENTRY, FUNC_EXIT, LOOP_ENTRY, LOOP_EXIT, NORMAL, RETURN, TRUE,
                           build_cfa, build_cfas, show)
from cfarepair.minilang import observe, parse
from support import programs, run_cfa, source


def cfa_of(src):
    return build_cfa(parse(src).functions[0])


def labels(edge):
    return [str(g) for g in edge.label]


def test_prime_reference_automaton():
    c = cfa_of(source("prime", "reference.mc"))
    assert [n.kind for n in c.nodes] == [FUNC_ENTRY, LOOP_ENTRY, LOOP_EXIT, FUNC_EXIT]
    q1, q2, q3, q4 = c.nodes
    by = {(e.source, e.target, e.kind): e for e in c.edges}
    assert labels(by[q1, q4, RETURN]) == ["[n == 1] ret=0"]
    assert labels(by[q1, q2, NORMAL]) == ["[n != 1] j=2"]
    assert labels(by[q2, q4, RETURN]) == ["[j < n]", "[n % j == 0] ret=0"]
    assert labels(by[q2, q2, NORMAL]) == ["[j < n]", "[n % j != 0] j=j + 1"]
    assert labels(by[q2, q3, NORMAL]) == ["[j >= n]"]
    assert labels(by[q3, q4, NORMAL]) == ["[true] ret=1"]
    assert len(c.edges) == 6
    assert c.omega == {q1: q4, q2: q3}


def test_prime_student_has_no_early_return():
    c = cfa_of(source("prime", "student1.mc"))
    q1, q4 = c.entry, c.exit
    assert c.edges_between(q1, q4) == []
    assert sum(e.kind == RETURN for e in c.edges) == 1


def test_straight_line_function():
    c = cfa_of("int f(int a) { int b = a + 1; print(b); return b; }")
    assert len(c.nodes) == 2 and len(c.edges) == 1
    (e,) = c.edges
    assert e.kind == NORMAL and e.source == c.entry and e.target == c.exit
    (g,) = e.label
    assert g.guard == TRUE
    assert [str(a) for a in g.actions] == ["b=a + 1", "print(b)", "ret=b"]


def test_if_with_empty_else():
    c = cfa_of("int f(int a) { int x = 0; if (a > 0) { x = 1; } else { } return x; }")
    assert len(c.edges) == 2
    then, other = sorted(c.edges, key=lambda e: show(e.label[-1].guard) != "a > 0")
    assert show(then.label[-1].guard) == "a > 0" and then.label[-1].actions
    assert show(other.label[-1].guard) == "a <= 0"
    assert all(a.target.name != "x" or show(a.value) == "0" for g in other.label for a in g.actions)


def test_break_targets_innermost_loop_exit():
    c = cfa_of("int f(int a) { int i = 0; while (i < 5) { int j = 0; while (j < 5) { if (j == a) break; "
               "j = j + 1; } i = i + 1; } return i; }")
    breaks = [e for e in c.edges if e.kind == BREAK]
    assert breaks
    inner_exit = [n for n in c.nodes if n.kind == LOOP_EXIT]
    for e in breaks:
        assert e.target.kind == LOOP_EXIT
        assert c.omega[e.source] == e.target
    assert len(inner_exit) == 2


def test_one_entry_per_function():
    program = parse(source("lcm", "reference.mc"))
    cfas = build_cfas(program)
    assert len(cfas) == len(program.functions)
    for c in cfas:
        assert sum(n.kind == FUNC_ENTRY for n in c.nodes) == 1
        assert sum(n.kind == FUNC_EXIT for n in c.nodes) == 1


def test_dot_output_names_every_edge():
    c = cfa_of(source("prime", "reference.mc"))
    dot = c.to_dot()
    assert dot.startswith('digraph "check_prime"')
    assert all(f"{e.id} ({e.kind})" in dot for e in c.edges)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs())
def test_automaton_walk_matches_interpreter(src):
    program = parse(src)
    c = build_cfa(program.functions[0])
    for args in ((0, 0), (2, -1), (-3, 3)):
        expected = observe(program, list(args))
        assert expected[0] == "ok"
        assert run_cfa(c, args) == expected[1:]
