import json

import pytest

from cfarepair.minilang import ast_size, parse, tree_edit_distance
from cfarepair.solver.evaluate import evaluate
from cfarepair.repair import Budget, Config, Domain, Slot, repair_edge, repair_program, soundness_check
from cfarepair.repair.edge import NO_REPAIR, REPAIRED, VERIFIED, spaces_for
from cfarepair.repair.program import NOT_EQUIVALENT, SCHEMA
from cfarepair.repair.sketch import extend, repair_sketch
from cfarepair.vcgen import IN
from support import edge_task, run_ssa, source

PRIME_R = source("prime", "reference.mc")
PRIME_S = source("prime", "student1.mc")
PRIME_DOMAIN = Domain((Slot(-50, 200),))


@pytest.fixture(scope="module")
def prime_report():
    return repair_program(PRIME_R, PRIME_S, Config(timeout=60))


def test_loop_entry_edge_is_repaired(session):
    res = repair_edge(edge_task(PRIME_S, PRIME_R, "b/a'"), session, Budget())
    assert res.status == REPAIRED
    assert [str(g) for g in res.label] == ["[n != 1] i=2"]
    assert len(res.counterexamples) >= 2
    keys = [ce.key() for ce in res.counterexamples]
    assert len(set(keys)) == len(keys)


def test_unchanged_edge_verifies_without_counterexamples(session):
    res = repair_edge(edge_task(PRIME_S, PRIME_R, "f/e'"), session, Budget())
    assert res.status == VERIFIED and res.counterexamples == [] and res.changes == []


def test_frozen_edge_has_no_repair(session):
    task = edge_task(PRIME_S, PRIME_R, "b/a'")
    form = repair_sketch(extend(task.student_label, task.reference_label, task.renaming))
    task.frozen = frozenset((p.segment, p.action) for p in form.positions)
    res = repair_edge(task, session, Budget())
    assert res.status == "failed" and res.reason == NO_REPAIR


def test_counterexamples_are_excluded_afterwards(session):
    task = edge_task(PRIME_S, PRIME_R, "b/a'")
    res = repair_edge(task, session, Budget())
    form = repair_sketch(extend(task.student_label, task.reference_label, task.renaming))
    form = form.with_spaces(spaces_for(task, form))

    def disagrees(label, ce):
        vc = task.vc(label)
        env = run_ssa(vc.reference, run_ssa(vc.student, {IN: (), **ce.values}))
        return evaluate(vc.formula, env, ce.funs)

    first = res.counterexamples[0]
    assert disagrees(task.student_label, first)
    # every proposed candidate already handles the first counterexample
    for rnd in res.candidates:
        for choice in rnd:
            assert not disagrees(form.fill(choice), first)
    for ce in res.counterexamples:
        assert not disagrees(res.label, ce)
    flat = [tuple(sorted(c.items())) for rnd in res.candidates for c in rnd]
    assert len(flat) == len(set(flat))


def test_prime_program(prime_report):
    r = prime_report
    assert r.status == "repaired", r.message
    fixed = parse(r.repaired_source)
    student = parse(PRIME_S)
    assert r.rps == tree_edit_distance(student, fixed) / ast_size(student)
    assert r.diff.startswith("--- student\n+++ repaired\n")
    ev = soundness_check(PRIME_R, r.repaired_source, PRIME_DOMAIN)
    assert ev.passed and ev.checked == 251 and ev.exhaustive


def test_edge_outcomes(prime_report):
    edges = {e.id: e for e in prime_report.functions[0].edges}
    assert {i for i, e in edges.items() if e.outcome == "verified"} == {"c/c'", "e/d'", "f/e'"}
    assert edges["a/-"].label == ["[n == 1] ret=0"]
    assert edges["b/a'"].label == ["[n != 1] i=2"]
    assert [c["after"] for c in edges["d/b'"].changes] == ["i + 1"]


def test_reference_against_itself():
    r = repair_program(PRIME_R, PRIME_R)
    assert r.status == "verified" and r.rps == 0 and r.diff == "" and r.changed_expressions == 0


def test_verify_only_reports_non_equivalence():
    r = repair_program(PRIME_R, PRIME_S, verify_only=True)
    assert r.status == "failed" and r.reason == NOT_EQUIVALENT


def test_structural_mismatch():
    r = repair_program(source("read_sum", "reference.mc"), source("read_sum", "student2.mc"))
    assert r.status == "failed" and r.reason == "SM"


def test_unsupported_student():
    r = repair_program(PRIME_R, "int check_prime(int n) { goto x; return 0; }")
    assert r.status == "failed" and r.reason == "Unsupported"


def test_report_json_is_stable(prime_report):
    a = json.dumps(prime_report.to_json(), sort_keys=True)
    b = json.dumps(repair_program(PRIME_R, PRIME_S).to_json(), sort_keys=True)
    assert a == b
    data = json.loads(a)
    assert data["schema"] == SCHEMA and "elapsed" not in data
    assert "elapsed" in prime_report.to_json(timings=True)


def test_corrupted_repair_is_caught(prime_report):
    corrupted = prime_report.repaired_source.replace("int i = 2;", "int i = 3;")
    assert corrupted != prime_report.repaired_source
    ev = soundness_check(PRIME_R, corrupted, PRIME_DOMAIN)
    assert not ev.passed
    assert any(inputs == (4,) for inputs, _, _ in ev.divergences)


def test_silent_programs_compare_return_values():
    ref = "int f(int a) { return a * 2; }"
    assert soundness_check(ref, "int f(int a) { return a + a; }", Domain((Slot(-5, 5),))).passed
    ev = soundness_check(ref, "int f(int a) { return a + 2; }", Domain((Slot(-5, 5),)))
    assert [i for i, _, _ in ev.divergences] == [(-5,), (-4,), (-3,), (-2,), (-1,), (0,), (1,), (3,), (4,), (5,)]


def test_reference_failures_are_skipped():
    ref = "int main() { int a = read(); print(10 / a); return 0; }"
    ev = soundness_check(ref, "int main() { int a = read(); print(10 / a); return 0; }",
                         Domain((Slot(-2, 2),)))
    assert ev.skipped == 1 and ev.checked == 4 and ev.passed


def test_domain_rules():
    assert Domain((Slot(0, 511), Slot(0, 511))).exhaustive
    assert not Domain((Slot(0, 511), Slot(0, 512))).exhaustive
    assert Domain((Slot(0, 5000),)).exhaustive
    big = Domain((Slot(0, 100),) * 3, seed=1)
    assert not big.exhaustive
    assert list(big.inputs()) == list(Domain((Slot(0, 100),) * 3, seed=1).inputs())
    assert Domain.parse({"sequences": [[1, 2], [3]]}).exhaustive
