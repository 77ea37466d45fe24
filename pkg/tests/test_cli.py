import json
import subprocess
import sys

import pytest

from cfarepair import __version__
from cfarepair.cli import main
from support import CORPUS

PRIME = CORPUS / "prime"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_repair_prints_a_diff(capsys):
    code, out, _ = run(capsys, "repair", "--ref", str(PRIME / "reference.mc"),
                       "--student", str(PRIME / "student1.mc"))
    assert code == 0
    assert out.startswith("--- student\n+++ repaired\n")
    assert "-    int i = 1;\n" in out and "+    int i = 2;\n" in out
    assert "+    if (n == 1) {\n" in out and "+            i = i + 1;\n" in out


def test_verify_reference_against_itself(capsys):
    ref = str(PRIME / "reference.mc")
    code, out, _ = run(capsys, "verify", "--ref", ref, "--student", ref)
    assert code == 0 and out.strip() == "all edges verified"


def test_verify_broken_student_fails(capsys):
    code, _, err = run(capsys, "verify", "--ref", str(PRIME / "reference.mc"),
                       "--student", str(PRIME / "student1.mc"))
    assert code == 1 and err.startswith("failed: NotEquivalent")


def test_missing_file_is_a_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "repair", "--ref", str(tmp_path / "nope.mc"),
                       "--student", str(PRIME / "student1.mc"))
    assert code == 2 and "cannot read" in err


def test_bad_flag_values(capsys):
    ref = str(PRIME / "reference.mc")
    with pytest.raises(SystemExit) as exc:
        main(["repair", "--ref", ref, "--student", ref, "--k", "0"])
    assert exc.value.code == 2 and "at least 1" in capsys.readouterr().err


def test_json_on_stdout(capsys):
    code, out, _ = run(capsys, "repair", "--ref", str(PRIME / "reference.mc"),
                       "--student", str(PRIME / "student1.mc"), "--json", "-")
    data = json.loads(out)
    assert code == 0 and data["status"] == "repaired" and "elapsed" not in data


def test_structural_mismatch_exit_code(capsys):
    rs = CORPUS / "read_sum"
    code, _, err = run(capsys, "repair", "--ref", str(rs / "reference.mc"),
                       "--student", str(rs / "student2.mc"))
    assert code == 1 and err.startswith("failed: SM")


def test_align_output(capsys):
    code, out, _ = run(capsys, "align", "--ref", str(PRIME / "reference.mc"),
                       "--student", str(PRIME / "student1.mc"))
    assert code == 0
    assert "nodes q1~q1', q2~q2', q3~q3', q4~q4'" in out
    assert "candidate 0" in out
    assert "  a/-        return  ref=['[n == 1] ret=0'] student=[]" in out
    assert "j <-> i'" in out


def test_run_corpus_json(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run(capsys, "run-corpus", str(CORPUS / "sign"), "--json", str(out_file))
    assert code == 0 and "unsound claims: 0" in out
    assert json.loads(out_file.read_text())["schema"] == "cfarepair-corpus/1"


def test_run_corpus_missing_directory(capsys, tmp_path):
    code, _, err = run(capsys, "run-corpus", str(tmp_path / "none"))
    assert code == 2 and "no corpus" in err


def test_no_command(capsys):
    code, _, err = run(capsys)
    assert code == 2 and err.startswith("usage:")


def test_version_through_the_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cfarepair", "--version"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout.startswith(f"cfarepair {__version__}; solver ")
    assert "unavailable" not in proc.stdout
