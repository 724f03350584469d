import io
import json
import subprocess
import sys

import pytest

from branecfa.cfa import Estimate, contains, load_golden
from branecfa.cli import EXIT_IO, EXIT_MEMBRANE_CAP, EXIT_STATE_CAP, EXIT_SYNTAX, EXIT_VERIFY, corpus_path, main
from conftest import CORPUS, golden


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_parse_prints_labelled_term():
    code, out, _ = run("parse", "example1.brane")
    assert code == 0
    assert "@muP" in out and "@muR1" not in out


def test_parse_json_lists_viral_labels():
    code, out, _ = run("parse", "viral.brane", "--format", "json")
    assert code == 0
    assert set(json.loads(out)["labels"]) == {"muVirus", "muNucap", "muMemb", "muEndo"}


def test_syntax_error_exit(tmp_path):
    bad = tmp_path / "bad.brane"
    bad.write_text("mate(n)<>@a ||\n  mate(<>@b\n")
    code, out, err = run("parse", str(bad))
    assert code == EXIT_SYNTAX and not out
    assert "2:" in err


def test_missing_file_exit(tmp_path):
    code, _, err = run("parse", str(tmp_path / "absent.brane"))
    assert code == EXIT_IO and "cannot read" in err


def test_run_zero(tmp_path):
    f = tmp_path / "z.brane"
    f.write_text("zero\n")
    code, out, err = run("run", str(f))
    data = json.loads(out)
    assert code == 0 and len(data["states"]) == 1 and data["edges"] == [] and not err


def test_run_reports_truncation_and_dot():
    code, out, err = run("run", "sync_causality.brane", "--depth", "2", "--format", "dot")
    assert code == 0 and out.startswith("digraph") and "truncated" in err


def test_run_text_example1():
    code, out, _ = run("run", "example1.brane", "--depth", "3", "--format", "text")
    assert code == 0
    assert "--mate@n-->" in out and "--bud@m-->" in out


def test_state_cap_exit():
    code, _, err = run("run", "example1.brane", "--state-cap", "2")
    assert code == EXIT_STATE_CAP and "error" in err


def test_membrane_cap_exit(tmp_path):
    f = tmp_path / "fuse.brane"
    f.write_text("!((mate(n) | comate(n) | drip(mate(s)))<>@muC)\n")
    code, _, err = run("analyze", str(f), "--membrane-cap", "32")
    assert code == EXIT_MEMBRANE_CAP and "32" in err


@pytest.mark.parametrize("name", ["example1", "example2", "viral"])
def test_analyze_superset_of_golden(name):
    code, out, _ = run("analyze", f"{name}.brane")
    assert code == 0
    assert contains(Estimate.from_json(json.loads(out)), golden(name)[0]).empty


@pytest.mark.parametrize("name", CORPUS)
def test_analyze_is_byte_stable(name):
    assert run("analyze", f"{name}.brane")[1] == run("analyze", f"{name}.brane")[1]


def test_analyze_text_and_dot():
    code, out, _ = run("analyze", "example1.brane", "--format", "text")
    assert code == 0 and "muP in I(*,*,*)" in out and "in C(mate_n#a89c54fd5d)" in out
    code, out, _ = run("analyze", "example1.brane", "--format", "dot")
    assert code == 0 and out.startswith("digraph estimate")


def test_check_examples(tmp_path):
    qf = tmp_path / "q.queries"
    qf.write_text("never-on cobud(o) muP\nnever-on mate(n) muP\n")
    code, out, _ = run("check", "example1.brane", "--queries", str(qf))
    rows = json.loads(out)
    assert code == 0
    assert [(r["query"], r["static"]) for r in rows] == [("never-on cobud(o) muP", True), ("never-on mate(n) muP", False)]
    assert all("dynamic" in r and "inconclusive" in r for r in rows)
    qf.write_text("never-inside muVirus muEndo\n")
    rows = json.loads(run("check", "viral.brane", "--queries", str(qf))[1])
    assert rows[0]["static"] is True


def test_check_vacuous_and_static_only(tmp_path):
    qf = tmp_path / "q.queries"
    qf.write_text("never-inside muP muGhost\n")
    code, out, err = run("check", "example1.brane", "--queries", str(qf), "--depth", "0")
    row = json.loads(out)[0]
    assert code == 0 and row["vacuous"] and row["static"] and "dynamic" not in row
    assert "muGhost" in err


def test_check_uses_sidecar_queries():
    code, out, _ = run("check", "example1.brane")
    assert code == 0 and len(json.loads(out)) == 8


@pytest.mark.parametrize("name", CORPUS)
def test_verify_passes_on_corpus(name):
    code, out, _ = run("verify", f"{name}.brane")
    assert code == 0, out
    assert out.count("PASS") == 5


def test_verify_corrupted_estimate(tmp_path):
    data = json.loads(run("analyze", "example1.brane")[1])
    removed = data["I"].pop(0)
    f = tmp_path / "est.json"
    f.write_text(json.dumps(data))
    code, out, _ = run("verify", "example1.brane", "--estimate-file", str(f))
    assert code == EXIT_VERIFY
    assert "FAIL validate" in out and "first counterexample" in out


def test_verify_golden_estimate_fails_as_partial(tmp_path):
    # the transcribed tables list only some entries, so they are not a valid estimate on their own
    code, out, _ = run("verify", "example1.brane", "--estimate-file", str(corpus_path("example1.expected.json")))
    assert code == EXIT_VERIFY


def test_strict_mode_verify_fails_on_viral():
    code, out, _ = run("verify", "viral.brane", "--mode", "strict-paper", "--format", "json")
    report = json.loads(out)
    assert code == EXIT_VERIFY and not report["pass"]
    failed = [s["suite"] for s in report["suites"] if not s["pass"]]
    assert "subject-reduction" in failed


def test_module_entry_point_without_color():
    proc = subprocess.run(
        [sys.executable, "-m", "branecfa", "verify", "example1.brane"],
        capture_output=True, text=True, env={"BRANE_CFA_COLOR": "0", "PATH": ""},
    )
    assert proc.returncode == 0 and "\033[" not in proc.stdout
