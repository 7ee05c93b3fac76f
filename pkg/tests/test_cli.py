import csv
import io
import json
import subprocess
import sys

import pytest

from parisian.cli import main
from parisian.measure import dirac, measure_to_json


def run(argv, capsys):
    status = main(argv)
    out = capsys.readouterr()
    return status, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))


def test_gen_seq(capsys):
    status, out, _ = run(["gen-seq", "--alpha", "1/2", "--n1", "16", "--depth", "2"], capsys)
    assert status == 0
    doc = json.loads(out)
    assert doc["params"]["N"] == ["16", "4097"]
    assert doc["config"]["alpha"] == "1/2"


def test_fourier_dirac_file(tmp_path, capsys):
    path = tmp_path / "dirac.json"
    path.write_text(json.dumps(measure_to_json(dirac(0))))
    status, out, _ = run(["fourier", "--measure", str(path), "--n-min", "0", "--n-max", "3"], capsys)
    assert status == 0
    table = rows(out)
    assert [r["n"] for r in table] == ["0", "1", "2", "3"]
    assert all(float(r["abs"]) == 0.5 for r in table)
    assert out.startswith("# parisian fourier\n")


def test_fourier_oracle_flag(capsys):
    status, _, _ = run(["fourier", "--measure", "lebesgue", "--n-max", "8", "--oracle"], capsys)
    assert status == 0


def test_threads_do_not_change_output(tmp_path):
    outs = []
    for threads in ("1", "4"):
        target = tmp_path / f"f{threads}.csv"
        assert main(["fourier", "--measure", "dirac:1/3", "--n-min", "-50", "--n-max", "50",
                     "--threads", threads, "--out", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_build_and_summary(tmp_path):
    out, summary = tmp_path / "fam.json", tmp_path / "summary.csv"
    assert main(["build", "--alpha", "1/2", "--n1", "16", "--depth", "2",
                 "--out", str(out), "--summary", str(summary)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verified"] is True
    assert [s["count"] for s in doc["stages"]] == [16, 464]
    assert rows(summary.read_text())[-1]["intervals"] == "464"
    assert summary.read_text().startswith("# parisian build\n")


def test_build_from_params_file(tmp_path):
    params = tmp_path / "params.json"
    assert main(["gen-seq", "--alpha", "1/2", "--n1", "16", "--depth", "2", "--out", str(params)]) == 0
    out = tmp_path / "fam.json"
    assert main(["build", "--params", str(params), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["stages"][1]["count"] == 464


def test_omega_reports_dissociation(capsys):
    status, out, _ = run(["omega", "--terms", "1,2"], capsys)
    assert status == 0
    assert "# dissociate = false" in out
    status, out, _ = run(["omega", "--terms", "1,3,9"], capsys)
    assert "# dissociate = true" in out
    assert len(rows(out)) == 27


def test_riesz(capsys):
    status, out, _ = run(["riesz", "--terms", "1,3,9", "--frequencies", "0,13,14"], capsys)
    assert status == 0
    assert [r["exact"] for r in rows(out)] == ["1/2", "1/16", "0"]


def test_riesz_verification_failure(capsys):
    status, _, err = run(["riesz", "--terms", "1,3,9", "--frequencies", "13", "--tol", "-1"], capsys)
    assert status == 1
    assert "verification failed" in err


def test_select_lemma1(tmp_path, capsys):
    table = tmp_path / "table.csv"
    status, out, _ = run(["select", "--measure", "dirac", "--candidates", "powers:4:12", "--delta", "1",
                          "--steps", "3", "--table", str(table)], capsys)
    assert status == 0
    cert = json.loads(out)["certificate"]
    assert cert["frequencies"] == [16, 64, 256]
    assert cert["verified"] is True
    assert len(rows(table.read_text())) == 27


def test_select_lemma2(capsys):
    status, out, _ = run(["select", "--measure", "lebesgue", "--mode", "lemma2", "--alpha", "1/2",
                          "--n1", "16", "--depth", "2", "--steps", "1"], capsys)
    # a full-circle measure has coefficients vanishing off 0: the chain cannot start
    assert status == 1


def test_select_lemma2_atomic(tmp_path, capsys):
    from fractions import Fraction

    from parisian.acceptance import lemma2_measure
    from parisian.construction import generate_sequence

    params = generate_sequence(Fraction(1, 2), 16, 3)
    path = tmp_path / "atoms.json"
    path.write_text(json.dumps(measure_to_json(lemma2_measure(params))))
    status, out, _ = run(["select", "--measure", str(path), "--mode", "lemma2", "--alpha", "1/2",
                          "--n1", "16", "--depth", "3", "--steps", "2"], capsys)
    assert status == 0
    cert = json.loads(out)["certificate"]
    assert cert["mode"] == "lemma2"
    assert cert["lower_bound"] == cert["gamma_chain"][-2] / 6
    assert [s["truncation_t"] for s in cert["steps"]] == [3, 3]


def test_select_pool_exhausted(capsys):
    status, _, err = run(["select", "--measure", "dirac", "--candidates", "2,4", "--delta", "1",
                          "--steps", "1"], capsys)
    assert status == 1
    assert "NoAdmissibleCandidateError" in err


def test_dim_audit(tmp_path, capsys):
    out_csv = tmp_path / "audit.csv"
    status, out, _ = run(["dim-audit", "--alpha", "1/2", "--n1", "16", "--depth", "2",
                          "--s", "1/10,2/5", "--csv", str(out_csv)], capsys)
    assert status == 0
    doc = json.loads(out)
    assert [r["passed"] for r in doc["reports"]] == [True, True]
    assert doc["reports"][0]["dimension_estimate"] == pytest.approx(0.5188265304757074)
    assert {r["pass"] for r in rows(out_csv.read_text())} <= {"pass", "n/a"}


class TestConfig:
    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"alpha": "1/2", "n1": 16, "depth": 2}))
        status, out, _ = run(["gen-seq", "--config", str(cfg)], capsys)
        assert status == 0
        assert json.loads(out)["params"]["N"] == ["16", "4097"]

    def test_list_values(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"terms": [1, 3, 9], "frequencies": [13]}))
        status, out, _ = run(["riesz", "--config", str(cfg)], capsys)
        assert status == 0 and rows(out)[0]["exact"] == "1/16"

    def test_command_line_overrides(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"alpha": "1/2", "n1": 16, "depth": 2}))
        status, out, _ = run(["gen-seq", "--config", str(cfg), "--depth", "1"], capsys)
        assert json.loads(out)["params"]["N"] == ["16"]

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"alpha": "1/2", "n1": 16, "depth": 2, "seed": 3}))
        status, _, err = run(["gen-seq", "--config", str(cfg)], capsys)
        assert status == 2 and "seed" in err

    def test_inexact_rational(self, capsys):
        status, _, _ = run(["gen-seq", "--alpha", "0.5", "--n1", "16", "--depth", "2"], capsys)
        assert status == 2

    def test_missing_arguments(self, capsys):
        status, _, err = run(["gen-seq", "--alpha", "1/2"], capsys)
        assert status == 2

    def test_bad_measure(self, capsys):
        status, _, _ = run(["fourier", "--measure", "/nonexistent.json"], capsys)
        assert status == 2

    def test_bad_threads(self, capsys):
        status, _, _ = run(["fourier", "--measure", "dirac", "--threads", "0"], capsys)
        assert status == 2


def test_rerun_byte_identical(tmp_path):
    outs = []
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        target = tmp_path / d / "cert.json"
        assert main(["select", "--measure", "dirac", "--candidates", "powers:4:8", "--delta", "1",
                     "--steps", "2", "--out", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "parisian", "omega", "--terms", "1,3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert len(rows(proc.stdout)) == 9


def test_self_test_clean_checkout_exits_zero(capsys):
    status, out, _ = run(["self-test"], capsys)
    print(out)
    assert status == 0
