import csv
import io
import json
import math

import numpy as np
import pytest

from polyode.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, EXIT_UNDECIDED, build_parser, main
from polyode.specio import load_corpus


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_spec(tmp_path, name, **doc):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestCheck:
    def test_degree_seven_fixture(self, capsys):
        code, out, err = run(capsys, "check", "ex52", "--theorem", "T5.5")
        assert code == EXIT_OK
        assert json.loads(out)["verdict"] == "Satisfied"
        assert err.strip() == "T5.5: Satisfied"

    def test_violated_exit(self, capsys, tmp_path):
        spec = write_spec(tmp_path, "neg", n=2, T=2, coefficients={"2": "-1"})
        code, out, _ = run(capsys, "check", "--input", spec, "--theorem", "T5.1")
        assert code == EXIT_FAIL
        labels = [c["label"] for c in json.loads(out)["conditions"] if c["margin"] < 0]
        assert labels and all(lbl.startswith("1⁰") for lbl in labels)

    def test_degree_six_fixture_corollary(self, capsys):
        # the forcing term changes sign, so a_0 <= 0 fails and the exit code says so
        code, out, _ = run(capsys, "check", "ex51", "--theorem", "C5.1")
        assert code == EXIT_FAIL
        assert json.loads(out)["verdict"] == "Violated"

    def test_output_file_and_determinism(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert run(capsys, "check", "ex53", "--theorem", "T3.2", "--out", str(path))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_overrides_echoed(self, capsys):
        code, out, _ = run(capsys, "check", "bracket", "--theorem", "T4.3", "--gamma", "0.5")
        assert json.loads(out)["params"]["gamma"] == 0.5

    def test_unknown_theorem_rejected(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["check", "ex51", "--theorem", "T9.9"])

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "check", "/nonexistent/spec.json", "--theorem", "C4.1")
        assert code == EXIT_INPUT
        assert "error" in err

    def test_bad_expression(self, capsys, tmp_path):
        spec = write_spec(tmp_path, "bad", n=2, T=1, coefficients={"0": "sin(t"})
        assert run(capsys, "check", spec, "--theorem", "C4.1")[0] == EXIT_INPUT

    def test_missing_parameter(self, capsys):
        assert run(capsys, "check", "bracket", "--theorem", "T3.1")[0] == EXIT_INPUT


class TestIntegrate:
    def test_tanh_csv(self, capsys):
        code, out, err = run(capsys, "integrate", "bracket", "--y0", "0")
        assert code == EXIT_OK
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["t", "y"]
        t, y = np.array(rows[1:], dtype=float).T
        np.testing.assert_allclose(y, np.tanh(t), atol=1e-8)
        assert json.loads(err)["status"] == "ReachedEnd"

    def test_pole(self, capsys):
        code, _, err = run(capsys, "integrate", "blowup", "--y0", "1")
        assert code == EXIT_UNDECIDED
        status = json.loads(err)
        assert status["status"] == "BlowUp"
        assert status["t_escape"] == pytest.approx(1.0, abs=1e-3)

    def test_constant(self, capsys):
        code, out, _ = run(capsys, "integrate", "zero", "--y0", "3")
        ys = {row[1] for row in list(csv.reader(io.StringIO(out)))[1:]}
        assert code == EXIT_OK and ys == {"3.0"}


class TestClosed:
    def test_relaxation(self, capsys):
        code, out, _ = run(capsys, "closed", "linear_relax", "--bracket", "-5", "5")
        assert code == EXIT_OK
        (res,) = json.loads(out)["results"]
        assert res["gamma_star"] == pytest.approx(1.0, abs=1e-10)
        assert res["isolated"].startswith("Yes(")

    def test_two_signs(self, capsys):
        code, out, _ = run(capsys, "closed", "ex51", "--scan", "-3", "3")
        gammas = [r["gamma_star"] for r in json.loads(out)["results"]]
        assert code == EXIT_OK
        assert min(gammas) < 0 < max(gammas)

    def test_all_probes_escape(self, capsys):
        code, out, _ = run(capsys, "closed", "riccati_escape", "--scan", "-3", "3",
                           "--probes", "16")
        assert code == EXIT_UNDECIDED
        assert json.loads(out)["results"] == []

    def test_invalid_bracket(self, capsys):
        code, out, _ = run(capsys, "closed", "linear_relax", "--bracket", "2", "5")
        assert code == EXIT_FAIL
        assert "bracket invalid" in json.loads(out)["error"]

    def test_embedded_trajectory(self, capsys):
        _, out, _ = run(capsys, "closed", "linear_relax", "--bracket", "0", "2",
                        "--embed-trajectory")
        traj = json.loads(out)["results"][0]["trajectory"]
        assert traj[0][0] == 0.0 and traj[-1][0] == 1.0

    def test_requires_range(self, capsys):
        assert run(capsys, "closed", "linear_relax")[0] == EXIT_INPUT


class TestVerifyExamples:
    def test_bundled_corpus(self, capsys):
        code, out, _ = run(capsys, "verify-examples")
        assert code == EXIT_OK
        n = len(load_corpus())
        assert f"{n}/{n} entries match" in out

    def test_list(self, capsys):
        code, out, _ = run(capsys, "verify-examples", "--list")
        assert code == EXIT_OK
        assert "ex51-scan" in out and "fixtures:" in out

    def test_tampered_corpus(self, capsys, tmp_path):
        entries = load_corpus()
        for e in entries:
            if e["id"] == "linear-relax-closed":
                e["expect"]["gamma_star"] = 1.5
        path = tmp_path / "corpus.json"
        path.write_text(json.dumps({"entries": entries}))
        code, out, err = run(capsys, "verify-examples", "--corpus", str(path))
        assert code == EXIT_FAIL
        assert "linear-relax-closed" in err
