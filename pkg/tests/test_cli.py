import csv
import json
import subprocess
import sys

import jsonschema
import pytest

from zklab.cli import _schema, main


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--output-dir", str(out)])
    return code, out


class TestVerify:
    def test_resonance_passes(self, tmp_path):
        code, out = run(tmp_path, "verify", "--family", "resonance", "--samples", "10000", "--seed", "7")
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        jsonschema.validate(report, _schema("report"))
        rep = report["reports"][0]
        assert rep["max_ratio"] < 1e-9 and rep["seed"] == 7
        meta = json.loads((out / "meta.json").read_text())
        jsonschema.validate(meta, _schema("meta"))
        assert meta["seed"] == 7 and meta["config"]["family"] == "resonance"

    def test_csv(self, tmp_path):
        code, out = run(tmp_path, "verify", "--family", "regions", "--samples", "500")
        assert code == 0
        rows = list(csv.reader((out / "report.csv").open()))
        assert rows[0] == ["name", "sample", "ratio"]
        assert all(r[0] == "regions" for r in rows[1:])

    def test_hypothesis_gate(self, tmp_path, capsys):
        code, out = run(tmp_path, "verify", "--family", "l4", "--b", "0.40")
        assert code == 1
        assert "b > 5/12" in capsys.readouterr().err
        assert not (out / "report.json").exists()

    def test_config_family_then_gate(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"family": "str2", "ensemble": 2}))
        code, _ = run(tmp_path, "verify", "--config", str(cfg))
        assert code == 0
        code, _ = run(tmp_path, "verify", "--config", str(cfg), "--family", "bil1", "--b", "0.4")
        assert code == 1

    def test_deterministic(self, tmp_path):
        args = ("verify", "--family", "str1", "--ensemble", "3", "--seed", "11")
        _, a = run(tmp_path, *args, name="a")
        _, b = run(tmp_path, *args, name="b")
        for f in ("report.json", "report.csv", "meta.json"):
            assert (a / f).read_bytes() == (b / f).read_bytes()


class TestConfig:
    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"family": "resonance", "samples": 100, "seed": 1}))
        code, out = run(tmp_path, "verify", "--config", str(cfg), "--seed", "9")
        assert code == 0
        meta = json.loads((out / "meta.json").read_text())
        assert meta["seed"] == 9 and meta["config"]["samples"] == 100

    @pytest.mark.parametrize(
        "content", ['{"family": "resonance", "bogus": 1}', '[1, 2]', "{not json", '{"samples": "many"}']
    )
    def test_bad_config(self, tmp_path, content):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(content)
        code, _ = run(tmp_path, "verify", "--family", "resonance", "--config", str(cfg))
        assert code == 1

    def test_missing_family(self, tmp_path):
        assert run(tmp_path, "verify")[0] == 1

    def test_unknown_command(self, tmp_path):
        assert main(["frobnicate"]) == 1

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code = main(["resonance", "--samples", "10", "--output-dir", str(blocker / "sub")])
        assert code == 1


class TestSolve:
    def test_zero_amplitude(self, tmp_path):
        code, out = run(tmp_path, "solve", "--amplitude", "0", "--nx", "8", "--ny", "8", "--nt", "4")
        assert code == 0
        rows = list(csv.reader((out / "trajectory.csv").open()))
        assert rows[0] == ["t", "x", "y", "value"]
        assert len(rows) == 1 + 5 * 64
        assert all(float(r[3]) == 0.0 for r in rows[1:])
        side = json.loads((out / "trajectory.json").read_text())
        jsonschema.validate(side, _schema("solve"))

    def test_random_rk4(self, tmp_path):
        code, out = run(tmp_path, "solve", "--initial", "random", "--method", "rk4", "--nt", "16", "--seed", "3")
        assert code == 0
        side = json.loads((out / "trajectory.json").read_text())
        assert side["method"] == "if-rk4" and side["l2_drift"] < 1e-6

    def test_divergent_exit_code(self, tmp_path):
        code, _ = run(tmp_path, "solve", "--amplitude", "0.5", "--nt", "16", "--max-picard-iters", "2")
        assert code == 2

    def test_bad_grid(self, tmp_path):
        assert run(tmp_path, "solve", "--nx", "7")[0] == 1


class TestReport:
    def test_merge(self, tmp_path):
        _, a = run(tmp_path, "resonance", "--samples", "200", name="a")
        _, b = run(tmp_path, "verify", "--family", "resonance", "--samples", "100", name="b")
        code, out = run(tmp_path, "report", str(a), str(b / "report.json"), name="c")
        assert code == 0
        names = [r["name"] for r in json.loads((out / "report.json").read_text())["reports"]]
        assert names == ["resonance", "regions", "resonance"]

    def test_failed_report_propagates(self, tmp_path):
        _, a = run(tmp_path, "resonance", "--samples", "50", name="a")
        data = json.loads((a / "report.json").read_text())
        data["reports"][0]["passed"] = False
        (a / "report.json").write_text(json.dumps(data))
        assert run(tmp_path, "report", str(a), name="c")[0] == 2

    def test_needs_inputs(self, tmp_path):
        assert run(tmp_path, "report")[0] == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "zklab", "resonance", "--samples", "50", "--output-dir", str(tmp_path)],
        capture_output=True,
    )
    assert proc.returncode == 0
