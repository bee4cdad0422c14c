import json

import pytest

from mkpsim import save_instance
from mkpsim.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGeneration:
    def test_gen_adversarial_then_run_with_oracle(self, capsys, tmp_path):
        fam = tmp_path / "family.json"
        code, out, err = run_cli(
            capsys, "gen-adversarial", "--n", "2", "--W", "10", "--out", str(fam)
        )
        assert code == 0
        code, out, err = run_cli(
            capsys, "run", "--alg", "simple", "--instance", str(fam), "--oracle"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["profit"] == 4
        assert doc["opt"] == 20
        assert doc["ratio"] == "1/5"
        assert doc["bound_ok"] is False

    def test_gen_random_to_stdout_is_deterministic(self, capsys):
        argv = ["gen-random", "--m", "6", "--n", "2", "--seed", "9"]
        code1, out1, _ = run_cli(capsys, *argv)
        code2, out2, _ = run_cli(capsys, *argv)
        assert code1 == code2 == 0
        assert out1 == out2
        doc = json.loads(out1)
        assert len(doc["items"]) == 6 and len(doc["capacities"]) == 2

    def test_gen_adversarial_rejects_small_w(self, capsys):
        code, out, err = run_cli(capsys, "gen-adversarial", "--n", "2", "--W", "2")
        assert code == 2
        assert "W must be >= 3" in err


class TestRun:
    def test_empty_instance_runs_clean(self, capsys, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text('{"items": [], "capacities": [5]}')
        code, out, err = run_cli(capsys, "run", "--alg", "tree", "--instance", str(path))
        assert code == 0
        doc = json.loads(out)
        assert doc["profit"] == 0 and doc["messages"] == 0

    def test_report_and_trace_files(self, capsys, tmp_path, instance_a):
        inst = tmp_path / "a.json"
        save_instance(instance_a, inst)
        report = tmp_path / "report.json"
        trace = tmp_path / "run.trace"
        code, out, err = run_cli(
            capsys,
            "run",
            "--alg",
            "dist",
            "--instance",
            str(inst),
            "--report",
            str(report),
            "--trace",
            str(trace),
        )
        assert code == 0 and out == ""
        assert json.loads(report.read_text())["profit"] == 18
        first_line = trace.read_text().splitlines()[0]
        assert first_line == "1 S p1 weight 4"

    def test_repeated_runs_are_byte_identical(self, capsys, tmp_path, instance_a):
        inst = tmp_path / "a.json"
        save_instance(instance_a, inst)
        argv = ["run", "--alg", "tree", "--instance", str(inst), "--oracle"]
        _, out1, _ = run_cli(capsys, *argv)
        _, out2, _ = run_cli(capsys, *argv)
        assert out1 == out2

    def test_malformed_instance_exits_2(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"items": [], "capacities": [5], "spurious": 1}')
        code, out, err = run_cli(capsys, "run", "--alg", "simple", "--instance", str(path))
        assert code == 2
        assert "error" in err

    def test_missing_instance_file_exits_2(self, capsys, tmp_path):
        code, out, err = run_cli(
            capsys, "run", "--alg", "simple", "--instance", str(tmp_path / "nope.json")
        )
        assert code == 2

    def test_unknown_algorithm_is_a_usage_error(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["run", "--alg", "sorta", "--instance", "x.json"])
        assert excinfo.value.code == 2


class TestCompare:
    def test_table_output(self, capsys, tmp_path, instance_a):
        inst = tmp_path / "a.json"
        save_instance(instance_a, inst)
        code, out, err = run_cli(
            capsys, "compare", "--instance", str(inst), "--oracle"
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("algorithm,m,n,profit,opt")
        assert [line.split(",")[0] for line in lines[1:]] == [
            "simple",
            "modified",
            "dist",
            "tree",
        ]

    def test_algorithm_subset(self, capsys, tmp_path, instance_a):
        inst = tmp_path / "a.json"
        save_instance(instance_a, inst)
        code, out, _ = run_cli(
            capsys, "compare", "--instance", str(inst), "--algs", "dist", "tree"
        )
        assert code == 0
        assert len(out.splitlines()) == 3


class TestVerify:
    def test_single_instance_ok(self, capsys, tmp_path, instance_a):
        inst = tmp_path / "a.json"
        save_instance(instance_a, inst)
        code, out, err = run_cli(capsys, "verify", "--instance", str(inst))
        assert code == 0
        assert out == "verified 1 instance: OK\n"
        assert err == ""

    def test_small_sweep_ok(self, capsys):
        code, out, err = run_cli(
            capsys, "verify", "--sweep", "m=1..3", "n=1..2", "--seeds", "2"
        )
        assert code == 0
        assert out == "verified 12 instances: OK\n"

    def test_requires_exactly_one_mode(self, capsys, tmp_path, instance_a):
        inst = tmp_path / "a.json"
        save_instance(instance_a, inst)
        code, _, err = run_cli(capsys, "verify")
        assert code == 2
        code, _, err = run_cli(
            capsys, "verify", "--instance", str(inst), "--sweep", "m=1..2", "n=1..1"
        )
        assert code == 2

    def test_bad_sweep_range_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "verify", "--sweep", "m=1..3", "k=1..2")
        assert code == 2
        assert "expected n=LO..HI" in err

    def test_violation_exits_1_with_diagnostics(self, capsys, tmp_path, instance_a, monkeypatch):
        import mkpsim.harness as harness

        monkeypatch.setattr(harness, "exact_optimum", lambda inst, **kw: None)
        inst = tmp_path / "a.json"
        save_instance(instance_a, inst)
        code, out, err = run_cli(capsys, "verify", "--instance", str(inst))
        assert code == 1
        assert "violation" in err
        assert "1 violation(s)" in out
