import csv
import json

import pytest

import src.main as cli
from src.core.config import Settings
from src.main import build_parser, main
from src.schemas.results import GuaranteeReport


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "cut.json"
    code = main(["gen", "--kind", "cut", "--n", "6", "--param", "p=0.6", "--seed", "11",
                 "--constraint", "cardinality", "--constraint-param", "k=2", "--output", str(path)])
    assert code == 0
    return path


def stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestGen:
    def test_writes_a_readable_instance(self, instance_file):
        data = json.loads(instance_file.read_text())
        assert data["n"] == 6
        assert data["constraint"] == {"kind": "cardinality", "k": 2}
        assert data["generator"] == "cut"

    def test_prints_without_output(self, capsys):
        assert main(["gen", "--kind", "coverage", "--n", "4"]) == 0
        assert stdout_json(capsys)["function"]["kind"] == "coverage"

    def test_bad_param(self):
        assert main(["gen", "--kind", "cut", "--n", "4", "--param", "p"]) == 1

    def test_unknown_kind(self):
        assert main(["gen", "--kind", "clique", "--n", "4"]) == 1


class TestRun:
    @pytest.mark.parametrize("algorithm", ["mcg", "aided-mcg", "local-search", "main"])
    def test_every_algorithm(self, instance_file, capsys, algorithm):
        code = main(["run", "--instance", str(instance_file), "--algorithm", algorithm, "--delta", "0.05"])
        assert code == 0
        payload = stdout_json(capsys)
        assert payload["algorithm"] == algorithm
        assert payload["value"] >= 0.0
        assert payload["oracle_calls"] > 0

    def test_main_reports_both_points(self, instance_file, capsys):
        assert main(["run", "--instance", str(instance_file), "--delta", "0.05", "--seed", "3"]) == 0
        payload = stdout_json(capsys)
        assert payload["chosen"] in ("x1", "x2")
        assert len(payload["x1"]) == len(payload["x2"]) == 6
        assert payload["combined"] == pytest.approx(0.23 * payload["value_x1"] + 0.77 * payload["value_x2"])

    def test_csv_output_and_trajectory(self, instance_file, tmp_path, capsys):
        trajectory = tmp_path / "trajectory.csv"
        code = main(["run", "--instance", str(instance_file), "--delta", "0.1", "--out", "csv",
                     "--trajectory-csv", str(trajectory)])
        assert code == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert header == "instance,algorithm,seed,mode,value,oracle_calls"
        with open(trajectory) as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["t", "u", "y_u", "x_u", "w_u"]

    def test_missing_instance(self, tmp_path):
        assert main(["run", "--instance", str(tmp_path / "absent.json")]) == 1

    def test_unknown_algorithm_is_a_usage_error(self, instance_file):
        with pytest.raises(SystemExit) as info:
            main(["run", "--instance", str(instance_file), "--algorithm", "greedy"])
        assert info.value.code == 1

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 1


class TestVerify:
    def test_passes_on_a_small_instance(self, instance_file, capsys):
        assert main(["verify", "--instance", str(instance_file), "--delta", "0.01"]) == 0
        payload = stdout_json(capsys)
        assert payload["passed"]
        assert payload["verdicts"]["combined_guarantee"]

    def test_needs_exact_mode(self, instance_file):
        assert main(["verify", "--instance", str(instance_file), "--mode", "sampled"]) == 1

    def test_failed_verdict_exits_two(self, instance_file, monkeypatch):
        report = GuaranteeReport(
            opt_set=[0], f_opt=1.0, f_opt_minus_z=1.0, f_z_cap_opt=0.0, f_z_cup_opt=1.0,
            aided_bound=0.3, combined_guarantee=0.385, value_x1=0.1, value_x2=0.1, combined=0.1,
            verdicts={"aided_bound": False},
        )
        monkeypatch.setattr(cli, "verify_run", lambda *args, **kwargs: report)
        assert main(["verify", "--instance", str(instance_file), "--delta", "0.1"]) == 2


class TestOptimizeParams:
    def test_grid(self, capsys):
        assert main(["optimize-params"]) == 0
        payload = stdout_json(capsys)
        assert payload["objective"] >= 0.385
        assert payload["p"] == pytest.approx(payload["p1"] + payload["p2"])

    def test_fixed_switch_time(self, capsys):
        assert main(["optimize-params", "--fixed-t-s", "0.372"]) == 0
        assert stdout_json(capsys)["t_s"] == 0.372

    def test_coarse_grid(self):
        assert main(["optimize-params", "--resolution", "0.1"]) == 1


class TestBench:
    def test_writes_a_csv(self, tmp_path):
        config = {
            "instances": [{"name": "cut5", "generate": {"kind": "cut", "n": 5, "seed": 1}}],
            "algorithms": ["mcg", "main"],
            "seeds": [0, 1],
            "delta": 0.1,
        }
        config_path = tmp_path / "bench.json"
        config_path.write_text(json.dumps(config))
        output = tmp_path / "rows.csv"
        assert main(["bench", "--config", str(config_path), "--out", "csv", "--output", str(output)]) == 0
        assert len(output.read_text().splitlines()) == 5

    def test_csv_on_stdout_matches_the_file(self, tmp_path, capsys):
        config = {
            "instances": [{"name": "cut5", "generate": {"kind": "cut", "n": 5, "seed": 1}}],
            "algorithms": ["mcg"],
            "seeds": [0],
            "delta": 0.1,
        }
        config_path = tmp_path / "bench.json"
        config_path.write_text(json.dumps(config))
        output = tmp_path / "rows.csv"
        assert main(["bench", "--config", str(config_path), "--out", "csv", "--output", str(output)]) == 0
        capsys.readouterr()
        assert main(["bench", "--config", str(config_path), "--out", "csv"]) == 0
        assert capsys.readouterr().out == output.read_text()

    def test_bad_config(self, tmp_path):
        config_path = tmp_path / "bench.json"
        config_path.write_text('{"instances": [}')
        assert main(["bench", "--config", str(config_path)]) == 1


class TestSettings:
    def test_invalid_environment(self, monkeypatch):
        monkeypatch.setenv("SUBMOD_SAMPLES", "0")
        assert main(["optimize-params", "--fixed-t-s", "0.3"]) == 1

    def test_environment_seed_is_the_default(self, monkeypatch, instance_file, capsys):
        monkeypatch.setenv("SUBMOD_SEED", "7")
        assert main(["run", "--instance", str(instance_file), "--algorithm", "mcg", "--delta", "0.1"]) == 0
        assert stdout_json(capsys)["seed"] == 7


class TestFineSchedule:
    @pytest.mark.parametrize("flag", ["--fine-schedule", "--paper-schedule"])
    def test_both_spellings_select_the_fine_schedule(self, flag):
        args = build_parser(Settings.from_env()).parse_args(["run", "--instance", "x.json", flag])
        assert args.fine_schedule
        assert cli._schedule(args, 2, 0.5).total_steps == 32

    def test_off_by_default(self):
        args = build_parser(Settings.from_env()).parse_args(["run", "--instance", "x.json", "--delta", "0.1"])
        assert not args.fine_schedule
        assert cli._schedule(args, 2, 0.5).total_steps == 10
