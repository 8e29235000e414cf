import json

import pandas as pd
import pytest

from runner import experiments
from runner.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from runner.models import ExperimentOutcome
from runner.log_manager import run_log_path
from runner.output import metadata_path


def _run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


class TestNearProduct:
    def test_reference_row(self, tmp_path):
        code, out = _run(tmp_path, "near-product", "--epsilon", "0.1")
        assert code == EXIT_OK
        df = pd.read_csv(out)
        assert len(df) == 1
        assert df["sum"].iloc[0] == pytest.approx(-0.071947, abs=1e-6)

    def test_epsilon_list(self, tmp_path):
        code, out = _run(tmp_path, "near-product", "--epsilons", "0.01", "0.2")
        assert code == EXIT_OK
        assert list(pd.read_csv(out)["epsilon"]) == [0.01, 0.2]


class TestDeterminism:
    def test_crooks_byte_identical(self, tmp_path):
        argv = ["crooks", "--seed", "7", "--beta", "1.0", "--trials", "5"]
        code_a, a = _run(tmp_path, *argv, name="a.csv")
        code_b, b = _run(tmp_path, *argv, name="b.csv")
        assert code_a == code_b == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_workers_do_not_change_rows(self, tmp_path):
        _, serial = _run(tmp_path, "balance", "--seed", "3", "--trials", "12", name="serial.csv")
        _, parallel = _run(tmp_path, "balance", "--seed", "3", "--trials", "12", "--workers", "4", name="parallel.csv")
        assert serial.read_bytes() == parallel.read_bytes()


class TestExperiments:
    def test_balance_rows(self, tmp_path):
        code, out = _run(tmp_path, "balance", "--trials", "100", "--dims", "2x2", "--seed", "1")
        assert code == EXIT_OK
        df = pd.read_csv(out)
        assert len(df) == 100
        assert (df["sum"] >= -1e-9).all()
        assert ((df["sum"] - df["I_final"]).abs() <= 1e-9).all()

    @pytest.mark.parametrize(
        "argv",
        [
            ["decorrelate"],
            ["schrodinger", "--trials", "20"],
            ["sweep"],
            ["collide"],
            ["jarzynski", "--trials", "5"],
            ["symmetry", "--trials", "5"],
            ["heatflow", "--trials", "10"],
            ["damping", "--trials", "3", "--beta", "1.0986122886681098"],
            ["search", "--states", "demo", "--max-iterations", "100", "--restarts", "1"],
        ],
    )
    def test_subcommands_pass(self, tmp_path, argv):
        code, out = _run(tmp_path, *argv)
        assert code == EXIT_OK
        assert out.exists()
        assert metadata_path(out).exists()

    def test_search_random_states(self, tmp_path):
        code, out = _run(tmp_path, "search", "--states", "random", "--trials", "2", "--seed", "1")
        assert code == EXIT_OK
        df = pd.read_csv(out)
        assert len(df) == 2
        assert (df["I_initial"] > 0.01).all()
        assert (df["achieved_sum"] < 0).all()

    def test_search_bures_delta_sweep(self, tmp_path):
        code, out = _run(tmp_path, "search", "--states", "bures", "--trials", "2", "--delta", "0.3", "0.15")
        assert code == EXIT_OK
        df = pd.read_csv(out)
        assert sorted(df["delta"].unique()) == [0.15, 0.3]
        assert len(df) == 4
        assert (df["bures_to_product"] <= df["delta"] + 1e-9).all()
        meta = json.loads(metadata_path(out).read_text())
        assert set(meta["summary"]["mean_abs_sum_by_delta"]) == {"0.3", "0.15"}

    def test_crooks_includes_worked_qubit_flip(self, tmp_path):
        code, out = _run(tmp_path, "crooks", "--trials", "2")
        assert code == EXIT_OK
        flip = pd.read_csv(out).set_index("case").loc["pauli_x"]
        assert flip["max_ratio"] == pytest.approx(3.0, rel=1e-12)
        assert flip["avg_sigma"] == pytest.approx(0.549306, abs=1e-6)

    def test_collide_idle_gate_fails(self, tmp_path):
        # theta = 0: nessuno spostamento e inversione mescolata esatta
        code, out = _run(tmp_path, "collide", "--theta", "0")
        assert code == EXIT_FAILED
        failures = json.loads(metadata_path(out).read_text())["failures"]
        assert any("ferma" in f for f in failures)
        assert any("mescolata" in f for f in failures)

    def test_collide_reports_reversal(self, tmp_path):
        code, out = _run(tmp_path, "collide")
        assert code == EXIT_OK
        summary = json.loads(metadata_path(out).read_text())["summary"]
        assert summary["reversal_distance"] <= 1e-9
        assert summary["forward_drift"] >= 0.1
        assert summary["shuffled_distance"] > 0.01

    def test_sweep_reports_planned_cells(self, tmp_path):
        code, out = _run(
            tmp_path, "sweep", "--couplings", "0", "1", "--sweep-epsilons", "0", "0.1", "--times", "0.5", name="sweep.csv"
        )
        assert code == EXIT_OK
        meta = json.loads(metadata_path(out).read_text())
        assert meta["summary"]["planned_cells"] == 4


class TestOutput:
    def test_json_format(self, tmp_path):
        code, out = _run(tmp_path, "decorrelate", "--format", "json", name="demo.json")
        assert code == EXIT_OK
        payload = json.loads(out.read_text())
        assert set(payload) == {"metadata", "rows"}
        meta = payload["metadata"]
        assert meta["experiment"] == "decorrelate"
        assert meta["seed"] == 0
        assert "Philox" in meta["rng_algorithm"]
        assert meta["failures"] == []
        assert "rows" not in meta

    def test_config_file_with_flag_override(self, tmp_path):
        config = tmp_path / "exp.yaml"
        config.write_text("seed: 9\ntrials: 3\nbeta: 0.5\n")
        code, out = _run(tmp_path, "crooks", "--config", str(config), "--trials", "4")
        assert code == EXIT_OK
        meta = json.loads(metadata_path(out).read_text())
        assert meta["seed"] == 9
        assert meta["config"]["trials"] == 4
        assert meta["config"]["beta"] == 0.5

    def test_run_log_written(self, tmp_path):
        code, out = _run(tmp_path, "decorrelate")
        assert code == EXIT_OK
        text = run_log_path(out).read_text(encoding="utf-8")
        assert "Avvio decorrelate" in text
        assert "completato" in text


class TestExitCodes:
    def test_unknown_flag(self, tmp_path):
        assert main(["balance", "--bogus", "1"]) == EXIT_USAGE

    def test_unknown_subcommand(self):
        assert main(["teleport"]) == EXIT_USAGE

    def test_invalid_value(self, tmp_path):
        code, out = _run(tmp_path, "near-product", "--epsilon", "1.5")
        assert code == EXIT_USAGE
        assert not out.exists()

    def test_missing_config_file(self, tmp_path):
        assert main(["balance", "--config", str(tmp_path / "missing.yaml")]) == EXIT_USAGE

    def test_flag_of_other_subcommand(self):
        assert main(["balance", "--theta", "0.3"]) == EXIT_USAGE

    def test_invariant_failure(self, tmp_path, monkeypatch):
        def failing(config):
            return ExperimentOutcome(rows=[{"x": 1.0}], failures=["somma negativa"])

        monkeypatch.setitem(experiments.EXPERIMENTS, "decorrelate", failing)
        code, out = _run(tmp_path, "decorrelate")
        assert code == EXIT_FAILED
        assert json.loads(metadata_path(out).read_text())["failures"] == ["somma negativa"]
