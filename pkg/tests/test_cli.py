import csv
import json

import pytest

import main as cli_module
from main import main
from tools.distributions import build_fading_grid, dump_constellation, psk
from tools.information import c_comm_closed_form, c_sense_closed_form
from utils.output import format_number

SMALL_GRID = ["--n-gamma", "16", "--n-theta", "16"]


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestCapacityCommand:
    def test_zero_power_row_and_headers(self, tmp_path):
        out = tmp_path / "capacity.csv"
        code = main(["capacity", "--snr-min", "0", "--snr-max", "0", "--include-zero-power", "--out", str(out)] + SMALL_GRID)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "snr_db,C_comm,C_sense"
        assert lines[1] == "-inf,0,0"
        assert len(lines) == 3

    def test_matches_library_values_exactly(self, tmp_path):
        out = tmp_path / "capacity.csv"
        assert main(["capacity", "--snr-min", "0", "--snr-max", "0", "--out", str(out)]) == 0
        row = read_csv(out)[0]
        grid = build_fading_grid(64, 64)
        assert row["C_comm"] == format_number(c_comm_closed_form(1.0, 1.0, grid))
        assert row["C_sense"] == format_number(c_sense_closed_form(1.0, 1.0, grid))

    def test_sweep_is_sorted_and_deterministic(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["capacity", "--snr-min", "-10", "--snr-max", "10", "--snr-step", "5"] + SMALL_GRID
        assert main(args + ["--out", str(first)]) == 0
        assert main(args + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()
        snrs = [float(row["snr_db"]) for row in read_csv(first)]
        assert snrs == [-10.0, -5.0, 0.0, 5.0, 10.0]

    def test_equal_noise_gives_equal_columns(self, tmp_path):
        out = tmp_path / "capacity.csv"
        args = ["capacity", "--snr-min", "0", "--snr-max", "20", "--snr-step", "10", "--sigma-s-sq", "1"]
        assert main(args + SMALL_GRID + ["--out", str(out)]) == 0
        for row in read_csv(out):
            assert row["C_comm"] == row["C_sense"]

    def test_json_output(self, tmp_path):
        out = tmp_path / "capacity.json"
        assert main(["capacity", "--snr-min", "0", "--snr-max", "0", "--format", "json", "--out", str(out)] + SMALL_GRID) == 0
        rows = json.loads(out.read_text())
        assert set(rows[0]) >= {"snr_db", "P", "C_comm", "C_sense"}

    def test_stdout(self, capsys):
        assert main(["capacity", "--snr-min", "0", "--snr-max", "0"] + SMALL_GRID) == 0
        assert capsys.readouterr().out.startswith("snr_db,C_comm,C_sense\n")

    def test_unwritable_output(self, tmp_path):
        out = tmp_path / "missing" / "dir" / "capacity.csv"
        assert main(["capacity", "--snr-min", "0", "--snr-max", "0", "--out", str(out)] + SMALL_GRID) == 1


class TestConfigErrors:
    @pytest.mark.parametrize(
        "args",
        [
            ["capacity", "--snr-min", "10", "--snr-max", "0"],
            ["capacity", "--snr-step", "0"],
            ["rates", "--lambda", "1.5"],
            ["capacity", "--n-gamma", "4"],
            ["mi"],
            ["bogus"],
            ["capacity", "--snr-min", "nan"],
        ],
    )
    def test_usage_errors_exit_one(self, args):
        assert main(args) == 1

    def test_unexpected_failure_exits_one(self, monkeypatch):
        async def broken_study(self):
            raise RuntimeError("solver state lost")

        monkeypatch.setattr(cli_module.IsacStudySystem, "run_study", broken_study)
        assert main(["capacity", "--snr-min", "0", "--snr-max", "0"] + SMALL_GRID) == 1


class TestMiCommand:
    def test_qpsk_file_attains_capacity(self, tmp_path):
        constellation = tmp_path / "qpsk.json"
        dump_constellation(psk(4, 1.0), constellation)
        out = tmp_path / "mi.json"
        assert main(["mi", "--constellation", str(constellation), "--format", "json", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["is_symmetric"] is True
        assert report["avg_power"] == pytest.approx(1.0)
        assert abs(report["cmi_gap"]) < 1e-4
        assert abs(report["smi_gap"]) < 1e-4

    def test_bpsk_file_has_a_gap(self, tmp_path):
        constellation = tmp_path / "bpsk.json"
        dump_constellation(psk(2, 10.0**0.5), constellation)
        out = tmp_path / "mi.json"
        assert main(["mi", "--constellation", str(constellation), "--format", "json", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["is_symmetric"] is False
        assert report["cmi_gap"] > 0

    def test_zero_point_file(self, tmp_path):
        constellation = tmp_path / "zero.json"
        constellation.write_text(json.dumps({"points": [[0, 0]], "probs": [1.0]}))
        out = tmp_path / "mi.json"
        assert main(["mi", "--constellation", str(constellation), "--format", "json", "--out", str(out)] + SMALL_GRID) == 0
        report = json.loads(out.read_text())
        assert report["cmi"] == pytest.approx(0.0, abs=1e-12)
        assert report["smi"] == pytest.approx(0.0, abs=1e-12)

    def test_malformed_file(self, tmp_path):
        constellation = tmp_path / "bad.json"
        constellation.write_text(json.dumps({"points": [[1, 0]], "probs": "one"}))
        assert main(["mi", "--constellation", str(constellation)] + SMALL_GRID) == 1


class TestPowerControlCommand:
    def test_policy_curves_and_sidecar(self, tmp_path):
        out = tmp_path / "policy.csv"
        assert main(["power-control", "--lambda", "0", "--lambda", "1", "--out", str(out)]) == 0

        rows = read_csv(out)
        assert len(rows) == 2 * 201
        flat = [float(r["power"]) for r in rows if float(r["lambda"]) == 0.0]
        comm = [float(r["power"]) for r in rows if float(r["lambda"]) == 1.0]
        assert max(flat) - min(flat) <= 1e-6
        assert flat[0] == pytest.approx(1.0, rel=1e-4)
        assert comm[0] == 0.0
        assert max(comm) > 1.0

        sidecar = json.loads((tmp_path / "policy.csv.meta.json").read_text())
        records = {record["lambda"]: record for record in sidecar["policies"]}
        assert set(records) == {0.0, 1.0}
        assert records[1.0]["cutoff_gamma_c"] > 0
        assert records[0.0]["snr_db"] == 0.0
        assert all(record["kkt_ok"] for record in records.values())


class TestRatesCommand:
    def test_rates_row_relations(self, tmp_path):
        out = tmp_path / "rates.csv"
        args = ["rates", "--snr-min", "0", "--snr-max", "0", "--lambda", "0", "--lambda", "1", "--out", str(out)]
        assert main(args) == 0
        rows = read_csv(out)
        assert list(rows[0]) == ["snr_db", "lambda", "R_c_csit", "R_s", "C_comm_csir", "C_sense_csir"]
        by_lambda = {float(r["lambda"]): {k: float(v) for k, v in r.items()} for r in rows}
        assert by_lambda[0.0]["R_s"] == pytest.approx(by_lambda[0.0]["C_sense_csir"], abs=1e-4)
        assert by_lambda[1.0]["R_c_csit"] >= by_lambda[1.0]["C_comm_csir"] - 1e-6

    @pytest.mark.slow
    def test_communication_policy_at_40_db(self, tmp_path):
        out = tmp_path / "rates.csv"
        args = ["rates", "--snr-min", "40", "--snr-max", "40", "--lambda", "1", "--out", str(out)]
        assert main(args) == 0
        row = {k: float(v) for k, v in read_csv(out)[0].items()}
        assert row["C_comm_csir"] - 1e-6 <= row["R_c_csit"] <= 2.0


class TestSimulateCommand:
    def test_tiny_sample_with_wide_tolerance(self, tmp_path):
        out = tmp_path / "mc.json"
        args = ["simulate", "--samples", "100", "--alpha", "1e-30", "--z-max", "20", "--format", "json", "--out", str(out)]
        assert main(args) == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        assert len(report["cases"]) == 20
        noiseless = report["cases"][-1]
        assert noiseless["counts"] == [0, 0, 100, 0]

    def test_impossible_tolerance_fails_with_exit_two(self, tmp_path):
        out = tmp_path / "mc.json"
        args = ["simulate", "--samples", "1000", "--z-max", "1e-9", "--format", "json", "--out", str(out)]
        assert main(args) == 2
        report = json.loads(out.read_text())
        assert report["passed"] is False
        assert report["failed_cases"]
        assert "z_scores" in report["cases"][0]

    @pytest.mark.slow
    def test_default_battery_passes(self, tmp_path):
        out = tmp_path / "mc.json"
        assert main(["simulate", "--format", "json", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["passed"] is True
