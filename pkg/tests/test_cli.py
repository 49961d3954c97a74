import json

import numpy as np
import pandas as pd
import pytest

import settings as cfg
from dmc_whi import channel_to_json
from main import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def channel_file(tmp_path):
    def write(ch, name="channel.json"):
        path = tmp_path / name
        path.write_text(channel_to_json(ch))
        return str(path)
    return write


class TestRate:
    def test_very_strong(self, capsys):
        code, out, _ = run(capsys, "rate", "--a", "3", "--p1", "2", "--p2", "2")
        record = json.loads(out)
        assert code == cfg.EXIT_OK
        assert record["rate_bits"] == 0.0
        assert record["regime"] == "VeryStrong"

    def test_weak_value(self, capsys):
        _, out, _ = run(capsys, "rate", "--a", "0.5", "--p1", "2", "--p2", "0.6666667")
        assert json.loads(out)["rate_bits"] == pytest.approx(0.321928, abs=1e-6)

    def test_zero_power(self, capsys):
        _, out, _ = run(capsys, "rate", "--a", "0.5", "--p1", "0", "--p2", "1")
        assert json.loads(out)["rate_bits"] == 0.0

    def test_missing_flag(self, capsys):
        code, _, _ = run(capsys, "rate", "--a", "3", "--p1", "2")
        assert code == cfg.EXIT_USAGE

    def test_unknown_flag(self, capsys):
        code, _, _ = run(capsys, "rate", "--a", "3", "--p1", "2", "--p2", "2", "--db")
        assert code == cfg.EXIT_USAGE

    def test_negative_value(self, capsys):
        code, out, err = run(capsys, "rate", "--a", "-1", "--p1", "2", "--p2", "2")
        assert code == cfg.EXIT_USAGE
        assert out == ""
        assert "a must be" in err

    def test_text_format(self, capsys):
        code, out, _ = run(capsys, "rate", "--a", "3", "--p1", "2", "--p2", "2", "--format", "text")
        assert code == cfg.EXIT_OK
        assert "VeryStrong" in out
        assert "rate_bits" in out

    def test_repeatable(self, capsys):
        argv = ("rate", "--a", "0.7", "--p1", "1.5", "--p2", "0.4", "--quiet")
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second


class TestPowerControlAndAsymptotic:
    def test_power_control(self, capsys):
        _, out, _ = run(capsys, "power-control", "--a", "2", "--p1max", "2", "--p2max", "4")
        record = json.loads(out)
        assert (record["p1"], record["p2"]) == (1.0, 4.0)

    def test_asymptotic(self, capsys):
        _, out, _ = run(capsys, "asymptotic", "--a", "0.25")
        record = json.loads(out)
        assert record["rate_bits"] == pytest.approx(2.0)
        assert record["wiretap_bits"] == pytest.approx(1.0)

    def test_asymptotic_domain(self, capsys):
        code, _, _ = run(capsys, "asymptotic", "--a", "0")
        assert code == cfg.EXIT_USAGE


class TestSweep:
    def test_helper_power_csv(self, capsys, tmp_path):
        out_file = tmp_path / "p2_a2.csv"
        code, out, _ = run(capsys, "sweep", "--var", "p2", "--from", "0", "--to", "8", "--steps", "81",
                           "--a", "2", "--p1max", "2", "--power-control", "on", "--out", str(out_file))
        assert code == cfg.EXIT_OK
        assert json.loads(out)["rows"] == 81

        frame = pd.read_csv(out_file)
        assert list(frame.columns) == cfg.SWEEP_COLUMNS
        assert (frame.loc[frame["value"] <= 1.0, "rate_bits"] == 0).all()
        assert (frame.loc[frame["value"] > 1.0, "rate_bits"] > 0).all()

    def test_gain_sweep_peak(self, capsys):
        code, out, _ = run(capsys, "sweep", "--var", "a", "--from", "0", "--to", "4", "--steps", "401",
                           "--p1max", "2", "--p2max", "2")
        record = json.loads(out)
        assert code == cfg.EXIT_OK
        assert len(record["rows"]) == 401
        assert record["peak_value"] == pytest.approx(np.sqrt(3), abs=1e-3)
        assert all(r["rate_bits"] == 0 for r in record["rows"] if r["value"] >= 3)

    def test_csv_on_stdout(self, capsys):
        _, out, _ = run(capsys, "sweep", "--var", "a", "--from", "0", "--to", "1", "--steps", "3",
                        "--p1max", "2", "--p2max", "2", "--format", "text")
        lines = out.strip().splitlines()
        assert lines[0] == ",".join(cfg.SWEEP_COLUMNS)
        assert len(lines) == 4

    def test_single_step_rejected(self, capsys):
        code, _, _ = run(capsys, "sweep", "--var", "a", "--from", "0", "--to", "0", "--steps", "1",
                         "--p1max", "2", "--p2max", "2")
        assert code == cfg.EXIT_USAGE

    def test_reversed_range_rejected(self, capsys):
        code, _, _ = run(capsys, "sweep", "--var", "a", "--from", "3", "--to", "1", "--steps", "5",
                         "--p1max", "2", "--p2max", "2")
        assert code == cfg.EXIT_USAGE

    def test_missing_fixed_parameter(self, capsys):
        code, _, err = run(capsys, "sweep", "--var", "a", "--from", "0", "--to", "1", "--steps", "5",
                           "--p1max", "2")
        assert code == cfg.EXIT_USAGE
        assert "--p2max" in err

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", "--var", "a", "--from", "0", "--to", "1", "--steps", "5",
                         "--p1max", "2", "--p2max", "2", "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == cfg.EXIT_IO


class TestDmcCommands:
    def test_dmc_rate(self, capsys, channel_file, noiseless_rx_independent_eve):
        path = channel_file(noiseless_rx_independent_eve)
        code, out, _ = run(capsys, "dmc-rate", "--channel", path, "--grid", "4")
        record = json.loads(out)
        assert code == cfg.EXIT_OK
        assert list(record) == cfg.DMC_RESULT_FIELDS
        assert record["rate_bits"] == pytest.approx(1.0)
        assert record["px1"] == [0.5, 0.5]

    def test_dmc_classify(self, capsys, channel_file, degraded_channel):
        path = channel_file(degraded_channel)
        code, out, _ = run(capsys, "dmc-classify", "--channel", path, "--samples", "200")
        record = json.loads(out)
        assert code == cfg.EXIT_OK
        assert record["class"] == "Weak"
        assert record["samples"] == 200
        assert record["certified_over_samples"] is True

    def test_malformed_channel(self, capsys, tmp_path):
        kernel = np.full((2, 2, 2, 2), 0.25)
        kernel[0, 1] = 0.2
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"nx1": 2, "nx2": 2, "ny1": 2, "ny2": 2, "kernel": kernel.tolist()}))
        code, out, err = run(capsys, "dmc-rate", "--channel", str(path))
        assert code == cfg.EXIT_USAGE
        assert "[x1=0][x2=1]" in err
        assert out == ""

    @pytest.mark.parametrize("bad_size", [None, [2], "two"])
    def test_non_integer_size_field(self, capsys, tmp_path, bad_size):
        kernel = np.full((2, 2, 2, 2), 0.25)
        path = tmp_path / "bad_size.json"
        path.write_text(json.dumps({"nx1": bad_size, "nx2": 2, "ny1": 2, "ny2": 2, "kernel": kernel.tolist()}))
        code, out, err = run(capsys, "dmc-rate", "--channel", str(path))
        assert code == cfg.EXIT_USAGE
        assert "'nx1'" in err
        assert out == ""

    def test_non_object_channel_file(self, capsys, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2, 3]")
        code, _, _ = run(capsys, "dmc-classify", "--channel", str(path))
        assert code == cfg.EXIT_USAGE

    def test_missing_channel_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "dmc-classify", "--channel", str(tmp_path / "nope.json"))
        assert code == cfg.EXIT_IO


class TestSimulate:
    def test_independent_eavesdropper(self, capsys, channel_file, noiseless_rx_independent_eve):
        path = channel_file(noiseless_rx_independent_eve)
        code, out, _ = run(capsys, "simulate", "--channel", path, "--n", "4", "--r1s", "0.5",
                           "--r1d", "0", "--r2", "0", "--seeds", "1,2,3", "--trials", "200")
        record = json.loads(out)
        assert code == cfg.EXIT_OK
        assert len(record["reports"]) == 3
        for report in record["reports"]:
            assert report["leakage"] == pytest.approx(0.0, abs=1e-9)

    def test_budget_exceeded(self, capsys, channel_file, noiseless_rx_independent_eve):
        path = channel_file(noiseless_rx_independent_eve)
        code, _, err = run(capsys, "simulate", "--channel", path, "--n", "12", "--r1s", "1",
                           "--r1d", "1", "--r2", "1")
        assert code == cfg.EXIT_USAGE
        assert "exceeds budget" in err

    def test_bad_seed_list(self, capsys, channel_file, noiseless_rx_independent_eve):
        path = channel_file(noiseless_rx_independent_eve)
        code, _, _ = run(capsys, "simulate", "--channel", path, "--n", "2", "--r1s", "1", "--seeds", "a,b")
        assert code == cfg.EXIT_USAGE

    def test_custom_inputs(self, capsys, channel_file, noiseless_rx_independent_eve):
        path = channel_file(noiseless_rx_independent_eve)
        code, _, _ = run(capsys, "simulate", "--channel", path, "--n", "2", "--r1s", "0.5",
                         "--px1", "0.5,0.5", "--px2", "1,0", "--trials", "50")
        assert code == cfg.EXIT_OK


class TestThreads:
    def test_env_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv(cfg.THREADS_ENV_VAR, "2")
        code, _, _ = run(capsys, "rate", "--a", "1", "--p1", "1", "--p2", "1")
        assert code == cfg.EXIT_OK

    def test_bad_env_value(self, capsys, monkeypatch):
        monkeypatch.setenv(cfg.THREADS_ENV_VAR, "many")
        code, _, err = run(capsys, "rate", "--a", "1", "--p1", "1", "--p2", "1")
        assert code == cfg.EXIT_USAGE
        assert cfg.THREADS_ENV_VAR in err

    def test_flag_overrides_env(self, capsys, monkeypatch):
        monkeypatch.setenv(cfg.THREADS_ENV_VAR, "many")
        code, _, _ = run(capsys, "rate", "--a", "1", "--p1", "1", "--p2", "1", "--threads", "1")
        assert code == cfg.EXIT_OK
