"""Tests for the command-line application."""

import json
import os
import re

import pytest

from main import (
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    TomographyApp,
    main,
    parse_float_list,
    parse_int_list,
)
from modules.bases import build_c1
from modules.circuits import factor_phase_permutation, load_unitary_dump
from tests.conftest import data_path


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Point the app at a small config file and keep the environment clean."""
    config = {
        "logging": {"level": "WARNING"},
        "simulation": {"default_seed": 0, "max_workers": 2},
        "sweep": {"trials": 2},
        "verify": {"haar_states": 2},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    monkeypatch.setenv("TOMOGRAPHY_CONFIG", str(path))
    monkeypatch.delenv("TOMOGRAPHY_SEED", raising=False)
    monkeypatch.delenv("TOMOGRAPHY_LOG_LEVEL", raising=False)
    return path


def _counts_args(protocol, backend):
    files = {
        (1, "simulator"): [("Z", "z_simulator.json"), ("C1_phi0", "protocol1_simulator_phi0.json"),
                           ("C1_phi1", "protocol1_simulator_phi1.json")],
        (2, "ibmqx"): [("Z", "z_ibmqx.json"), ("D1", "protocol2_ibmqx_d1.json"),
                       ("D2", "protocol2_ibmqx_d2.json")],
    }[(protocol, backend)]
    args = []
    for label, name in files:
        args += ["--counts", f"{label}={data_path(name)}"]
    return args


class TestListParsing:
    """Sweep-axis list syntax."""

    def test_range(self):
        assert parse_int_list("1-7") == [1, 2, 3, 4, 5, 6, 7]

    def test_mixed(self):
        assert parse_int_list("1,3-4,10") == [1, 3, 4, 10]

    def test_floats(self):
        assert parse_float_list("0,0.01,0.02") == [0.0, 0.01, 0.02]


class TestConfiguration:
    """Config file, environment and defaults."""

    def test_file_merged_over_defaults(self):
        app = TomographyApp()
        assert app.config["sweep"]["trials"] == 2
        assert app.config["reconstruction"]["estimator"] == "raw"

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv("TOMOGRAPHY_SEED", "42")
        assert TomographyApp().config["simulation"]["default_seed"] == 42

    def test_missing_file_uses_defaults(self, tmp_path):
        app = TomographyApp(str(tmp_path / "absent.json"))
        assert app.config["verify"]["max_n"] == 3


class TestGenCircuit:
    """gen-circuit subcommand."""

    def test_qasm_header(self, tmp_path):
        assert main(["gen-circuit", "--n", "2", "--protocol", "1", "--out", str(tmp_path)]) == EXIT_OK
        text = (tmp_path / "protocol1_C1_N2.qasm").read_text()
        assert "OPENQASM 2.0;" in text

    def test_protocol2_rotation(self, tmp_path):
        assert main(["gen-circuit", "--n", "2", "--protocol", "2", "--out", str(tmp_path)]) == EXIT_OK
        assert "cu(pi/2,-pi/2,2*pi/3,pi/6)" in (tmp_path / "protocol2_D1_N2.qasm").read_text()
        assert (tmp_path / "protocol2_D2_N2.qasm").exists()

    def test_measured_qasm(self, tmp_path):
        main(["gen-circuit", "--n", "1", "--measure", "--out", str(tmp_path)])
        assert "measure q[1] -> c[1];" in (tmp_path / "protocol1_C1_N1.qasm").read_text()

    def test_unitary_dump_factors(self, tmp_path):
        assert main(["gen-circuit", "--n", "1", "--format", "unitary-dump", "--out", str(tmp_path)]) == EXIT_OK
        unitary = load_unitary_dump((tmp_path / "protocol1_C1_N1.unitary.txt").read_text())
        assert unitary.shape == (4, 4)
        assert factor_phase_permutation(unitary, build_c1(2).matrix).residual < 1e-10

    def test_unitary_dump_size_limit(self, tmp_path):
        assert main(["gen-circuit", "--n", "10", "--format", "unitary-dump", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_bad_arguments(self):
        assert main(["gen-circuit", "--n", "2", "--protocol", "5"]) == EXIT_USAGE
        assert main(["frobnicate"]) == EXIT_USAGE


class TestSweep:
    """sweep subcommand."""

    def test_writes_reproducible_csv(self, tmp_path):
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = str(tmp_path / name)
            code = main(["sweep", "--protocol", "2", "--n", "1-2", "--lambda", "0,0.01", "--shots", "0,500",
                         "--trials", "3", "--seed", "11", "--out", out])
            assert code == EXIT_OK
            with open(out, "rb") as f:
                outputs.append(f.read())
        assert outputs[0] == outputs[1]
        assert outputs[0].decode().splitlines()[0] == "protocol,N,lambda,shots,trial,fidelity"
        assert os.path.exists(str(tmp_path / "a_aggregate.csv"))

    def test_invalid_lambda(self, tmp_path):
        assert main(["sweep", "--lambda", "2", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE


class TestReconstruct:
    """reconstruct subcommand."""

    def test_protocol1_simulator(self, capsys):
        code = main(["reconstruct", "--protocol", "1", *_counts_args(1, "simulator"),
                     "--target", data_path("uniform_target.json")])
        assert code == EXIT_OK
        fidelity = float(re.search(r"fidelity: (\d\.\d{4})", capsys.readouterr().out).group(1))
        assert abs(fidelity - 0.9998) <= 0.003

    def test_protocol2_ibmqx_flags_second_circuit(self, capsys, tmp_path):
        out = tmp_path / "result.json"
        code = main(["reconstruct", "--protocol", "2", *_counts_args(2, "ibmqx"),
                     "--target", data_path("uniform_target.json"), "--out", str(out)])
        assert code == EXIT_OK
        assert "most discrepant setting: D2" in capsys.readouterr().out
        payload = json.loads(out.read_text())
        assert abs(payload["fidelity"] - 0.8013) <= 0.01

    def test_json_output_round_trip(self, tmp_path):
        out = tmp_path / "p1.json"
        code = main(["reconstruct", "--protocol", "1", *_counts_args(1, "simulator"),
                     "--target", data_path("uniform_target.json"), "--out", str(out)])
        assert code == EXIT_OK
        with open(out) as f:
            payload = json.load(f)
        assert payload["closure"]["pair"] == [3, 0]
        assert payload["untrusted"] == [False] * 4
        assert len(payload["estimate"]["real"]) == 4
        assert abs(payload["fidelity"] - 0.9998) <= 0.003

    def test_missing_setting(self):
        args = _counts_args(1, "simulator")[:-2]
        assert main(["reconstruct", "--protocol", "1", *args]) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        args = _counts_args(1, "simulator")[:-2] + ["--counts", f"C1_phi1={tmp_path / 'absent.json'}"]
        assert main(["reconstruct", "--protocol", "1", *args]) == EXIT_IO

    def test_malformed_counts_argument(self):
        assert main(["reconstruct", "--protocol", "1", "--counts", "Z"]) == EXIT_USAGE


class TestVerify:
    """verify subcommand."""

    def test_passes(self, capsys):
        assert main(["verify", "--max-n", "2"]) == EXIT_OK
        assert "checks passed" in capsys.readouterr().out

    def test_out_of_range(self):
        assert main(["verify", "--max-n", "9"]) == EXIT_USAGE
