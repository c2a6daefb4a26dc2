"""Shared fixtures: the published IBMQ count tables and the uniform target."""

import os

import pytest

from modules.counts_io import load_counts_file
from modules.reconstruct import parse_target_state

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "ibmq")

SETTING_FILES = {
    (1, "simulator"): {"Z": "z_simulator.json", "C1_phi0": "protocol1_simulator_phi0.json",
                       "C1_phi1": "protocol1_simulator_phi1.json"},
    (1, "ibmqx"): {"Z": "z_ibmqx.json", "C1_phi0": "protocol1_ibmqx_phi0.json",
                   "C1_phi1": "protocol1_ibmqx_phi1.json"},
    (2, "simulator"): {"Z": "z_simulator.json", "D1": "protocol2_simulator_d1.json",
                       "D2": "protocol2_simulator_d2.json"},
    (2, "ibmqx"): {"Z": "z_ibmqx.json", "D1": "protocol2_ibmqx_d1.json",
                   "D2": "protocol2_ibmqx_d2.json"},
}


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


@pytest.fixture
def ibmq_counts():
    """Loader returning {setting label: Counts} for (protocol, backend)."""
    def load(protocol: int, backend: str):
        return {label: load_counts_file(data_path(name))
                for label, name in SETTING_FILES[(protocol, backend)].items()}
    return load


@pytest.fixture
def uniform_target():
    with open(data_path("uniform_target.json")) as f:
        return parse_target_state(f.read())


@pytest.fixture
def base_config():
    return {
        "simulation": {"default_seed": 0, "max_workers": 2},
        "reconstruction": {"estimator": "raw", "conditioning_floor": 1e-6, "strict": False},
        "circuits": {"increment_variant": "solid", "max_unitary_qubits": 10},
        "verify": {"max_n": 3, "haar_states": 3},
        "report": {"precision": 6},
    }
