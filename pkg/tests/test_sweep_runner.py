"""Tests for simulation sweeps and their CSV output."""

import csv

import numpy as np
import pytest

from core.sweep_runner import (
    AGGREGATE_FIELDS,
    ROW_FIELDS,
    SweepConfig,
    SweepRow,
    SweepRunner,
    aggregate_rows,
)
from modules.errors import TomographyError


def _read_csv(path):
    with open(path, newline='') as f:
        return list(csv.reader(f))


def _means(result):
    return {(cell["N"], cell["lambda"], cell["shots"]): cell["mean_fidelity"] for cell in result.aggregates}


class TestSweepConfig:
    """Validation and configuration merging."""

    @pytest.mark.parametrize("overrides", [
        {"protocol": 3},
        {"trials": 0},
        {"lambda_list": (0.0, 1.5)},
        {"n_qubits_list": (0,)},
        {"shots_list": (-1,)},
        {"max_workers": 0},
    ])
    def test_rejects_invalid(self, overrides):
        with pytest.raises(TomographyError):
            SweepConfig(**overrides)

    def test_from_config_overrides_win(self):
        config = {"sweep": {"protocol": 2, "trials": 7, "n_qubits": [1, 2]}, "simulation": {"default_seed": 5}}
        sweep = SweepConfig.from_config(config, trials=3, seed=None)
        assert sweep.protocol == 2
        assert sweep.trials == 3
        assert sweep.seed == 5
        assert sweep.n_qubits_list == (1, 2)

    def test_aggregate_path(self):
        assert SweepConfig(output="out/run.csv").aggregate_output == "out/run_aggregate.csv"


class TestSweepRunner:
    """Whole sweeps."""

    def test_exact_noiseless_protocol1(self, base_config, tmp_path):
        sweep = SweepConfig(protocol=1, n_qubits_list=tuple(range(1, 8)), trials=100,
                            output=str(tmp_path / "p1.csv"))
        result = SweepRunner(base_config).run(sweep)
        assert len(result.rows) == 700
        assert all(row.fidelity >= 1 - 1e-9 for row in result.rows)
        for cell in result.aggregates:
            assert round(cell["mean_fidelity"], 9) == 1.0

    def test_csv_schema(self, base_config, tmp_path):
        sweep = SweepConfig(protocol=2, n_qubits_list=(1, 2), lambda_list=(0.0, 0.01), trials=3,
                            output=str(tmp_path / "p2.csv"))
        SweepRunner(base_config).run(sweep)
        rows = _read_csv(sweep.output)
        assert tuple(rows[0]) == ROW_FIELDS
        assert len(rows) == 1 + 2 * 2 * 3
        aggregate = _read_csv(sweep.aggregate_output)
        assert tuple(aggregate[0]) == AGGREGATE_FIELDS
        assert len(aggregate) == 1 + 4

    def test_same_seed_same_bytes(self, base_config, tmp_path):
        outputs = []
        for workers, name in ((1, "a.csv"), (4, "b.csv")):
            sweep = SweepConfig(protocol=2, n_qubits_list=(2, 3), lambda_list=(0.01,), shots_list=(1000,),
                                trials=5, seed=17, max_workers=workers, output=str(tmp_path / name))
            SweepRunner(base_config).run(sweep)
            with open(sweep.output, 'rb') as f:
                outputs.append(f.read())
        assert outputs[0] == outputs[1]

    @pytest.mark.parametrize("protocol", [1, 2])
    def test_noise_trend(self, base_config, protocol):
        sweep = SweepConfig(protocol=protocol, n_qubits_list=tuple(range(1, 8)), lambda_list=(0.0, 0.01, 0.02),
                            trials=100)
        means = _means(SweepRunner(base_config).run(sweep, write=False))
        for n in range(1, 8):
            assert means[(n, 0.0, 0)] == pytest.approx(1.0, abs=1e-9)
            assert means[(n, 0.0, 0)] >= means[(n, 0.01, 0)] >= means[(n, 0.02, 0)]

    @pytest.mark.slow
    @pytest.mark.parametrize("protocol", [1, 2])
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_shot_convergence(self, base_config, protocol, n):
        lam = 0.005
        sweep = SweepConfig(protocol=protocol, n_qubits_list=(n,), lambda_list=(lam,), shots_list=(100, 10 ** 6),
                            trials=100, seed=3)
        means = _means(SweepRunner(base_config).run(sweep, write=False))
        high = means[(n, lam, 10 ** 6)]
        assert abs(high - (1 - lam / 2 ** n)) < 0.005
        assert high > means[(n, lam, 100)]

    def test_state_shared_across_noise_levels(self, base_config):
        runner = SweepRunner(base_config)
        sweep = SweepConfig(lambda_list=(0.0, 0.5))
        low = runner.run_cell(sweep, 2, 0, 0, 4)
        high = runner.run_cell(sweep, 2, 1, 0, 4)
        assert low.fidelity == pytest.approx(1.0)
        assert high.fidelity < low.fidelity


class TestAggregation:
    """Per-cell statistics."""

    def test_mean_and_std(self):
        rows = [SweepRow(1, 2, 0.0, 0, t, f) for t, f in enumerate([0.9, 1.0])]
        (cell,) = aggregate_rows(rows)
        assert cell["trials"] == 2
        assert cell["mean_fidelity"] == pytest.approx(0.95)
        assert cell["std_fidelity"] == pytest.approx(np.std([0.9, 1.0]))
