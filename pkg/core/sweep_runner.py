"""
Sweep Runner Core Module
Runs protocol simulations over grids of register sizes, noise scales and
shot budgets, and writes per-trial and aggregate fidelity tables.
"""

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.random import SeedSequence

from core.protocol_manager import ProtocolManager
from modules.counts_io import EXACT_SHOTS
from modules.errors import TomographyError
from modules.sampling import NoisyPreparation, run_protocol
from modules.statevector import MAX_HAAR_QUBITS, haar_random_state

ROW_FIELDS = ("protocol", "N", "lambda", "shots", "trial", "fidelity")
AGGREGATE_FIELDS = ("protocol", "N", "lambda", "shots", "trials", "mean_fidelity", "std_fidelity")


@dataclass(frozen=True)
class SweepConfig:
    protocol: int = 1
    n_qubits_list: Tuple[int, ...] = (1, 2, 3)
    lambda_list: Tuple[float, ...] = (0.0,)
    shots_list: Tuple[int, ...] = (EXACT_SHOTS,)
    trials: int = 100
    seed: int = 0
    output: str = "sweep.csv"
    max_workers: int = 4
    estimator: str = "raw"

    def __post_init__(self):
        for name in ("n_qubits_list", "lambda_list", "shots_list"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.protocol not in (1, 2):
            raise TomographyError(f"Protocol must be 1 or 2, got {self.protocol}")
        if self.trials < 1:
            raise TomographyError(f"Trials must be >= 1, got {self.trials}")
        if not self.n_qubits_list or any(not 1 <= n <= MAX_HAAR_QUBITS for n in self.n_qubits_list):
            raise TomographyError(f"Register sizes must lie in 1..{MAX_HAAR_QUBITS}: {self.n_qubits_list}")
        if not self.lambda_list or any(not 0.0 <= lam <= 1.0 for lam in self.lambda_list):
            raise TomographyError(f"Noise scales must lie in [0, 1]: {self.lambda_list}")
        if not self.shots_list or any(shots < 0 for shots in self.shots_list):
            raise TomographyError(f"Shot counts must be >= 0 (0 = exact): {self.shots_list}")
        if self.max_workers < 1:
            raise TomographyError(f"Worker count must be >= 1, got {self.max_workers}")

    @property
    def aggregate_output(self) -> str:
        stem, ext = os.path.splitext(self.output)
        return f"{stem}_aggregate{ext or '.csv'}"

    @classmethod
    def from_config(cls, config: Dict[str, Any], **overrides) -> 'SweepConfig':
        """Build from the `sweep` and `simulation` sections; non-None overrides win."""
        sweep = config.get('sweep', {})
        simulation = config.get('simulation', {})
        values = {
            "protocol": sweep.get('protocol', 1),
            "n_qubits_list": tuple(sweep.get('n_qubits', (1, 2, 3))),
            "lambda_list": tuple(sweep.get('lambdas', (0.0,))),
            "shots_list": tuple(sweep.get('shots', (EXACT_SHOTS,))),
            "trials": sweep.get('trials', 100),
            "seed": simulation.get('default_seed', 0),
            "output": sweep.get('output', 'sweep.csv'),
            "max_workers": simulation.get('max_workers', 4),
            "estimator": config.get('reconstruction', {}).get('estimator', 'raw'),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True, order=True)
class SweepRow:
    protocol: int
    n_qubits: int
    lam: float
    shots: int
    trial: int
    fidelity: float = field(compare=False)


@dataclass
class SweepResult:
    rows: List[SweepRow]
    aggregates: List[Dict[str, Any]]
    output: Optional[str] = None
    aggregate_output: Optional[str] = None


def _derived_seed(*entropy: int) -> int:
    return int(SeedSequence([int(e) for e in entropy]).generate_state(1)[0])


class SweepRunner:
    """
    Executes every (N, lambda, shots, trial) cell of a sweep on a thread pool.

    Trial t of register size N always uses the same Haar state, whatever the
    noise scale or shot budget, and every cell samples from its own seeded
    stream, so output does not depend on scheduling.
    """

    def __init__(self, config: Dict[str, Any], protocol_manager: Optional[ProtocolManager] = None):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.protocol_manager = protocol_manager or ProtocolManager(config)

    def state_seed(self, sweep: SweepConfig, n_qubits: int, trial: int) -> int:
        return _derived_seed(sweep.seed, n_qubits, trial)

    def run_cell(self, sweep: SweepConfig, n_qubits: int, lam_index: int, shots_index: int, trial: int) -> SweepRow:
        """Simulate and reconstruct one trial; returns its fidelity row."""
        lam = sweep.lambda_list[lam_index]
        shots = sweep.shots_list[shots_index]
        target = haar_random_state(n_qubits, seed=self.state_seed(sweep, n_qubits, trial))

        sample_seed = _derived_seed(sweep.seed, n_qubits, lam_index, shots_index)
        z_counts, phase_counts = run_protocol(NoisyPreparation(target, lam), sweep.protocol, shots,
                                              seed=sample_seed, trial=trial)
        counts_by_label = {"Z": z_counts}
        counts_by_label.update({counts.setting_label: counts for counts in phase_counts})

        result = self.protocol_manager.reconstruct(sweep.protocol, counts_by_label, estimator=sweep.estimator)
        fidelity = result.fidelity_to(target)
        return SweepRow(sweep.protocol, n_qubits, lam, shots, trial, fidelity)

    def run(self, sweep: SweepConfig, write: bool = True) -> SweepResult:
        """
        Run the whole grid.

        Args:
            sweep: Grid and output description
            write: Write the per-trial and aggregate CSV files

        Returns:
            SweepResult with rows sorted by (protocol, N, lambda, shots, trial)
        """
        cells = [
            (n, li, si, trial)
            for n in sweep.n_qubits_list
            for li in range(len(sweep.lambda_list))
            for si in range(len(sweep.shots_list))
            for trial in range(sweep.trials)
        ]
        self.logger.info(f"Starting protocol {sweep.protocol} sweep: {len(cells)} cells on {sweep.max_workers} workers")
        rows: List[SweepRow] = []
        with ThreadPoolExecutor(max_workers=sweep.max_workers) as executor:
            futures = {executor.submit(self.run_cell, sweep, *cell): cell for cell in cells}
            for future in as_completed(futures):
                try:
                    rows.append(future.result())
                except Exception as e:
                    n, li, si, trial = futures[future]
                    self.logger.error(f"Sweep cell N={n}, lambda={sweep.lambda_list[li]}, "
                                      f"shots={sweep.shots_list[si]}, trial={trial} failed: {e}")
                    raise

        rows.sort()
        aggregates = aggregate_rows(rows)
        for cell in aggregates:
            self.logger.info(f"N={cell['N']} lambda={cell['lambda']} shots={cell['shots']}: "
                             f"mean fidelity {cell['mean_fidelity']:.6f} over {cell['trials']} trials")

        result = SweepResult(rows, aggregates)
        if write:
            write_rows_csv(rows, sweep.output)
            write_aggregate_csv(aggregates, sweep.aggregate_output)
            result.output, result.aggregate_output = sweep.output, sweep.aggregate_output
            self.logger.info(f"Sweep written to {sweep.output} and {sweep.aggregate_output}")
        return result


def aggregate_rows(rows: Sequence[SweepRow]) -> List[Dict[str, Any]]:
    """Mean and population standard deviation of fidelity per grid cell."""
    grouped: Dict[Tuple[int, int, float, int], List[float]] = {}
    for row in rows:
        grouped.setdefault((row.protocol, row.n_qubits, row.lam, row.shots), []).append(row.fidelity)
    return [
        {
            "protocol": key[0], "N": key[1], "lambda": key[2], "shots": key[3],
            "trials": len(values),
            "mean_fidelity": float(np.mean(values)),
            "std_fidelity": float(np.std(values)),
        }
        for key, values in sorted(grouped.items())
    ]


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_rows_csv(rows: Sequence[SweepRow], path: str):
    _ensure_parent(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(ROW_FIELDS)
        for row in rows:
            writer.writerow([row.protocol, row.n_qubits, repr(float(row.lam)), row.shots, row.trial,
                             f"{row.fidelity:.12f}"])


def write_aggregate_csv(aggregates: Sequence[Dict[str, Any]], path: str):
    _ensure_parent(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(AGGREGATE_FIELDS)
        for cell in aggregates:
            writer.writerow([cell["protocol"], cell["N"], repr(float(cell["lambda"])), cell["shots"], cell["trials"],
                             f"{cell['mean_fidelity']:.12f}", f"{cell['std_fidelity']:.12f}"])
