"""
Pure-State Tomography - Main Application
Entry point for circuit generation, simulation sweeps, counts reconstruction
and self-verification.
"""

import argparse
import copy
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from core.protocol_manager import ProtocolManager
from core.sweep_runner import SweepConfig, SweepRunner
from core.verification import VerificationSuite
from modules.bases import build_basis
from modules.circuits import (
    build_protocol1_circuit,
    build_protocol2_circuits,
    circuit_unitary,
    dump_unitary,
    outcome_map,
)
from modules.counts_io import load_counts_file
from modules.errors import TomographyError
from modules.qasm import emit_qasm
from modules.reconstruct import ESTIMATORS, parse_target_state
from ui.console_report import ConsoleReport

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def parse_int_list(text: str) -> List[int]:
    """"1-7" or "1,3,5" (ranges may be mixed with single values)."""
    values = []
    for part in str(text).split(','):
        part = part.strip()
        if not part:
            continue
        if '-' in part[1:]:
            low, high = part.split('-', 1)
            values.extend(range(int(low), int(high) + 1))
        else:
            values.append(int(part))
    if not values:
        raise argparse.ArgumentTypeError(f"empty list: '{text}'")
    return values


def parse_float_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in str(text).split(',') if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    if not values:
        raise argparse.ArgumentTypeError(f"empty list: '{text}'")
    return values


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class TomographyApp:
    """
    Main application class that wires configuration, logging and the four
    commands together.
    """

    def __init__(self, config_path: Optional[str] = None):
        """Load environment and configuration, then set up logging."""
        load_dotenv()
        self._config_messages: List[str] = []
        self.config = self._load_config(config_path)

        self._setup_logging()
        self.logger = logging.getLogger(__name__)
        for message in self._config_messages:
            self.logger.info(message)

        self.protocol_manager = ProtocolManager(self.config)
        self.report = ConsoleReport(self.config)

    def _setup_logging(self):
        """Configure logging for the application; records go to stderr."""
        settings = self.config.get('logging', {})
        level_name = os.environ.get('TOMOGRAPHY_LOG_LEVEL', settings.get('level', 'WARNING'))
        level = getattr(logging, str(level_name).upper(), logging.WARNING)

        handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
        if settings.get('file'):
            handlers.append(logging.FileHandler(settings['file']))
        logging.basicConfig(
            level=level,
            format=settings.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s'),
            handlers=handlers,
            force=True,
        )

    def _load_config(self, config_path: Optional[str] = None) -> Dict[str, Any]:
        """Load configuration from config.json, merged over the defaults."""
        config_path = config_path or os.environ.get('TOMOGRAPHY_CONFIG', 'config.json')
        config = self._get_default_config()
        try:
            if os.path.exists(config_path):
                with open(config_path, 'r') as f:
                    config = _deep_merge(config, json.load(f))
                self._config_messages.append(f"Configuration loaded from {config_path}")
            else:
                self._config_messages.append(f"Config file {config_path} not found, using defaults")
        except (OSError, json.JSONDecodeError) as e:
            self._config_messages.append(f"Error loading configuration: {e}; using defaults")

        env_seed = os.environ.get('TOMOGRAPHY_SEED')
        if env_seed:
            try:
                config['simulation']['default_seed'] = int(env_seed)
            except ValueError:
                self._config_messages.append(f"Ignoring non-integer TOMOGRAPHY_SEED={env_seed!r}")
        return config

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration."""
        return {
            "logging": {
                "level": "WARNING",
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                "file": None
            },
            "simulation": {
                "default_seed": 0,
                "max_workers": 4
            },
            "reconstruction": {
                "estimator": "raw",
                "conditioning_floor": 1e-6,
                "strict": False
            },
            "circuits": {
                "increment_variant": "solid",
                "max_unitary_qubits": 10
            },
            "sweep": {
                "protocol": 1,
                "n_qubits": [1, 2, 3],
                "lambdas": [0.0],
                "shots": [0],
                "trials": 100,
                "output": "sweep.csv"
            },
            "verify": {
                "max_n": 3,
                "haar_states": 10
            },
            "report": {
                "precision": 6
            }
        }

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="tomography",
                                         description="Adaptive pure-state tomography with an ancilla qubit")
        commands = parser.add_subparsers(dest="command", required=True)

        gen = commands.add_parser("gen-circuit", help="write protocol circuits as QASM or unitary dumps")
        gen.add_argument("--n", type=int, required=True, help="number of data qubits")
        gen.add_argument("--protocol", type=int, choices=(1, 2), default=1)
        gen.add_argument("--format", choices=("qasm", "unitary-dump"), default="qasm")
        gen.add_argument("--variant", choices=("solid", "hollow"), default=None)
        gen.add_argument("--measure", action="store_true", help="append measurement instructions")
        gen.add_argument("--out", default=".", help="output directory")

        sweep = commands.add_parser("sweep", help="simulate and reconstruct random states over a grid")
        sweep.add_argument("--protocol", type=int, choices=(1, 2), default=None)
        sweep.add_argument("--n", type=parse_int_list, default=None, help='register sizes, e.g. "1-7"')
        sweep.add_argument("--lambda", dest="lambdas", type=parse_float_list, default=None,
                           help='noise scales, e.g. "0,0.01,0.02"')
        sweep.add_argument("--shots", type=parse_int_list, default=None, help="shots per setting, 0 = exact")
        sweep.add_argument("--trials", type=int, default=None)
        sweep.add_argument("--seed", type=int, default=None)
        sweep.add_argument("--workers", type=int, default=None)
        sweep.add_argument("--estimator", choices=ESTIMATORS, default=None)
        sweep.add_argument("--out", default=None, help="per-trial CSV path")

        rec = commands.add_parser("reconstruct", help="reconstruct a state from counts files")
        rec.add_argument("--protocol", type=int, choices=(1, 2), required=True)
        rec.add_argument("--counts", action="append", default=[], metavar="SETTING=PATH",
                         help="counts file for one setting (repeatable)")
        rec.add_argument("--target", default=None, help="target state JSON for a fidelity report")
        rec.add_argument("--estimator", choices=ESTIMATORS, default=None)
        rec.add_argument("--strict", action="store_true", help="fail on undetermined pairs")
        rec.add_argument("--out", default=None, help="write the result as JSON")

        verify = commands.add_parser("verify", help="run the self-check suite")
        verify.add_argument("--max-n", dest="max_n", type=int, default=None)
        return parser

    def cmd_gen_circuit(self, args: argparse.Namespace) -> int:
        variant = args.variant or self.config['circuits'].get('increment_variant', 'solid')
        max_qubits = self.config['circuits'].get('max_unitary_qubits', 10)
        if args.n < 1:
            raise TomographyError(f"--n must be >= 1, got {args.n}")
        if args.format == "unitary-dump" and args.n + 1 > max_qubits:
            raise TomographyError(f"Unitary dumps are limited to {max_qubits - 1} data qubits")

        d = 2 ** args.n
        if args.protocol == 1:
            circuits = [(build_protocol1_circuit(args.n, variant), "C1")]
        else:
            d1_circuit, d2_circuit = build_protocol2_circuits(args.n, variant)
            circuits = [(d1_circuit, "D1"), (d2_circuit, "D2")]

        os.makedirs(args.out, exist_ok=True)
        status = EXIT_OK
        for circuit, basis_name in circuits:
            if circuit.n_qubits <= max_qubits:
                try:
                    found = outcome_map(circuit, build_basis(basis_name, d))
                    self.logger.info(f"{circuit.name} factors against {basis_name} (residual {found.residual:.1e})")
                except TomographyError as e:
                    self.logger.error(f"{circuit.name} failed verification: {e}")
                    status = EXIT_VERIFICATION_FAILED

            if args.format == "qasm":
                path = os.path.join(args.out, f"{circuit.name}.qasm")
                text = emit_qasm(circuit, measure=args.measure)
            else:
                path = os.path.join(args.out, f"{circuit.name}.unitary.txt")
                text = dump_unitary(circuit_unitary(circuit, max_qubits))
            with open(path, 'w') as f:
                f.write(text)
            print(path)
        return status

    def cmd_sweep(self, args: argparse.Namespace) -> int:
        sweep = SweepConfig.from_config(
            self.config,
            protocol=args.protocol,
            n_qubits_list=tuple(args.n) if args.n else None,
            lambda_list=tuple(args.lambdas) if args.lambdas else None,
            shots_list=tuple(args.shots) if args.shots else None,
            trials=args.trials,
            seed=args.seed,
            max_workers=args.workers,
            estimator=args.estimator,
            output=args.out,
        )
        result = SweepRunner(self.config, self.protocol_manager).run(sweep)
        print(self.report.sweep(result.aggregates, result.output))
        return EXIT_OK

    def _parse_counts_args(self, entries: Sequence[str]) -> Dict[str, str]:
        paths = {}
        for entry in entries:
            if '=' not in entry:
                raise TomographyError(f"--counts expects SETTING=PATH, got '{entry}'")
            label, path = entry.split('=', 1)
            paths[label.strip()] = path.strip()
        return paths

    def cmd_reconstruct(self, args: argparse.Namespace) -> int:
        counts_by_label = {}
        for label, path in self._parse_counts_args(args.counts).items():
            counts = load_counts_file(path)
            counts_by_label[label] = counts if counts.setting_label == label else counts.with_label(label)
            self.logger.info(f"Loaded {label} counts from {path} ({counts.shots} shots)")

        result = self.protocol_manager.reconstruct(args.protocol, counts_by_label, estimator=args.estimator,
                                                   strict=True if args.strict else None)
        target = None
        if args.target:
            with open(args.target, 'r') as f:
                target = parse_target_state(f.read())

        print(self.report.reconstruction(result, target))
        if args.out:
            text = json.dumps(result.to_dict(target), indent=2)
            with open(args.out, 'w') as f:
                f.write(text)
        return EXIT_OK

    def cmd_verify(self, args: argparse.Namespace) -> int:
        max_n = args.max_n or self.config['verify'].get('max_n', 3)
        checks = VerificationSuite(self.config).run(max_n)
        print(self.report.verification(checks))
        return EXIT_OK if all(check.passed for check in checks) else EXIT_VERIFICATION_FAILED

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """Parse arguments, dispatch, and map failures to exit codes."""
        parser = self.build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_USAGE

        handlers = {
            "gen-circuit": self.cmd_gen_circuit,
            "sweep": self.cmd_sweep,
            "reconstruct": self.cmd_reconstruct,
            "verify": self.cmd_verify,
        }
        try:
            self.logger.info(f"Running {args.command}")
            status = handlers[args.command](args)
            self.logger.info(f"{args.command} finished with exit code {status}")
            return status
        except TomographyError as e:
            self.logger.error(f"{args.command} failed: {e}")
            return EXIT_USAGE
        except OSError as e:
            self.logger.error(f"{args.command} I/O error: {e}")
            return EXIT_IO


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the application."""
    app = TomographyApp()
    return app.run(argv)


if __name__ == "__main__":
    sys.exit(main())
