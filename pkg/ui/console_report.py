"""
Console Report Module
Plain-text rendering of reconstruction, verification and sweep results.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

from modules.reconstruct import ReconstructionResult
from modules.statevector import PureState


class ConsoleReport:
    """
    Formats results for standard output. Fidelities are printed with four
    decimals; other quantities with the configured precision.
    """

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.precision = config.get('report', {}).get('precision', 6)

    def _num(self, value: float) -> str:
        return f"{value:.{self.precision}f}"

    def reconstruction(self, result: ReconstructionResult, target: Optional[PureState] = None) -> str:
        lines = [f"Protocol {result.protocol} reconstruction (d={result.d}, estimator={result.estimator})"]

        lines.append("  k   amplitude        phase")
        for k, (a, theta) in enumerate(zip(result.amplitudes, result.phases)):
            marker = "  untrusted" if result.untrusted and result.untrusted[k] else ""
            lines.append(f"  {k:<3d} {self._num(a):>12} {self._num(theta):>12}{marker}")

        lines.append("  pair      setting     cos_raw      sin_raw        delta  defect  flags")
        for estimate in result.pair_diagnostics:
            flags = []
            if estimate.clamped:
                flags.append("clamped")
            if estimate.undetermined:
                flags.append("undetermined")
            pair = f"({estimate.pair[0]},{estimate.pair[1]})"
            lines.append(f"  {pair:<9} {estimate.setting:<9} {self._num(estimate.cos_raw):>12} "
                         f"{self._num(estimate.sin_raw):>12} {self._num(estimate.delta):>12} "
                         f"{estimate.norm_defect:7.4f}  {' '.join(flags)}")

        lines.append(f"  wrap residual: {self._num(result.wrap_residual)}")
        discrepant = result.most_discrepant_setting()
        if discrepant:
            lines.append(f"  most discrepant setting: {discrepant}")
        if target is not None:
            lines.append(f"  fidelity: {result.fidelity_to(target):.4f}")
        return "\n".join(lines)

    def verification(self, checks: Sequence[Any]) -> str:
        lines = ["Verification report"]
        for check in checks:
            status = "PASS" if check.passed else "FAIL"
            lines.append(f"  [{status}] {check.name:<26} {check.seconds:8.3f}s  {check.detail}")
        failed = sum(1 for check in checks if not check.passed)
        lines.append(f"  {len(checks) - failed}/{len(checks)} checks passed")
        return "\n".join(lines)

    def sweep(self, aggregates: List[Dict[str, Any]], output: Optional[str] = None) -> str:
        lines = ["protocol  N  lambda    shots      trials  mean_fidelity  std"]
        for cell in aggregates:
            shots = "exact" if cell["shots"] == 0 else str(cell["shots"])
            lines.append(f"{cell['protocol']:<9} {cell['N']:<2} {cell['lambda']:<9g} {shots:<10} "
                         f"{cell['trials']:<7} {cell['mean_fidelity']:.6f}       {cell['std_fidelity']:.6f}")
        if output:
            lines.append(f"rows written to {output}")
        return "\n".join(lines)
