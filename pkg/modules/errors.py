"""
Errors Module
Exception hierarchy shared by every tomography component.
"""


class TomographyError(ValueError):
    """Base class for all errors raised by the tomography library."""


class StateError(TomographyError):
    """Invalid state vector (zero, wrong length, not normalized)."""


class GateError(TomographyError):
    """Invalid gate matrix or gate placement."""


class BasisError(TomographyError):
    """Invalid measurement basis request or basis/state mismatch."""


class CircuitError(TomographyError):
    """Circuit construction, extraction or emission failure."""


class CountsError(TomographyError):
    """Malformed or inconsistent measurement counts."""


class ReconstructionError(TomographyError):
    """Reconstruction could not be carried out on the given data."""
