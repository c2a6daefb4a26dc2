"""
Protocols package.

get_protocol returns shared default instances; configured instances are
created by core.protocol_manager.ProtocolManager.
"""

import threading
from typing import Dict, Tuple

from modules.errors import ReconstructionError
from .base_protocol import BaseProtocol, MeasurementSetting
from .conditional_shift_protocol import ConditionalShiftProtocol
from .global_shift_protocol import GlobalShiftProtocol

PROTOCOL_CLASSES = {
    1: ConditionalShiftProtocol,
    2: GlobalShiftProtocol,
}

_instances: Dict[Tuple[int, str], BaseProtocol] = {}
_instances_lock = threading.Lock()


def get_protocol(protocol_id: int, variant: str = "solid") -> BaseProtocol:
    """Shared protocol instance for an id and increment variant."""
    if protocol_id not in PROTOCOL_CLASSES:
        raise ReconstructionError(f"Unknown protocol {protocol_id}, expected one of {sorted(PROTOCOL_CLASSES)}")
    key = (protocol_id, variant)
    with _instances_lock:
        if key not in _instances:
            config = {"circuits": {"increment_variant": variant}}
            _instances[key] = PROTOCOL_CLASSES[protocol_id](config)
        return _instances[key]


__all__ = [
    "BaseProtocol",
    "MeasurementSetting",
    "ConditionalShiftProtocol",
    "GlobalShiftProtocol",
    "PROTOCOL_CLASSES",
    "get_protocol",
]
