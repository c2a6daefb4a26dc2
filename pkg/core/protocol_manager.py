"""
Protocol Manager Module
Manages the tomography protocols and routes counts to the right reconstruction.
"""

import logging
from typing import Any, Dict, Optional

from modules.counts_io import Counts
from modules.errors import ReconstructionError
from modules.protocols import BaseProtocol, ConditionalShiftProtocol, GlobalShiftProtocol
from modules.reconstruct import ReconstructionResult


class ProtocolManager:
    """
    Holds one configured instance per protocol id.
    """

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.logger = logging.getLogger(__name__)

        self.protocols: Dict[int, BaseProtocol] = {
            1: ConditionalShiftProtocol(config),
            2: GlobalShiftProtocol(config),
        }

        self.logger.info(f"Initialized ProtocolManager with {len(self.protocols)} protocols")

    def get_protocol(self, protocol_id: int) -> BaseProtocol:
        """
        Look up a protocol by id.

        Raises:
            ReconstructionError: for an unknown id
        """
        protocol = self.protocols.get(protocol_id)
        if protocol is None:
            self.logger.warning(f"No protocol registered for id: {protocol_id}")
            raise ReconstructionError(f"Unknown protocol {protocol_id}, available: {sorted(self.protocols)}")
        return protocol

    def reconstruct(self, protocol_id: int, counts_by_label: Dict[str, Counts],
                    estimator: Optional[str] = None, strict: Optional[bool] = None) -> ReconstructionResult:
        """
        Reconstruct a state with the given protocol.

        Args:
            protocol_id: 1 or 2
            counts_by_label: Counts keyed by setting label
            estimator: Optional estimator override
            strict: Optional strict-mode override

        Returns:
            ReconstructionResult from the protocol
        """
        protocol = self.get_protocol(protocol_id)
        self.logger.info(f"Reconstructing with protocol {protocol_id} from settings {sorted(counts_by_label)}")
        return protocol.reconstruct(counts_by_label, estimator=estimator, strict=strict)

    def get_available_protocols(self) -> Dict[int, str]:
        """
        Get the registered protocols and their descriptions.

        Returns:
            Dictionary mapping protocol ids to descriptions
        """
        return {protocol_id: protocol.description for protocol_id, protocol in sorted(self.protocols.items())}

    def add_protocol(self, protocol_id: int, protocol: BaseProtocol):
        """
        Register a protocol under an id, replacing any previous one.

        Args:
            protocol_id: Id to map to this protocol
            protocol: The protocol instance
        """
        self.protocols[protocol_id] = protocol
        self.logger.info(f"Added protocol {protocol.__class__.__name__} as id {protocol_id}")

    def remove_protocol(self, protocol_id: int):
        if protocol_id in self.protocols:
            del self.protocols[protocol_id]
            self.logger.info(f"Removed protocol id: {protocol_id}")
        else:
            self.logger.warning(f"Attempted to remove non-existent protocol: {protocol_id}")
