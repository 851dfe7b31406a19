"""Dropout-tolerant single-server secure summation."""

from edgeagg.secsum.client import ClientRoundState, Phase, ProtocolViolation
from edgeagg.secsum.config import PRESET_DEGREES, SCALE_DEGREES, RoundConfig, round_id_from
from edgeagg.secsum.graph import NeighborGraph, build_neighbor_graph
from edgeagg.secsum.server import (
    DropPoint,
    RoundFailure,
    RoundReport,
    ServerLedger,
    random_dropout_schedule,
    server_recover_and_unmask,
    server_run_round,
)

__all__ = [
    "ClientRoundState",
    "DropPoint",
    "NeighborGraph",
    "PRESET_DEGREES",
    "Phase",
    "ProtocolViolation",
    "RoundConfig",
    "RoundFailure",
    "RoundReport",
    "ServerLedger",
    "SCALE_DEGREES",
    "build_neighbor_graph",
    "random_dropout_schedule",
    "round_id_from",
    "server_recover_and_unmask",
    "server_run_round",
]
