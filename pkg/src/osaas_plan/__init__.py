"""Spectrum planning for leased optical bands: pulse shaping, WSS filtering,
QoT screening and transceiver-bounded knapsack packing."""
from .catalog import ServiceCandidate, configure_service, gross_throughput, net_throughput
from .formats import load_scenario
from .knapsack import KERNEL, KnapsackInstance, KnapsackItem, solve_knapsack, throughput_vs_trx
from .planner import plan_with_fallback
from .qot import GsnrProfile, QotTargets, required_snr_db

__version__ = "0.1.0"

__all__ = [
    "KERNEL", "GsnrProfile", "KnapsackInstance", "KnapsackItem", "QotTargets", "ServiceCandidate",
    "configure_service", "gross_throughput", "load_scenario", "net_throughput", "plan_with_fallback",
    "required_snr_db", "solve_knapsack", "throughput_vs_trx",
]
