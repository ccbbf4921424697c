"""Service catalog and per-service configuration (roll-off, WSS slot, cost)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional

import numpy as np

from . import qot
from .errors import NoFeasibleBandwidth, Unreachable
from .rrc_dsp import BandwidthCriterion, RrcParams, estimate_psd, generate_shaped_signal
from .wss_cascade import CascadeSpec, WssModelParams, minimum_wss_bandwidth

logger = logging.getLogger(__name__)

FEC_OVERHEAD = 0.27
ROLLOFF_GRID = tuple(np.round(np.arange(0.05, 0.601, 0.05), 2))


def gross_throughput(modulation: str, symbol_rate: float):
    """Dual-polarization line rate 2 * R_s * log2(M) in Gb/s."""
    bits = qot.bits_per_symbol(modulation)
    if float(symbol_rate).is_integer():
        return 2 * bits * int(symbol_rate)
    return 2.0 * bits * symbol_rate


def net_throughput(gross: float) -> float:
    """Client rate after the 27% SD-FEC overhead (reporting only)."""
    if gross < 0:
        raise ValueError("gross throughput must be >= 0")
    return gross / (1.0 + FEC_OVERHEAD)


@dataclass(frozen=True)
class ServiceCandidate:
    """One (modulation, symbol rate) catalog entry.

    ``rolloff_table`` maps a WSS-count key (``"6"``) or ``"default"`` to a
    pre-characterized optimum roll-off.
    """

    id: str
    modulation: str
    symbol_rate: float
    rolloff_table: Mapping[str, float] = field(default_factory=dict)
    search_rolloff: bool = False

    def __post_init__(self):
        qot.constellation_size(self.modulation)
        if not self.symbol_rate > 0:
            raise ValueError(f"{self.id}: symbol_rate must be > 0")
        for key, alpha in self.rolloff_table.items():
            if not 0.0 <= alpha <= 1.0:
                raise ValueError(f"{self.id}: roll-off {alpha} for {key!r} outside [0, 1]")
        if not self.rolloff_table and not self.search_rolloff:
            raise ValueError(f"{self.id}: needs a roll-off table or search_rolloff")

    def rolloff_for(self, n_wss: int) -> Optional[float]:
        table = self.rolloff_table
        if str(n_wss) in table:
            return table[str(n_wss)]
        return table.get("default")


@dataclass(frozen=True)
class ConfiguredService:
    candidate: ServiceCandidate
    rolloff_star: float
    wss_bandwidth_star: float
    occupied_bw: float
    throughput_gbps: float
    bin_cost: int

    @property
    def id(self) -> str:
        return self.candidate.id

    @property
    def modulation(self) -> str:
        return self.candidate.modulation

    @property
    def symbol_rate(self) -> float:
        return self.candidate.symbol_rate

    @property
    def rolloff(self) -> float:
        return self.rolloff_star


@dataclass(frozen=True)
class DspSettings:
    samples_per_symbol: int = 8
    num_symbols: int = 32768
    span_symbols: int = 32
    criterion: BandwidthCriterion = BandwidthCriterion()


@dataclass(frozen=True)
class RolloffSearch:
    """Context for picking a roll-off by simulation when no table entry exists."""

    gsnr_db: float
    launch: qot.LaunchPowerModel = qot.LaunchPowerModel()
    isi: qot.IsiModel = qot.DEFAULT_ISI
    symbolrate_ref: float = qot.DEFAULT_REFERENCE_RATE
    grid: tuple = ROLLOFF_GRID


@lru_cache(maxsize=512)
def measure_occupied_bandwidth(symbol_rate: float, rolloff: float, dsp: DspSettings, seed: int) -> float:
    params = RrcParams(symbol_rate, rolloff, dsp.samples_per_symbol, dsp.num_symbols, dsp.span_symbols)
    psd = estimate_psd(generate_shaped_signal(params, seed), params.sampling_rate)
    return dsp.criterion.measure(psd)


def _resolve(candidate, rolloff, n_wss, wss, dsp, seed, ceiling):
    b_occ = measure_occupied_bandwidth(candidate.symbol_rate, rolloff, dsp, seed)
    b_star = minimum_wss_bandwidth(wss, n_wss, b_occ, ceiling)
    return ConfiguredService(
        candidate=candidate,
        rolloff_star=rolloff,
        wss_bandwidth_star=b_star,
        occupied_bw=b_occ,
        throughput_gbps=gross_throughput(candidate.modulation, candidate.symbol_rate),
        bin_cost=math.ceil(b_star / wss.granularity - 1e-9),
    )


def configure_service(
    candidate: ServiceCandidate,
    n_wss: int,
    wss: WssModelParams = WssModelParams(),
    dsp: DspSettings = DspSettings(),
    seed: int = 0,
    search: Optional[RolloffSearch] = None,
    ceiling: float = 500.0,
) -> ConfiguredService:
    """Resolve ``candidate`` into (m, R_s, alpha*, b*) with throughput and bin cost.

    The roll-off comes from the candidate's table; failing that, and when
    the candidate allows it, from the best simulated Q over ``search.grid``
    (each grid point provisioned at its own minimum slot).
    """
    rolloff = candidate.rolloff_for(n_wss)
    if rolloff is not None:
        return _resolve(candidate, rolloff, n_wss, wss, dsp, seed, ceiling)
    if not candidate.search_rolloff or search is None:
        raise ValueError(f"{candidate.id}: no roll-off for {n_wss} WSSs and no search context")

    best, best_q = None, -math.inf
    for alpha in search.grid:
        try:
            service = _resolve(candidate, float(alpha), n_wss, wss, dsp, seed, ceiling)
        except NoFeasibleBandwidth:
            continue
        cascade = CascadeSpec(n_wss, service.wss_bandwidth_star)
        q = qot.simulate_channel_q(service, cascade, wss, search.gsnr_db, 0.0,
                                   search.launch, search.isi, search.symbolrate_ref)
        if q > best_q:
            best, best_q = service, q
    if best is None:
        raise NoFeasibleBandwidth(f"{candidate.id}: no roll-off on the grid fits any slot")
    return best


def catalog_order(service: ConfiguredService):
    return (-service.throughput_gbps, service.bin_cost, service.id)


def enumerate_feasible(
    catalog: Iterable[ServiceCandidate],
    profile: Optional[qot.GsnrProfile],
    targets: qot.QotTargets,
    n_wss: int,
    wss: WssModelParams = WssModelParams(),
    dsp: DspSettings = DspSettings(),
    exclusions: Iterable[str] = (),
    seed: int = 0,
    symbolrate_ref: float = qot.DEFAULT_REFERENCE_RATE,
    launch: qot.LaunchPowerModel = qot.LaunchPowerModel(),
    isi: qot.IsiModel = qot.DEFAULT_ISI,
) -> list:
    """Configure every non-excluded candidate that clears its QoT target at
    the band's worst GSNR. Without a profile every candidate passes."""
    excluded = set(exclusions)
    services = []
    worst_offset = None
    if profile is not None:
        worst_offset = profile.offsets[int(np.argmin(profile.gsnr_db))]
    for candidate in catalog:
        if candidate.id in excluded:
            continue
        if profile is not None:
            try:
                ok = qot.feasible_at(profile, targets, candidate, worst_offset, symbolrate_ref)
            except Unreachable:
                ok = False
            if not ok:
                continue
        search = None
        if profile is not None:
            search = RolloffSearch(profile.minimum, launch, isi, symbolrate_ref)
        try:
            services.append(configure_service(candidate, n_wss, wss, dsp, seed, search))
        except NoFeasibleBandwidth as exc:
            logger.info("dropping %s: %s", candidate.id, exc)
    services.sort(key=catalog_order)
    return services
