"""Knapsack packing, channel placement, booster sweep and the QoT fallback loop."""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import qot
from .catalog import ROLLOFF_GRID, catalog_order, enumerate_feasible
from .errors import CapacityExceeded, MissingProfile, UnknownService
from .knapsack import KnapsackInstance, KnapsackItem, solve_knapsack
from .wss_cascade import CascadeSpec

logger = logging.getLogger(__name__)

FEASIBLE = "feasible"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Placement:
    service: object
    start_bin: int
    end_bin: int  # exclusive

    @property
    def width(self) -> int:
        return self.end_bin - self.start_bin

    def center_offset(self, granularity: float) -> float:
        return 0.5 * (self.start_bin + self.end_bin) * granularity


def selection_label(services) -> str:
    """Compact label such as ``4x64QAM-42G`` (``+`` joins mixed groups)."""
    if not services:
        return "none"
    counts = Counter(s.id for s in services)
    order = []
    for s in services:
        if s.id not in order:
            order.append(s.id)
    return "+".join(f"{counts[i]}x{i}" for i in order)


@dataclass(frozen=True)
class SpectrumPlan:
    capacity_bins: int
    selections: tuple = ()
    placements: tuple = ()

    @property
    def total_gross_gbps(self) -> float:
        return sum(s.throughput_gbps for s in self.selections)

    @property
    def bins_used(self) -> int:
        return sum(s.bin_cost for s in self.selections)

    @property
    def trx_used(self) -> int:
        return len(self.selections)

    @property
    def label(self) -> str:
        return selection_label(self.selections)


def place_channels(services, capacity_bins: int) -> SpectrumPlan:
    """Left-pack ``services`` (catalog order) into contiguous bin ranges."""
    ordered = sorted(services, key=catalog_order)
    need = sum(s.bin_cost for s in ordered)
    if need > capacity_bins:
        raise CapacityExceeded(f"selection needs {need} bins, band has {capacity_bins}")
    placements, start = [], 0
    for s in ordered:
        placements.append(Placement(s, start, start + s.bin_cost))
        start += s.bin_cost
    return SpectrumPlan(capacity_bins, tuple(ordered), tuple(placements))


def knapsack_instance(services, capacity_bins, n_trx, copies_per_item=None) -> KnapsackInstance:
    items = tuple(KnapsackItem(s.id, s.throughput_gbps, s.bin_cost) for s in services)
    return KnapsackInstance(items, capacity_bins, n_trx, copies_per_item)


def expand_selection(selection, services) -> list:
    by_id = {s.id: s for s in services}
    out = []
    for sid, n in selection.counts:
        out.extend([by_id[sid]] * n)
    return out


def _channel_q(placement, p_db, scenario) -> Optional[float]:
    service = placement.service
    curves = scenario.measured.power_curves if scenario.measured else {}
    if service.id in curves:
        curve = curves[service.id]
        return float(np.interp(p_db, curve.relative_power_db, curve.q_db))
    if scenario.profile is None:
        return None
    gsnr = qot.gsnr_at(scenario.profile, placement.center_offset(scenario.granularity_ghz))
    cascade = CascadeSpec(scenario.n_wss, service.wss_bandwidth_star)
    return qot.simulate_channel_q(service, cascade, scenario.wss, gsnr, p_db, scenario.launch,
                                  scenario.isi, scenario.reference_rate_gbd)


def sweep_launch_power(plan: SpectrumPlan, scenario):
    """Shared booster setting maximizing mean channel Q over the sweep grid.

    Returns ``(relative_power_db, {channel index: Q dB})``; channels with no
    power curve and no GSNR profile are left out of the mean.
    """
    grid = scenario.launch.grid()
    best_p, best_mean, best_q = 0.0, -np.inf, {}
    for p in grid:
        per_channel = {}
        for i, placement in enumerate(plan.placements):
            q = _channel_q(placement, float(p), scenario)
            if q is not None:
                per_channel[i] = q
        if not per_channel:
            return 0.0, {}
        mean = float(np.mean(list(per_channel.values())))
        if mean > best_mean:
            best_p, best_mean, best_q = float(p), mean, per_channel
    return best_p, best_q


@dataclass
class IterationRecord:
    iteration: int
    excluded_before: list
    feasible_ids: list
    label: str
    total_gross_gbps: float
    bins_used: int
    trx_used: int
    launch_power_db: Optional[float] = None
    report: Optional[qot.QotReport] = None
    newly_excluded: list = field(default_factory=list)


@dataclass
class PlanOutcome:
    plan: SpectrumPlan
    report: qot.QotReport
    log: list
    status: str
    launch_power_db: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _q_values(plan, sim_q, scenario):
    """Measured Q overrides simulation; simulated Q is the worst channel."""
    measured = scenario.measured.q_db if scenario.measured else {}
    values: dict = {}
    sources: dict = {}
    for i, placement in enumerate(plan.placements):
        sid = placement.service.id
        if sid in measured:
            values[sid] = float(measured[sid])
            sources[sid] = qot.MEASURED
        elif i in sim_q:
            values[sid] = min(values.get(sid, np.inf), sim_q[i])
            sources[sid] = qot.SIMULATED
    return values, sources


def plan_with_fallback(scenario, single_exclusion: bool = False) -> PlanOutcome:
    """Plan, check QoT and re-plan without failing services until feasible.

    Each failed iteration excludes every failing service (or only the worst
    one with ``single_exclusion``), so the loop ends within |catalog| + 1
    iterations.
    """
    excluded: list = []
    log: list = []
    empty = SpectrumPlan(scenario.capacity_bins)
    for iteration in range(1, len(scenario.catalog) + 2):
        services = enumerate_feasible(
            scenario.catalog, scenario.profile, scenario.targets, scenario.n_wss,
            scenario.wss, scenario.dsp, excluded, scenario.seed,
            scenario.reference_rate_gbd, scenario.launch, scenario.isi,
        )
        record = IterationRecord(iteration, list(excluded), [s.id for s in services], "none", 0.0, 0, 0)
        log.append(record)
        if not services:
            return PlanOutcome(empty, qot.QotReport(), log, EXHAUSTED)

        instance = knapsack_instance(services, scenario.capacity_bins, scenario.n_trx,
                                     scenario.copies_per_item)
        _, best = solve_knapsack(instance)
        plan = place_channels(expand_selection(best, services), scenario.capacity_bins)
        record.label = plan.label
        record.total_gross_gbps = plan.total_gross_gbps
        record.bins_used, record.trx_used = plan.bins_used, plan.trx_used
        if not plan.placements:
            return PlanOutcome(empty, qot.QotReport(), log, EXHAUSTED)

        power, sim_q = sweep_launch_power(plan, scenario)
        values, sources = _q_values(plan, sim_q, scenario)
        report = qot.check_report(plan, values, scenario.targets, sources)
        record.launch_power_db, record.report = power, report
        logger.info("iteration %d: %s %.1f Gb/s feasible=%s", iteration, plan.label,
                    plan.total_gross_gbps, report.feasible)
        if report.feasible:
            return PlanOutcome(plan, report, log, FEASIBLE, power)
        failing = [report.worst_failing_id()] if single_exclusion else report.failing_ids()
        record.newly_excluded = failing
        excluded.extend(failing)
    return PlanOutcome(empty, qot.QotReport(), log, EXHAUSTED)  # pragma: no cover


@dataclass(frozen=True)
class _GridPoint:
    modulation: str
    symbol_rate: float
    rolloff: float


@dataclass(frozen=True)
class ContourGrid:
    service_id: str
    wss_bandwidth_ghz: float
    rolloffs: np.ndarray
    powers_db: np.ndarray
    mean_q_db: np.ndarray  # shape (len(rolloffs), len(powers_db))

    @property
    def argmax(self):
        i, j = np.unravel_index(int(np.argmax(self.mean_q_db)), self.mean_q_db.shape)
        return float(self.rolloffs[i]), float(self.powers_db[j]), float(self.mean_q_db[i, j])


def contour_grid(scenario, service_id: str, wss_bandwidth_ghz: Optional[float] = None,
                 rolloffs=ROLLOFF_GRID) -> ContourGrid:
    """Mean simulated Q over a roll-off x launch-power grid for one service.

    The service fills up to N_TRx slots of ``wss_bandwidth_ghz`` (default:
    the scenario's contour window) left-packed in the band; each cell is the
    mean Q over those slots at their own GSNR.
    """
    candidate = scenario.candidate(service_id)
    if candidate is None:
        raise UnknownService(f"{service_id!r} is not in the catalog")
    if scenario.profile is None:
        raise MissingProfile("contour needs a GSNR profile")
    b = wss_bandwidth_ghz or scenario.contour_bandwidth_ghz
    if b is None:
        raise ValueError("no WSS bandwidth given for the contour window")
    g = scenario.granularity_ghz
    width_bins = math.ceil(b / g - 1e-9)
    n = max(1, min(scenario.n_trx, scenario.capacity_bins // width_bins))
    centres = [(k + 0.5) * width_bins * g for k in range(n)]
    gsnr = [qot.gsnr_at(scenario.profile, min(c, scenario.width_ghz)) for c in centres]
    cascade = CascadeSpec(scenario.n_wss, b)
    powers = scenario.launch.grid()
    alphas = np.asarray(rolloffs, dtype=float)
    grid = np.empty((alphas.size, powers.size))
    for i, alpha in enumerate(alphas):
        point = _GridPoint(candidate.modulation, candidate.symbol_rate, float(alpha))
        for j, p in enumerate(powers):
            grid[i, j] = np.mean([
                qot.simulate_channel_q(point, cascade, scenario.wss, s, float(p), scenario.launch,
                                       scenario.isi, scenario.reference_rate_gbd)
                for s in gsnr
            ])
    return ContourGrid(service_id, float(b), alphas, powers, grid)


@dataclass(frozen=True)
class ProfileCheckRow:
    service_id: str
    modulation: str
    symbol_rate: float
    required_snr_db: Optional[float]
    available_snr_db: float
    feasible: bool

    @property
    def slack_db(self) -> Optional[float]:
        if self.required_snr_db is None:
            return None
        return self.available_snr_db - self.required_snr_db


def profile_check(scenario) -> list:
    """Stage-1 eligibility of every candidate at the band's minimum GSNR."""
    if scenario.profile is None:
        raise MissingProfile("scenario has no GSNR profile")
    floor = scenario.profile.minimum
    rows = []
    for c in scenario.catalog:
        available = floor - qot.rate_correction_db(c.symbol_rate, scenario.reference_rate_gbd)
        try:
            required = qot.required_snr_db(c.modulation, scenario.targets.target_db(c.modulation))
        except qot.Unreachable:
            required = None
        ok = required is not None and available >= required
        rows.append(ProfileCheckRow(c.id, c.modulation, c.symbol_rate, required, available, ok))
    return rows
