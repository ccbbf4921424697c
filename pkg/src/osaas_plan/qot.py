"""QoT arithmetic: BER/Q/SNR conversion, GSNR profiles, feasibility and a
calibrated surrogate channel for launch-power and roll-off sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import erfc, erfcinv

from .errors import MissingChannelQ, OutOfBand, Unreachable
from .rrc_dsp import RrcParams, rrc_frequency_response
from .wss_cascade import CascadeSpec, WssModelParams, cascade_transfer

MODULATION_ORDER = {"QPSK": 4, "16QAM": 16, "32QAM": 32, "64QAM": 64}
DEFAULT_Q_FEC_DB = 5.5
DEFAULT_REFERENCE_RATE = 32.0
MIN_TARGET_BER = 1e-15
_SNR_SEARCH_DB = (-30.0, 80.0)
_Q_FLOOR_LIN = 1e-6


def constellation_size(modulation: str) -> int:
    try:
        return MODULATION_ORDER[modulation]
    except KeyError:
        raise ValueError(f"unknown modulation {modulation!r}") from None


def bits_per_symbol(modulation: str) -> int:
    return int(math.log2(constellation_size(modulation)))


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def q_db_to_ber(q_db):
    """BER of a Gaussian decision variable with Q-factor ``q_db`` (20 log10)."""
    q_lin = 10.0 ** (np.asarray(q_db, dtype=float) / 20.0)
    return 0.5 * erfc(q_lin / math.sqrt(2.0))


def ber_to_q_db(ber):
    ber = np.clip(np.asarray(ber, dtype=float), 0.0, 0.5)
    q_lin = np.maximum(math.sqrt(2.0) * erfcinv(2.0 * ber), _Q_FLOOR_LIN)
    return 20.0 * np.log10(q_lin)


def mqam_ber(modulation: str, snr_lin):
    """AWGN bit error rate of Gray-coded M-QAM at per-symbol SNR ``snr_lin``.

    Uses the square-QAM approximation; 32QAM (a cross constellation) is
    treated with the same expression at M = 32.
    """
    m = constellation_size(modulation)
    k = math.log2(m)
    snr = np.maximum(np.asarray(snr_lin, dtype=float), 0.0)
    return (2.0 / k) * (1.0 - 1.0 / math.sqrt(m)) * erfc(np.sqrt(3.0 * snr / (2.0 * (m - 1))))


def q_from_snr_db(modulation: str, snr_db):
    return ber_to_q_db(mqam_ber(modulation, db_to_linear(snr_db)))


def required_snr_db(modulation: str, target_q_db: float) -> float:
    """Minimum per-symbol SNR (dB) at which ``modulation`` reaches ``target_q_db``."""
    if not math.isfinite(target_q_db):
        raise ValueError("target_q_db must be finite")
    target_ber = float(q_db_to_ber(target_q_db))
    if target_ber < MIN_TARGET_BER:
        raise Unreachable(f"target Q {target_q_db} dB implies BER {target_ber:.3g} < {MIN_TARGET_BER}")
    lo, hi = _SNR_SEARCH_DB
    ber = lambda snr_db: float(mqam_ber(modulation, db_to_linear(snr_db)))
    if ber(lo) <= target_ber:
        raise Unreachable(f"{modulation} exceeds BER {target_ber:.3g} at any SNR; target too loose")
    if ber(hi) > target_ber:
        raise Unreachable(f"{modulation} cannot reach BER {target_ber:.3g}")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if ber(mid) > target_ber:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class GsnrProfile:
    """GSNR samples across a leased band; offsets are GHz from the band start."""

    band_start: float
    band_width: float
    offsets: tuple
    gsnr_db: tuple

    def __post_init__(self):
        if not self.band_width > 0:
            raise ValueError("band_width must be > 0")
        if len(self.offsets) != len(self.gsnr_db):
            raise ValueError("offsets and gsnr_db differ in length")
        if len(self.offsets) < 2:
            raise ValueError("a profile needs at least 2 samples")
        off = np.asarray(self.offsets, dtype=float)
        if np.any(np.diff(off) <= 0):
            raise ValueError("offsets must be strictly increasing")
        if off[0] < 0 or off[-1] > self.band_width:
            raise ValueError("offsets must lie within [0, band_width]")
        if not np.all(np.isfinite(self.gsnr_db)):
            raise ValueError("gsnr values must be finite")

    @classmethod
    def flat(cls, band_width: float, gsnr_db: float, band_start: float = 0.0) -> "GsnrProfile":
        return cls(band_start, band_width, (0.0, float(band_width)), (float(gsnr_db),) * 2)

    @property
    def minimum(self) -> float:
        return float(min(self.gsnr_db))


def gsnr_at(profile: GsnrProfile, center_offset: float) -> float:
    """Linearly interpolated GSNR (dB); values beyond the end samples clamp."""
    if not 0.0 <= center_offset <= profile.band_width:
        raise OutOfBand(f"offset {center_offset} GHz outside [0, {profile.band_width}]")
    return float(np.interp(center_offset, profile.offsets, profile.gsnr_db))


@dataclass(frozen=True)
class QotTargets:
    q_fec_db: Mapping[str, float] = field(
        default_factory=lambda: {m: DEFAULT_Q_FEC_DB for m in MODULATION_ORDER}
    )
    margin_db: float = 0.0

    def __post_init__(self):
        if self.margin_db < 0:
            raise ValueError("margin_db must be >= 0")
        for mod, q in self.q_fec_db.items():
            constellation_size(mod)
            if not q > 0:
                raise ValueError(f"Q_FEC for {mod} must be > 0 dB")

    def target_db(self, modulation: str) -> float:
        try:
            return self.q_fec_db[modulation] + self.margin_db
        except KeyError:
            raise ValueError(f"no Q_FEC threshold for {modulation}") from None


def rate_correction_db(symbol_rate: float, symbolrate_ref: float) -> float:
    """Noise-bandwidth correction from the probe reference rate to ``symbol_rate``."""
    return 10.0 * math.log10(symbol_rate / symbolrate_ref)


def feasibility_slack_db(profile, targets, candidate, center_offset, symbolrate_ref=DEFAULT_REFERENCE_RATE):
    """Available minus required SNR (dB) for ``candidate`` at ``center_offset``."""
    available = gsnr_at(profile, center_offset) - rate_correction_db(candidate.symbol_rate, symbolrate_ref)
    required = required_snr_db(candidate.modulation, targets.target_db(candidate.modulation))
    return available - required


def feasible_at(profile, targets, candidate, center_offset, symbolrate_ref=DEFAULT_REFERENCE_RATE) -> bool:
    """Stage-1 test; an unreachable target is simply infeasible."""
    try:
        return feasibility_slack_db(profile, targets, candidate, center_offset, symbolrate_ref) >= 0.0
    except Unreachable:
        return False


@dataclass(frozen=True)
class LaunchPowerModel:
    """SNR(P) = P / (ase + nli * P^3) surrogate for the booster sweep."""

    ase_noise_power: float = 1.0
    nli_coefficient: float = 0.5
    sweep_range_db: tuple = (-5.0, 5.0)
    step_db: float = 0.5

    def __post_init__(self):
        if not self.ase_noise_power > 0:
            raise ValueError("ase_noise_power must be > 0")
        if not self.nli_coefficient > 0:
            raise ValueError("nli_coefficient must be > 0")
        if not self.step_db > 0:
            raise ValueError("step_db must be > 0")
        lo, hi = self.sweep_range_db
        if not lo < hi:
            raise ValueError("sweep_range_db must be (min, max) with min < max")

    @property
    def optimum_power(self) -> float:
        return (self.ase_noise_power / (2.0 * self.nli_coefficient)) ** (1.0 / 3.0)

    def snr(self, power):
        return power / (self.ase_noise_power + self.nli_coefficient * power**3)

    def relative_gain_db(self, relative_power_db):
        """SNR change (dB) when moving ``relative_power_db`` off the optimum."""
        p = self.optimum_power * db_to_linear(relative_power_db)
        return 10.0 * np.log10(self.snr(p) / self.snr(self.optimum_power))

    def grid(self) -> np.ndarray:
        lo, hi = self.sweep_range_db
        n = int(round((hi - lo) / self.step_db))
        return np.round(lo + self.step_db * np.arange(n + 1), 10)


@dataclass(frozen=True)
class IsiModel:
    """ISI penalty slope_db * max(knee - rolloff, 0) per modulation.

    Below the knee a sharper roll-off costs ``slope_db`` dB per unit of
    roll-off; past it the penalty is gone and only filtering remains.
    """

    slope_db: Mapping[str, float] = field(
        default_factory=lambda: {"QPSK": 0.5, "16QAM": 1.0, "32QAM": 2.5, "64QAM": 3.0}
    )
    knee: Mapping[str, float] = field(
        default_factory=lambda: {"QPSK": 0.10, "16QAM": 0.20, "32QAM": 0.40, "64QAM": 0.40}
    )

    def penalty_db(self, modulation: str, rolloff: float) -> float:
        return self.slope_db[modulation] * max(self.knee[modulation] - rolloff, 0.0)


DEFAULT_ISI = IsiModel()


def filtering_penalty_db(symbol_rate, rolloff, cascade: CascadeSpec, wss: WssModelParams, points=4001) -> float:
    """-10 log10 of the RRC signal power that survives the WSS cascade."""
    params = RrcParams(symbol_rate, rolloff)
    edge = (1.0 + rolloff) * symbol_rate / 2.0
    f = np.linspace(-edge, edge, points)
    power = rrc_frequency_response(params, f) ** 2
    passed = np.trapezoid(power * cascade_transfer(wss, cascade, f), f)
    total = np.trapezoid(power, f)
    if passed <= 0:
        return math.inf
    return float(-10.0 * np.log10(passed / total))


def simulate_channel_q(
    service,
    cascade: CascadeSpec,
    wss: WssModelParams,
    gsnr_db: float,
    relative_power_db: float,
    model: LaunchPowerModel,
    isi: IsiModel = DEFAULT_ISI,
    symbolrate_ref: float = DEFAULT_REFERENCE_RATE,
) -> float:
    """Surrogate Q (dB) of one channel.

    ``service`` needs ``modulation``, ``symbol_rate`` and ``rolloff``.
    ``gsnr_db`` is the probe GSNR at the optimum launch power.
    """
    snr_db = (
        gsnr_db
        - rate_correction_db(service.symbol_rate, symbolrate_ref)
        + float(model.relative_gain_db(relative_power_db))
        - filtering_penalty_db(service.symbol_rate, service.rolloff, cascade, wss)
        - isi.penalty_db(service.modulation, service.rolloff)
    )
    if not math.isfinite(snr_db):
        return float(ber_to_q_db(0.5))
    return float(q_from_snr_db(service.modulation, snr_db))


MEASURED = "measured"
SIMULATED = "simulated"


@dataclass(frozen=True)
class ChannelQot:
    channel: int
    service_id: str
    q_target_db: float
    q_value_db: float
    feasible: bool
    source: str

    @property
    def slack_db(self) -> float:
        return self.q_value_db - self.q_target_db


@dataclass(frozen=True)
class QotReport:
    channels: tuple = ()

    @property
    def feasible(self) -> bool:
        return all(c.feasible for c in self.channels)

    def failing_ids(self) -> list:
        seen = []
        for c in self.channels:
            if not c.feasible and c.service_id not in seen:
                seen.append(c.service_id)
        return seen

    def worst_failing_id(self) -> Optional[str]:
        failing = [c for c in self.channels if not c.feasible]
        if not failing:
            return None
        return min(failing, key=lambda c: (c.slack_db, c.service_id)).service_id


def check_report(plan, q_values: Mapping[str, float], targets: QotTargets,
                 sources: Optional[Mapping[str, str]] = None) -> QotReport:
    """Compare every planned channel's Q (keyed by service id) with its target."""
    sources = sources or {}
    rows = []
    for index, placement in enumerate(plan.placements):
        service = placement.service
        if service.id not in q_values:
            raise MissingChannelQ(f"channel {index} ({service.id}) has no Q value")
        q = float(q_values[service.id])
        target = targets.target_db(service.modulation)
        rows.append(ChannelQot(index, service.id, target, q, q >= target,
                               sources.get(service.id, MEASURED)))
    return QotReport(tuple(rows))


def report_rows(report: QotReport) -> Sequence[dict]:
    return [
        {
            "channel": c.channel,
            "service": c.service_id,
            "q_target_db": c.q_target_db,
            "q_db": c.q_value_db,
            "feasible": c.feasible,
            "source": c.source,
        }
        for c in report.channels
    ]
