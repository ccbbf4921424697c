"""In-memory planning scenario shared by the planner and the CLI."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .catalog import DspSettings
from .qot import DEFAULT_ISI, DEFAULT_REFERENCE_RATE, GsnrProfile, IsiModel, LaunchPowerModel, QotTargets
from .wss_cascade import WssModelParams


@dataclass(frozen=True)
class PowerCurve:
    relative_power_db: tuple
    q_db: tuple


@dataclass(frozen=True)
class MeasuredQ:
    """Measured Q per service id, plus optional Q-vs-launch-power curves."""

    q_db: Mapping[str, float] = field(default_factory=dict)
    power_curves: Mapping[str, PowerCurve] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    width_ghz: float
    n_trx: int
    n_wss: int
    catalog: tuple
    wss: WssModelParams = WssModelParams()
    targets: QotTargets = QotTargets()
    reference_rate_gbd: float = DEFAULT_REFERENCE_RATE
    dsp: DspSettings = DspSettings()
    launch: LaunchPowerModel = LaunchPowerModel()
    isi: IsiModel = DEFAULT_ISI
    profile: Optional[GsnrProfile] = None
    measured: Optional[MeasuredQ] = None
    contour_bandwidth_ghz: Optional[float] = None
    copies_per_item: Optional[int] = None
    seed: int = 0

    @property
    def granularity_ghz(self) -> float:
        return self.wss.granularity

    @property
    def capacity_bins(self) -> int:
        return math.ceil(self.width_ghz / self.granularity_ghz - 1e-9)

    def candidate(self, service_id: str):
        for c in self.catalog:
            if c.id == service_id:
                return c
        return None
