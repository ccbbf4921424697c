"""Error-function WSS passband model and cascaded effective bandwidth."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import NoFeasibleBandwidth, PassbandCollapsed

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
BISECTION_TOL_GHZ = 1e-4
DEFAULT_CEILING_GHZ = 500.0


@dataclass(frozen=True)
class WssModelParams:
    """Single-WSS model: an ideal slot of width ``b`` blurred by a Gaussian
    whose FWHM is ``otf_bandwidth_3db`` GHz."""

    otf_bandwidth_3db: float = 5.0
    granularity: float = 6.25

    def __post_init__(self):
        if not self.otf_bandwidth_3db > 0:
            raise ValueError("otf_bandwidth_3db must be > 0")
        if not self.granularity > 0:
            raise ValueError("granularity must be > 0")

    @property
    def sigma(self) -> float:
        return self.otf_bandwidth_3db * FWHM_TO_SIGMA


def _is_grid_multiple(value: float, granularity: float) -> bool:
    ratio = value / granularity
    return ratio >= 1 - 1e-9 and abs(ratio - round(ratio)) < 1e-9


@dataclass(frozen=True)
class CascadeSpec:
    n_wss: int
    provisioned_bandwidth: float

    def __post_init__(self):
        if self.n_wss < 1:
            raise ValueError("n_wss must be >= 1")
        if not self.provisioned_bandwidth > 0:
            raise ValueError("provisioned_bandwidth must be > 0")

    def check_grid(self, params: WssModelParams) -> None:
        if not _is_grid_multiple(self.provisioned_bandwidth, params.granularity):
            raise ValueError(
                f"provisioned bandwidth {self.provisioned_bandwidth} GHz is not a "
                f"multiple of the {params.granularity} GHz grid"
            )


def wss_power_transfer(params: WssModelParams, provisioned_bandwidth: float, f):
    """Linear power gain of one WSS with slot width ``provisioned_bandwidth``.

    S(f) = 1/2 [erf((b/2 - f)/(sqrt(2) sigma)) + erf((b/2 + f)/(sqrt(2) sigma))]
    """
    f = np.asarray(f, dtype=float)
    half = provisioned_bandwidth / 2.0
    scale = math.sqrt(2.0) * params.sigma
    return 0.5 * (erf((half - f) / scale) + erf((half + f) / scale))


def cascade_transfer(params: WssModelParams, spec: CascadeSpec, f):
    """Power gain of ``n_wss`` identical, centre-aligned filters in series."""
    return wss_power_transfer(params, spec.provisioned_bandwidth, f) ** spec.n_wss


def effective_3db_bandwidth(params: WssModelParams, spec: CascadeSpec) -> float:
    """Full width at half of the cascade's DC gain, in GHz."""
    peak = float(cascade_transfer(params, spec, 0.0))
    if not peak > 0.5:
        raise PassbandCollapsed(
            f"{spec.n_wss} cascaded {spec.provisioned_bandwidth} GHz filters peak at {peak:.3g}"
        )
    half_power = 0.5 * peak
    lo, hi = 0.0, spec.provisioned_bandwidth / 2.0
    # S is non-increasing in |f|; grow the bracket until it crosses
    while float(cascade_transfer(params, spec, hi)) > half_power:
        hi *= 2.0
    while hi - lo > BISECTION_TOL_GHZ:
        mid = 0.5 * (lo + hi)
        if float(cascade_transfer(params, spec, mid)) > half_power:
            lo = mid
        else:
            hi = mid
    return lo + hi


def minimum_wss_bandwidth(
    params: WssModelParams,
    n_wss: int,
    b_occ: float,
    ceiling: float = DEFAULT_CEILING_GHZ,
) -> float:
    """Smallest grid-multiple slot whose cascaded 3 dB width covers ``b_occ``."""
    if not b_occ > 0:
        raise ValueError("b_occ must be > 0")
    g = params.granularity
    steps = int(math.floor(ceiling / g + 1e-9))
    for k in range(1, steps + 1):
        b = k * g
        try:
            width = effective_3db_bandwidth(params, CascadeSpec(n_wss, b))
        except PassbandCollapsed:
            continue
        if width >= b_occ:
            return b
    raise NoFeasibleBandwidth(
        f"no slot up to {ceiling} GHz passes {b_occ:.4f} GHz through {n_wss} WSSs"
    )
