"""Root-raised-cosine pulse shaping, PSD estimation and occupied bandwidth.

All frequencies are in GHz and symbol rates in GBd, so a sampling rate of
``samples_per_symbol * symbol_rate`` is directly in GHz.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps_signal

PSD_SEGMENT = 4096
PSD_WINDOW = "hann"
MIN_PSD_SAMPLES = 1024
DEFAULT_POWER_FRACTION = 0.99


@dataclass(frozen=True)
class RrcParams:
    symbol_rate: float
    rolloff: float
    samples_per_symbol: int = 8
    num_symbols: int = 16384
    span_symbols: int = 32

    def __post_init__(self):
        if not self.symbol_rate > 0:
            raise ValueError(f"symbol_rate must be > 0, got {self.symbol_rate}")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError(f"rolloff must lie in [0, 1], got {self.rolloff}")
        if self.samples_per_symbol < 4:
            raise ValueError("samples_per_symbol must be >= 4")
        if self.num_symbols < 256:
            raise ValueError("num_symbols must be >= 256")
        if self.span_symbols < 16:
            raise ValueError("span_symbols must be >= 16")
        if self.num_taps % 2 == 0:
            raise ValueError(f"tap count {self.num_taps} must be odd")
        if not self.sampling_rate > self.symbol_rate * (1 + self.rolloff):
            raise ValueError("sampling rate aliases the shaped spectrum")

    @property
    def sampling_rate(self) -> float:
        return self.samples_per_symbol * self.symbol_rate

    @property
    def num_taps(self) -> int:
        return self.span_symbols * self.samples_per_symbol + 1


def _rrc_continuous(tau: np.ndarray, alpha: float) -> np.ndarray:
    """Unnormalized RRC pulse at times ``tau`` measured in symbol periods."""
    tau = np.asarray(tau, dtype=float)
    h = np.empty_like(tau)
    at_zero = tau == 0.0
    if alpha > 0:
        at_pole = np.isclose(np.abs(4 * alpha * tau), 1.0, rtol=0, atol=1e-12)
    else:
        at_pole = np.zeros_like(at_zero)
    regular = ~(at_zero | at_pole)

    t = tau[regular]
    num = np.sin(np.pi * t * (1 - alpha)) + 4 * alpha * t * np.cos(np.pi * t * (1 + alpha))
    den = np.pi * t * (1 - (4 * alpha * t) ** 2)
    h[regular] = num / den
    h[at_zero] = 1 - alpha + 4 * alpha / np.pi
    if alpha > 0:
        q = np.pi / (4 * alpha)
        h[at_pole] = alpha / np.sqrt(2) * (
            (1 + 2 / np.pi) * np.sin(q) + (1 - 2 / np.pi) * np.cos(q)
        )
    return h


def rrc_impulse_response(params: RrcParams) -> np.ndarray:
    """Centered RRC FIR taps with unit energy.

    Taps sit at ``t = k / (samples_per_symbol * symbol_rate)`` for
    ``k = -span*sps/2 .. span*sps/2``. The removable singularities at
    ``t = 0`` and ``t = +-1/(4 alpha R_s)`` use their analytic limits.
    """
    half = params.num_taps // 2
    tau = np.arange(-half, half + 1) / params.samples_per_symbol
    h = _rrc_continuous(tau, params.rolloff)
    return h / np.sqrt(np.sum(h * h))


def rrc_frequency_response(params: RrcParams, freqs) -> np.ndarray:
    """Closed-form RRC amplitude response (peak 1) at ``freqs`` in GHz."""
    f = np.abs(np.asarray(freqs, dtype=float))
    if not np.all(np.isfinite(f)):
        raise ValueError("frequencies must be finite")
    rs, alpha = params.symbol_rate, params.rolloff
    f_flat = (1 - alpha) * rs / 2
    f_stop = (1 + alpha) * rs / 2
    out = np.zeros_like(f)
    if alpha == 0:
        out[f < f_flat] = 1.0
        out[f == f_flat] = np.sqrt(0.5)
        return out
    out[f <= f_flat] = 1.0
    band = (f > f_flat) & (f <= f_stop)
    out[band] = np.cos(np.pi / (2 * alpha * rs) * (f[band] - f_flat))
    return out


def matched_pair_response(params: RrcParams) -> np.ndarray:
    """Raised-cosine pulse formed by an RRC filter and its matched twin.

    The product of the two closed-form spectra is sampled on the DFT grid of
    one filter span and transformed back, i.e. the circular convolution of
    the untruncated, span-periodic RRC with itself. Sample 0 is the peak;
    symbol lags sit at multiples of ``samples_per_symbol``.
    """
    n = params.span_symbols * params.samples_per_symbol
    freqs = np.fft.fftfreq(n, d=1.0 / params.sampling_rate)
    spectrum = rrc_frequency_response(params, freqs) ** 2
    return np.fft.ifft(spectrum).real


def qpsk_symbols(num_symbols: int, seed: int) -> np.ndarray:
    """Unit-power QPSK symbols from a PCG64 generator seeded with ``seed``."""
    rng = np.random.default_rng(seed)
    k = rng.integers(0, 4, size=num_symbols)
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * k))


def generate_shaped_signal(params: RrcParams, seed: int) -> np.ndarray:
    """Complex baseband QPSK signal shaped by the RRC filter.

    Output has ``num_symbols * samples_per_symbol`` samples with symbol ``k``
    centered on sample ``k * samples_per_symbol``; mean power is ~1.
    """
    sps = params.samples_per_symbol
    up = np.zeros(params.num_symbols * sps, dtype=complex)
    up[::sps] = qpsk_symbols(params.num_symbols, seed)
    taps = rrc_impulse_response(params)
    return sps_signal.fftconvolve(up, taps, mode="same") * np.sqrt(sps)


@dataclass(frozen=True)
class PsdEstimate:
    freqs: np.ndarray
    power_density: np.ndarray
    total_power: float

    @property
    def resolution(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


def estimate_psd(samples, sampling_rate: float) -> PsdEstimate:
    """Averaged-periodogram PSD on a grid symmetric about 0 GHz.

    Hann-windowed 4096-sample segments with 50% overlap. The Nyquist bin is
    mirrored to +fs/2 so the grid is symmetric, and ``total_power`` is the
    trapezoid integral of the density (which counts that bin once).
    """
    x = np.asarray(samples)
    if x.ndim != 1 or x.size < MIN_PSD_SAMPLES:
        raise ValueError(f"signal too short for PSD estimation (need >= {MIN_PSD_SAMPLES} samples)")
    nperseg = min(PSD_SEGMENT, x.size)
    freqs, density = sps_signal.welch(
        x.astype(complex),
        fs=sampling_rate,
        window=PSD_WINDOW,
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    freqs = np.fft.fftshift(freqs)
    density = np.fft.fftshift(density)
    if nperseg % 2 == 0:
        # freqs[0] is -fs/2 with no +fs/2 partner
        freqs = np.append(freqs, -freqs[0])
        density = np.append(density, density[0])
    return PsdEstimate(freqs, density, float(np.trapezoid(density, freqs)))


def _folded_cumulative(psd: PsdEstimate):
    """Knots ``h`` and in-band power ``P(|f| <= h)``, piecewise linear in h."""
    d = psd.power_density.copy()
    d[[0, -1]] *= 0.5  # trapezoid end weights
    df = psd.resolution
    centre = len(d) // 2
    folded = np.concatenate(([d[centre]], d[centre + 1:] + d[:centre][::-1]))
    knots = (np.arange(len(folded)) + 0.5) * df
    cumulative = np.cumsum(folded) * df
    return np.concatenate(([0.0], knots)), np.concatenate(([0.0], cumulative))


def occupied_bandwidth(psd: PsdEstimate, power_fraction: float = DEFAULT_POWER_FRACTION) -> float:
    """Width in GHz of the smallest symmetric band holding ``power_fraction``."""
    if not 0.0 < power_fraction < 1.0:
        raise ValueError(f"power_fraction must lie in (0, 1), got {power_fraction}")
    knots, cumulative = _folded_cumulative(psd)
    target = power_fraction * cumulative[-1]
    k = int(np.searchsorted(cumulative, target, side="left"))
    lo_h, hi_h = knots[k - 1], knots[k]
    lo_p, hi_p = cumulative[k - 1], cumulative[k]
    h = lo_h + (target - lo_p) / (hi_p - lo_p) * (hi_h - lo_h)
    return float(2 * h)


def level_bandwidth(psd: PsdEstimate, level_db: float) -> float:
    """Bandwidth in GHz over which the PSD stays within ``level_db`` of its flat top.

    The flat-top reference is the mean density inside the 50%-power band,
    which is far less noise-biased than the raw maximum. The width is the
    number of grid bins at or above the threshold times the grid spacing.
    """
    if not level_db > 0:
        raise ValueError(f"level_db must be > 0, got {level_db}")
    half_width = occupied_bandwidth(psd, 0.5) / 2
    core = np.abs(psd.freqs) <= max(half_width, psd.resolution)
    reference = float(np.mean(psd.power_density[core]))
    threshold = reference * 10 ** (-level_db / 10)
    return float(np.count_nonzero(psd.power_density >= threshold) * psd.resolution)


@dataclass(frozen=True)
class BandwidthCriterion:
    """How a PSD is reduced to one occupied-bandwidth number.

    ``method`` is ``"power_fraction"`` (``value`` in (0, 1)) or
    ``"db_down"`` (``value`` in dB below the flat top).
    """

    method: str = "db_down"
    value: float = 4.0

    def __post_init__(self):
        if self.method == "power_fraction":
            if not 0.0 < self.value < 1.0:
                raise ValueError("power_fraction value must lie in (0, 1)")
        elif self.method == "db_down":
            if not self.value > 0:
                raise ValueError("db_down value must be > 0 dB")
        else:
            raise ValueError(f"unknown bandwidth criterion {self.method!r}")

    def measure(self, psd: PsdEstimate) -> float:
        if self.method == "power_fraction":
            return occupied_bandwidth(psd, self.value)
        return level_bandwidth(psd, self.value)
