"""Gaussian-noise-model reach of a multi-span WDM link.

Per span the channel under test collects ASE power ``P_ase`` and nonlinear
interference ``eta * P^3``; over N spans
``SNR = P / (N * P_ase + N^(1 + eps) * eta * P^3)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

from scipy.optimize import brentq

PLANCK = 6.62607015e-34
LIGHT = 299792458.0


class ReachError(ValueError):
    pass


@dataclass(frozen=True)
class LinkSpec:
    span_km: float = 80.0
    n_channels: int = 81
    symbol_rate_gbaud: float = 32.0
    channel_spacing_ghz: float = 50.0
    attenuation_db_km: float = 0.2
    dispersion_ps_nm_km: float = 17.0
    gamma_per_w_km: float = 1.3
    noise_figure_db: float = 5.0
    wavelength_nm: float = 1550.0
    coherence_eps: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name == "coherence_eps":
                if not 0.0 <= val < 1.0:
                    raise ReachError("coherence_eps must lie in [0, 1)")
            elif not (val > 0 and math.isfinite(val)):
                raise ReachError(f"{f.name} must be positive, got {val}")

    @classmethod
    def from_dict(cls, d: dict) -> "LinkSpec":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ReachError(f"unknown link parameters: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "LinkSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    # -- derived quantities (SI units)
    @property
    def alpha(self) -> float:
        """Power attenuation in 1/m."""
        return self.attenuation_db_km / (10 * math.log10(math.e)) / 1e3

    @property
    def beta2(self) -> float:
        """|beta2| in s^2/m."""
        lam = self.wavelength_nm * 1e-9
        D = self.dispersion_ps_nm_km * 1e-6     # s/m^2
        return D * lam**2 / (2 * math.pi * LIGHT)

    @property
    def span_m(self) -> float:
        return self.span_km * 1e3

    @property
    def l_eff(self) -> float:
        return (1 - math.exp(-self.alpha * self.span_m)) / self.alpha

    @property
    def p_ase(self) -> float:
        """ASE power per span in the signal bandwidth (W)."""
        gain = math.exp(self.alpha * self.span_m)
        nu = LIGHT / (self.wavelength_nm * 1e-9)
        nf = 10 ** (self.noise_figure_db / 10)
        return nf * PLANCK * nu * (gain - 1) * self.symbol_rate_gbaud * 1e9

    @property
    def eta(self) -> float:
        """Per-span NLI coefficient (1/W^2) of the closed-form GN model."""
        gamma = self.gamma_per_w_km * 1e-3
        rs = self.symbol_rate_gbaud * 1e9
        bw = self.n_channels * self.channel_spacing_ghz * 1e9
        l_eff_a = 1 / (2 * self.alpha)
        b2 = self.beta2
        return (8 / 27 * gamma**2 * self.l_eff**2
                * math.asinh(math.pi**2 / 2 * b2 * l_eff_a * bw**2)
                / (math.pi * b2 * l_eff_a * rs**2))


@dataclass(frozen=True)
class ReachResult:
    n_spans: int
    reach_km: float
    snr_db: float
    required_snr_db: float

    def to_dict(self) -> dict:
        return asdict(self)


def _db(x: float) -> float:
    return 10 * math.log10(x)


def dbm_to_w(p_dbm: float) -> float:
    return 10 ** (p_dbm / 10) * 1e-3


def snr_linear(n_spans: float, link: LinkSpec, power_w: float) -> float:
    if n_spans < 1:
        raise ReachError("n_spans must be at least 1")
    noise = n_spans * link.p_ase + n_spans ** (1 + link.coherence_eps) * link.eta * power_w**3
    return power_w / noise


def snr_after(n_spans: float, link: LinkSpec, launch_power_dbm: float) -> float:
    """SNR in dB after ``n_spans`` at the given per-channel launch power."""
    return _db(snr_linear(n_spans, link, dbm_to_w(launch_power_dbm)))


def optimal_power_w(link: LinkSpec, n_spans: float = 1) -> float:
    """Launch power maximizing the GN SNR: P* = (P_ase / (2 eta N^eps))^(1/3)."""
    return (link.p_ase / (2 * link.eta * n_spans**link.coherence_eps)) ** (1 / 3)


def optimal_power_dbm(link: LinkSpec, n_spans: float = 1) -> float:
    return _db(optimal_power_w(link, n_spans) * 1e3)


def optimal_snr_db(n_spans: float, link: LinkSpec) -> float:
    return _db(snr_linear(n_spans, link, optimal_power_w(link, n_spans)))


def _spans_for(required_snr_db: float, link: LinkSpec) -> float:
    """Continuous span count at which the optimal SNR equals the requirement."""
    f = lambda n: optimal_snr_db(n, link) - required_snr_db
    if f(1.0) < 0:
        raise ReachError(f"{required_snr_db:.3f} dB is not reachable even over one span")
    hi = 2.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e9:
            raise ReachError("requirement reachable over an unbounded distance")
    return brentq(f, 1.0, hi, xtol=1e-12, rtol=1e-14)


def _quantize(x: float, rounding: str) -> int:
    # Guard against float noise on exact span counts (e.g. 121.00000000001).
    if rounding == "floor":
        return int(math.floor(x + 1e-9))
    if rounding == "round":
        return int(math.floor(x + 0.5))
    raise ReachError(f"unknown rounding {rounding!r}")


def reach(required_snr_db: float, link: LinkSpec, rounding: str = "floor") -> ReachResult:
    """Longest span count whose optimal-power SNR meets the requirement."""
    n = max(1, _quantize(_spans_for(required_snr_db, link), rounding))
    return ReachResult(n, n * link.span_km, optimal_snr_db(n, link), required_snr_db)


def reach_gain(delta_snr_db: float, baseline_km: float, link: LinkSpec,
               rounding: str = "round") -> float:
    """Extra reach (km) when the SNR requirement drops by ``delta_snr_db``.

    The baseline requirement is back-solved as the optimal SNR at the
    baseline span count.
    """
    spans = baseline_km / link.span_km
    if abs(spans - round(spans)) > 1e-9 or spans < 1:
        raise ReachError(f"baseline {baseline_km} km is not a whole number of spans")
    spans = int(round(spans))
    required = optimal_snr_db(spans, link)
    new = reach(required - delta_snr_db, link, rounding)
    return (new.n_spans - spans) * link.span_km
