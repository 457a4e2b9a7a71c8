"""Density-dependent spin decoherence and the slow/stored accounting identity."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class DecoherenceModel:
    """Coherence lifetime vs density: 1/tau(N) = 1/tau_0 + k_se * N.

    tau_0 is the zero-density lifetime in microseconds; k_se is the
    density-proportional decay coefficient (per cm^-3 per microsecond),
    the minimal linear model for spin-exchange-type losses.
    """

    tau_0_us: float = 700.0
    k_se: float = 0.0

    def __post_init__(self) -> None:
        if self.tau_0_us <= 0:
            raise ValueError(f"tau_0 must be > 0, got {self.tau_0_us}")
        if self.k_se < 0:
            raise ValueError(f"k_se must be >= 0, got {self.k_se}")


def coherence_lifetime(model: DecoherenceModel, density_cm3: float) -> float:
    """Coherence lifetime in microseconds at the given atomic density."""
    if density_cm3 < 0:
        raise ValueError(f"density must be >= 0, got {density_cm3}")
    return 1.0 / (1.0 / model.tau_0_us + model.k_se * density_cm3)


def gamma_s_from_lifetime(tau_us: float, gamma_phys_per_s: float) -> float:
    """Spin-wave amplitude decay rate in gamma units from a lifetime in us."""
    if tau_us <= 0:
        raise ValueError(f"coherence lifetime must be > 0, got {tau_us}")
    if gamma_phys_per_s <= 0:
        raise ValueError(f"gamma_phys_per_s must be > 0, got {gamma_phys_per_s}")
    return 1.0 / (tau_us * 1e-6 * gamma_phys_per_s)


def intensity_lifetime_us(gamma_s: float, gamma_phys_per_s: float) -> float:
    """1/e time of the retrieved *area* vs storage time, in microseconds.

    Retrieved intensity decays at twice the spin-wave amplitude rate, so
    the lifetime a tau-scan measures is half the amplitude lifetime. This is
    the value the accounting identity expects.
    """
    if gamma_s <= 0:
        return math.inf
    if gamma_phys_per_s <= 0:
        raise ValueError(f"gamma_phys_per_s must be > 0, got {gamma_phys_per_s}")
    return 1.0 / (2.0 * gamma_s * gamma_phys_per_s) * 1e6


@dataclass(frozen=True)
class SlowLightPrediction:
    value: float
    extrapolation_sensitive: bool


def slow_light_prediction(
    eta_leakage: float,
    eta_storage_at_tau: float,
    tau_us: float,
    tau_coherence_us: float,
) -> SlowLightPrediction:
    """Back-extrapolated slow-light efficiency.

    eta_leakage + eta(tau) * exp(tau / tau_coherence): the storage-time decay
    is undone to recover the tau -> 0 readout, whose sum with the leaked area
    reproduces the never-stored (slow light) efficiency. The flag marks
    predictions above 1, where the exponential amplifies lifetime error.
    """
    if tau_coherence_us <= 0:
        raise ValueError(f"coherence lifetime must be > 0, got {tau_coherence_us}")
    if not 0.0 <= eta_leakage <= 1.0:
        raise ValueError(f"eta_leakage must be in [0, 1], got {eta_leakage}")
    if not 0.0 <= eta_storage_at_tau <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta_storage_at_tau}")
    value = eta_leakage + eta_storage_at_tau * math.exp(tau_us / tau_coherence_us)
    return SlowLightPrediction(value=value, extrapolation_sensitive=value > 1.0)
