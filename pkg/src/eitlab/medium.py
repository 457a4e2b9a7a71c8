"""Unit conventions and physical-to-dimensionless conversion.

All internal math runs in dimensionless units: the excited-state linewidth
gamma is the rate unit (time unit 1/gamma), the cell length is the length
unit (the medium spans xi in [0, 1]), and the vacuum light speed enters only
through the optical depth and the dimensionless transit speed ``c_dim``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

C_LIGHT_CM_PER_S = 2.99792458e10

# Default rate unit: half the inverse 28 ns excited-state lifetime of the Rb
# D1 line, i.e. the optical-coherence (HWHM) decay rate.
DEFAULT_GAMMA_PHYS_PER_S = 0.5 / 28e-9


@dataclass(frozen=True)
class MediumParams:
    """Dimensionless lambda-medium description.

    Attributes:
        d: resonant optical depth (intensity transmission on resonance of the
            bare two-level medium is exp(-2*d) under this package's field
            equations).
        gamma_s: spin-wave (ground-state coherence) decay rate in gamma units.
        delta_1: one-photon detuning in gamma units.
        gamma: excited-state linewidth; fixed to 1 by the unit convention.
    """

    d: float
    gamma_s: float = 0.0
    delta_1: float = 0.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ValueError(f"optical depth must be >= 0, got {self.d}")
        if self.gamma_s < 0:
            raise ValueError(f"spin decay must be >= 0, got {self.gamma_s}")
        if self.gamma != 1.0:
            raise ValueError("unit convention fixes gamma == 1")


@dataclass(frozen=True)
class DepthCalibration:
    """Pins the optical depth at one reference (density, length) point.

    The coupling constant g is never given numerically; only the product
    d = g^2 N L / (gamma c) matters, so we fix d at a reference density and
    scale linearly in density and length.
    """

    reference_density_cm3: float
    reference_length_cm: float
    reference_depth: float

    def __post_init__(self) -> None:
        if self.reference_density_cm3 <= 0:
            raise ValueError("reference density must be > 0")
        if self.reference_length_cm <= 0:
            raise ValueError("reference length must be > 0")
        if self.reference_depth <= 0:
            raise ValueError("reference depth must be > 0")


@dataclass(frozen=True)
class PhysicalCell:
    """Vapor-cell description in lab units."""

    density_cm3: float
    length_cm: float
    diameter_cm: float
    control_power_mw: float = 0.0
    beam_diameter_mm: float = 0.0
    omega_c_mhz: float = 0.0

    def __post_init__(self) -> None:
        if self.density_cm3 < 0:
            raise ValueError(f"density must be >= 0, got {self.density_cm3}")
        if self.length_cm <= 0:
            raise ValueError(f"length must be > 0, got {self.length_cm}")
        if self.diameter_cm <= 0:
            raise ValueError(f"diameter must be > 0, got {self.diameter_cm}")


def optical_depth(cell: PhysicalCell, calibration: DepthCalibration) -> float:
    """Resonant optical depth of a cell, linear in density and length."""
    return (
        calibration.reference_depth
        * (cell.density_cm3 / calibration.reference_density_cm3)
        * (cell.length_cm / calibration.reference_length_cm)
    )


@dataclass(frozen=True)
class UnitSystem:
    """Bridge between lab units and the dimensionless solver units."""

    gamma_phys_per_s: float = DEFAULT_GAMMA_PHYS_PER_S
    length_cm: float = 7.5

    def __post_init__(self) -> None:
        if self.gamma_phys_per_s <= 0:
            raise ValueError("gamma_phys_per_s must be > 0")
        if self.length_cm <= 0:
            raise ValueError("length_cm must be > 0")

    @property
    def time_unit_s(self) -> float:
        return 1.0 / self.gamma_phys_per_s

    @property
    def c_dim(self) -> float:
        """Vacuum light speed in cell lengths per 1/gamma."""
        return C_LIGHT_CM_PER_S / (self.length_cm * self.gamma_phys_per_s)

    def seconds_to_dimensionless(self, t_s: float) -> float:
        return t_s * self.gamma_phys_per_s

    def dimensionless_to_seconds(self, t_dim: float) -> float:
        return t_dim / self.gamma_phys_per_s

    def us_to_dimensionless(self, t_us: float) -> float:
        return t_us * 1e-6 * self.gamma_phys_per_s

    def dimensionless_to_us(self, t_dim: float) -> float:
        return t_dim / self.gamma_phys_per_s * 1e6

    def rabi_mhz_to_dimensionless(self, f_mhz: float) -> float:
        """Control Rabi frequency quoted in ordinary MHz -> gamma units.

        Quoted Rabi frequencies are interpreted as ordinary frequencies and
        multiplied by 2*pi to form an angular rate before dividing by gamma.
        """
        return 2.0 * math.pi * f_mhz * 1e6 / self.gamma_phys_per_s

    def rabi_dimensionless_to_mhz(self, omega: float) -> float:
        return omega * self.gamma_phys_per_s / (2.0 * math.pi * 1e6)


def control_rabi_mhz(power_mw: float, mhz_per_sqrt_mw: float) -> float:
    """Control Rabi frequency from laser power, Omega proportional to sqrt(P)."""
    if power_mw < 0:
        raise ValueError(f"power must be >= 0, got {power_mw}")
    return mhz_per_sqrt_mw * math.sqrt(power_mw)


DEFAULT_UNITS = UnitSystem()
DEFAULT_C_DIM = DEFAULT_UNITS.c_dim
