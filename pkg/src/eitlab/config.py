"""Flat key=value scenario configuration with exhaustive validation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .decoherence import DecoherenceModel, coherence_lifetime, gamma_s_from_lifetime
from .medium import DepthCalibration, PhysicalCell, UnitSystem, control_rabi_mhz, optical_depth


class ConfigError(ValueError):
    """Invalid configuration; carries the full violation list."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def _positive(x: float) -> bool:
    return math.isfinite(x) and x > 0


def _nonneg(x: float) -> bool:
    return math.isfinite(x) and x >= 0


def _fraction(x: float) -> bool:
    return math.isfinite(x) and 0.0 <= x <= 1.0


# key -> (parser, range check, description of the valid range)
_REQUIRED = {
    "cell_length_cm": (float, _positive, "> 0"),
    "cell_diameter_cm": (float, _positive, "> 0"),
    "reference_density_cm3": (float, _positive, "> 0"),
    "reference_depth": (float, _positive, "> 0"),
    "gamma_phys_per_s": (float, _positive, "> 0"),
    "control_powers_mw": ("float_list", _positive, "> 0"),
    "rabi_mhz_per_sqrt_mw": (float, _positive, "> 0"),
    "densities_cm3": ("float_list_empty_ok", _positive, "> 0"),
    "storage_time_us": (float, _positive, "> 0"),
    "tau0_us": (float, _positive, "> 0"),
    "k_se_per_cm3_us": (float, _nonneg, ">= 0"),
    "mc_walkers": (int, lambda v: v >= 1000, ">= 1000"),
    "mc_cross_section_cm2": (float, _positive, "> 0"),
    "mc_excited_lifetime_ns": (float, _positive, "> 0"),
    "mc_quench_prob": (float, _fraction, "in [0, 1]"),
    "depol_branching": (float, _fraction, "in [0, 1]"),
    "depol_pump_ratio": (float, _positive, "> 0"),
    "alt_cell_length_cm": (float, _positive, "> 0"),
    "alt_cell_diameter_cm": (float, _positive, "> 0"),
    "alt_quench_prob": (float, _fraction, "in [0, 1]"),
    "seed": (int, lambda v: True, "integer"),
    "output_dir": (str, lambda v: bool(v), "non-empty"),
}

_OPTIONAL = {
    "opt_tol": (float, _positive, "> 0", 1e-4),
    "opt_max_iter": (int, lambda v: v >= 1, ">= 1", 50),
    "eit_points": (int, lambda v: v >= 25, ">= 25", 241),
    "ramp_time": (float, _positive, "> 0", 0.5),
    "grid_tol": (float, _positive, "> 0", 1e-3),
}


@dataclass(frozen=True)
class ScenarioConfig:
    cell_length_cm: float
    cell_diameter_cm: float
    reference_density_cm3: float
    reference_depth: float
    gamma_phys_per_s: float
    control_powers_mw: tuple[float, ...]
    rabi_mhz_per_sqrt_mw: float
    densities_cm3: tuple[float, ...]
    storage_time_us: float
    tau0_us: float
    k_se_per_cm3_us: float
    mc_walkers: int
    mc_cross_section_cm2: float
    mc_excited_lifetime_ns: float
    mc_quench_prob: float
    depol_branching: float
    depol_pump_ratio: float
    alt_cell_length_cm: float
    alt_cell_diameter_cm: float
    alt_quench_prob: float
    seed: int
    output_dir: str
    opt_tol: float = 1e-4
    opt_max_iter: int = 50
    eit_points: int = 241
    ramp_time: float = 0.5
    grid_tol: float = 1e-3

    def units(self) -> UnitSystem:
        return UnitSystem(self.gamma_phys_per_s, self.cell_length_cm)

    def calibration(self) -> DepthCalibration:
        return DepthCalibration(
            reference_density_cm3=self.reference_density_cm3,
            reference_length_cm=self.cell_length_cm,
            reference_depth=self.reference_depth,
        )

    def decoherence_model(self) -> DecoherenceModel:
        return DecoherenceModel(tau_0_us=self.tau0_us, k_se=self.k_se_per_cm3_us)

    def depth_at(self, density_cm3: float, length_cm: float | None = None) -> float:
        cell = PhysicalCell(
            density_cm3=density_cm3,
            length_cm=self.cell_length_cm if length_cm is None else length_cm,
            diameter_cm=self.cell_diameter_cm,
        )
        return optical_depth(cell, self.calibration())

    def omega_dim(self, power_mw: float) -> float:
        mhz = control_rabi_mhz(power_mw, self.rabi_mhz_per_sqrt_mw)
        return self.units().rabi_mhz_to_dimensionless(mhz)

    def gamma_s_at(self, density_cm3: float) -> float:
        tau = coherence_lifetime(self.decoherence_model(), density_cm3)
        return gamma_s_from_lifetime(tau, self.gamma_phys_per_s)

    def as_dict(self) -> dict:
        out = {}
        for key in list(_REQUIRED) + list(_OPTIONAL):
            value = getattr(self, key)
            if isinstance(value, tuple):
                value = list(value)
            out[key] = value
        return out


def parse_config_text(text: str) -> tuple[dict, list[str]]:
    """Parse key=value lines; returns (raw string map, violations)."""
    raw: dict[str, str] = {}
    violations: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if " #" in stripped:
            stripped = stripped.split(" #", 1)[0].rstrip()
        if "=" not in stripped:
            violations.append(f"line {lineno}: expected key = value")
            continue
        key, value = stripped.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key in raw:
            violations.append(f"line {lineno}: duplicate key: {key}")
            continue
        raw[key] = value
    return raw, violations


def _convert(key: str, value: str, parser, check, bounds) -> tuple[object, list[str]]:
    if parser in ("float_list", "float_list_empty_ok"):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        if not parts:
            if parser == "float_list_empty_ok":
                return (), []
            return None, [f"key {key}: empty list"]
        try:
            items = tuple(float(p) for p in parts)
        except ValueError:
            return None, [f"key {key}: not a comma-separated number list: {value!r}"]
        bad = [v for v in items if not check(v)]
        if bad:
            return None, [f"key {key}: values must be {bounds}, got {bad}"]
        return items, []
    if parser is str:
        return value, [] if check(value) else [f"key {key}: must be {bounds}"]
    try:
        parsed = parser(value)
    except ValueError:
        return None, [f"key {key}: cannot parse {value!r} as {parser.__name__}"]
    if not check(parsed):
        return None, [f"key {key}: must be {bounds}, got {parsed}"]
    return parsed, []


def validate_config_text(text: str) -> tuple[ScenarioConfig | None, list[str]]:
    """Exhaustive validation; returns (config or None, all violations)."""
    raw, violations = parse_config_text(text)
    values: dict[str, object] = {}

    for key in raw:
        if key not in _REQUIRED and key not in _OPTIONAL:
            violations.append(f"unknown key: {key}")

    for key, (parser, check, bounds) in _REQUIRED.items():
        if key not in raw:
            violations.append(f"missing required key: {key}")
            continue
        parsed, errs = _convert(key, raw[key], parser, check, bounds)
        violations.extend(errs)
        if not errs:
            values[key] = parsed

    for key, (parser, check, bounds, default) in _OPTIONAL.items():
        if key not in raw:
            values[key] = default
            continue
        parsed, errs = _convert(key, raw[key], parser, check, bounds)
        violations.extend(errs)
        if not errs:
            values[key] = parsed

    if "densities_cm3" in values:
        dens = values["densities_cm3"]
        if list(dens) != sorted(dens):
            violations.append("key densities_cm3: ladder must be ascending")

    if violations:
        return None, violations
    return ScenarioConfig(**values), []


def load_config(path: str | Path) -> ScenarioConfig:
    """Load and validate; raises FileNotFoundError or ConfigError."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    cfg, violations = validate_config_text(p.read_text(encoding="utf-8"))
    if cfg is None:
        raise ConfigError(violations)
    return cfg


REFERENCE_CONFIG = """\
# eitlab reference configuration
# cell and optical-depth calibration
cell_length_cm = 7.5
cell_diameter_cm = 2.5
reference_density_cm3 = 4e10
reference_depth = 6.0
gamma_phys_per_s = 1.7857142857142857e7

# control field: quoted Rabi frequencies are ordinary MHz (x 2*pi on conversion)
control_powers_mw = 3.8, 8.8
rabi_mhz_per_sqrt_mw = 3.437

# sweep ladder and storage interval
densities_cm3 = 4e10, 1e11, 2e11, 4e11, 7e11, 1e12
storage_time_us = 400.0

# spin decoherence: 1/tau = 1/tau0 + k_se * N
tau0_us = 700.0
k_se_per_cm3_us = 2.0e-15

# radiation-trapping Monte Carlo
mc_walkers = 10000
mc_cross_section_cm2 = 8e-12
mc_excited_lifetime_ns = 28.0
mc_quench_prob = 0.0
depol_branching = 0.5
depol_pump_ratio = 2.0

# elongated quenched cell for geometry comparison
alt_cell_length_cm = 15.0
alt_cell_diameter_cm = 1.2
alt_quench_prob = 0.9

seed = 12345
output_dir = ./out
"""


def reference_config() -> str:
    """Reference configuration text matching the documented key list."""
    return REFERENCE_CONFIG
