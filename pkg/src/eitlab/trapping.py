"""Monte Carlo photon random walk in a cylindrical vapor cell.

Quantifies radiation trapping: a resonant photon absorbed on the beam axis is
re-emitted isotropically, bounces between absorption events, and eventually
escapes the cell wall, an end window, or is quenched. No frequency
redistribution is applied: re-emitted photons keep the resonant cross
section, which is sufficient for the monotone signatures this model feeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ESCAPE_END = 0
ESCAPE_SIDE = 1
QUENCHED = 2
TRAVERSED = 3

DEFAULT_EXCITED_LIFETIME_NS = 28.0


class InsufficientStatisticsError(RuntimeError):
    """Too few Monte Carlo events to form the requested estimate."""


@dataclass(frozen=True)
class CellGeometry:
    """Cylinder along z with the beam entering at the center of z = 0."""

    length_cm: float
    radius_cm: float
    quench_prob: float = 0.0

    def __post_init__(self) -> None:
        if self.length_cm <= 0:
            raise ValueError(f"length must be > 0, got {self.length_cm}")
        if self.radius_cm <= 0:
            raise ValueError(f"radius must be > 0, got {self.radius_cm}")
        if not 0.0 <= self.quench_prob <= 1.0:
            raise ValueError(f"quench probability must be in [0, 1], got {self.quench_prob}")

    @property
    def aspect_ratio(self) -> float:
        return self.length_cm / (2.0 * self.radius_cm)


@dataclass
class TrappingStats:
    """Aggregated walk outcomes; per-walker arrays kept for estimators."""

    n_scatters: np.ndarray
    residence_ns: np.ndarray
    escaped_through: np.ndarray
    geometry: CellGeometry
    density_cm3: float
    cross_section_cm2: float
    excited_lifetime_ns: float
    seed: int

    @property
    def n_walkers(self) -> int:
        return int(self.n_scatters.size)

    @property
    def absorbed(self) -> np.ndarray:
        return self.n_scatters >= 1

    @property
    def degenerate(self) -> bool:
        return not bool(np.any(self.absorbed))

    @property
    def mean_scatters(self) -> float:
        if self.degenerate:
            return 0.0
        return float(np.mean(self.n_scatters[self.absorbed]))

    @property
    def std_scatters(self) -> float:
        if self.degenerate:
            return 0.0
        return float(np.std(self.n_scatters[self.absorbed]))

    @property
    def mean_residence_ns(self) -> float:
        if self.degenerate:
            return 0.0
        return float(np.mean(self.residence_ns[self.absorbed]))

    def side_escape_times_ns(self) -> np.ndarray:
        return self.residence_ns[self.escaped_through == ESCAPE_SIDE]


def simulate_walks(
    geometry: CellGeometry,
    density_cm3: float,
    cross_section_cm2: float,
    excited_lifetime_ns: float = DEFAULT_EXCITED_LIFETIME_NS,
    n_walkers: int = 10_000,
    seed: int = 0,
) -> TrappingStats:
    """Trace n_walkers photons through absorption/re-emission cycles.

    Each photon enters along the axis and is first absorbed at an exponential
    depth; every cycle adds an excited-state dwell, then either quenches or
    re-emits isotropically with an exponential free path. Identical
    (seed, parameters) give identical results bit for bit.
    """
    if n_walkers < 1000:
        raise ValueError(f"need at least 1000 walkers, got {n_walkers}")
    if density_cm3 < 0:
        raise ValueError(f"density must be >= 0, got {density_cm3}")
    if cross_section_cm2 <= 0:
        raise ValueError(f"cross section must be > 0, got {cross_section_cm2}")
    if excited_lifetime_ns <= 0:
        raise ValueError(f"excited lifetime must be > 0, got {excited_lifetime_ns}")

    rng = np.random.default_rng(seed)
    n_scatters = np.zeros(n_walkers, dtype=np.int64)
    residence = np.zeros(n_walkers, dtype=float)
    escape = np.full(n_walkers, TRAVERSED, dtype=np.int64)

    rate = density_cm3 * cross_section_cm2  # inverse mean free path, 1/cm
    if rate == 0.0:
        return TrappingStats(
            n_scatters, residence, escape, geometry,
            density_cm3, cross_section_cm2, excited_lifetime_ns, seed,
        )
    mfp = 1.0 / rate
    length, radius, q = geometry.length_cm, geometry.radius_cm, geometry.quench_prob

    z0 = rng.exponential(mfp, size=n_walkers)
    active = np.nonzero(z0 < length)[0]
    n_scatters[active] = 1
    x = np.zeros(active.size)
    y = np.zeros(active.size)
    z = z0[active]

    while active.size:
        dwell = rng.exponential(excited_lifetime_ns, size=active.size)
        residence[active] += dwell

        if q > 0.0:
            quenched = rng.random(active.size) < q
            escape[active[quenched]] = QUENCHED
            keep = ~quenched
            active, x, y, z = active[keep], x[keep], y[keep], z[keep]
            if not active.size:
                break

        mu = 2.0 * rng.random(active.size) - 1.0
        phi = 2.0 * math.pi * rng.random(active.size)
        sin_theta = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
        ux = sin_theta * np.cos(phi)
        uy = sin_theta * np.sin(phi)
        uz = mu
        step = rng.exponential(mfp, size=active.size)

        nx, ny, nz = x + step * ux, y + step * uy, z + step * uz
        inside = (nx * nx + ny * ny < radius * radius) & (nz > 0.0) & (nz < length)

        out = np.nonzero(~inside)[0]
        if out.size:
            t_side = _side_crossing(x[out], y[out], ux[out], uy[out], radius)
            t_end = _end_crossing(z[out], uz[out], length)
            side = t_side < t_end
            escape[active[out[side]]] = ESCAPE_SIDE
            escape[active[out[~side]]] = ESCAPE_END

        n_scatters[active[inside]] += 1
        active = active[inside]
        x, y, z = nx[inside], ny[inside], nz[inside]

    return TrappingStats(
        n_scatters, residence, escape, geometry,
        density_cm3, cross_section_cm2, excited_lifetime_ns, seed,
    )


def _side_crossing(x, y, ux, uy, radius):
    """Parameter t > 0 where the ray leaves the cylinder of given radius."""
    a = ux * ux + uy * uy
    b = 2.0 * (x * ux + y * uy)
    c = x * x + y * y - radius * radius
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt(np.maximum(0.0, b * b - 4.0 * a * c))
        t = np.where(a > 0.0, (-b + disc) / (2.0 * a), np.inf)
    return t


def _end_crossing(z, uz, length):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(
            uz > 0.0, (length - z) / uz, np.where(uz < 0.0, -z / uz, np.inf)
        )
    return t


def rise_time(stats: TrappingStats, excited_lifetime_ns: float | None = None) -> float:
    """Fluorescence rise-time estimate in ns.

    Time at which the cumulative side-escape fraction reaches 1 - 1/e of its
    asymptote, read off the residence-time distribution of side escapes.
    """
    times = stats.side_escape_times_ns()
    if times.size < 10:
        raise InsufficientStatisticsError(
            f"only {times.size} side escapes; need at least 10"
        )
    return float(np.quantile(times, 1.0 - math.exp(-1.0)))


@dataclass(frozen=True)
class DepolarizationModel:
    """Maps the scattered-photon load to a depolarized ground-state fraction.

    branching: probability that one reabsorbed scattered photon removes an
    atom from the signal channel. pump_ratio: repolarization (optical
    pumping) rate in units of the per-walker depolarizing load; the fraction
    saturates as load / (load + pump_ratio).
    """

    branching: float = 0.5
    pump_ratio: float = 2.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.branching <= 1.0:
            raise ValueError(f"branching must be in [0, 1], got {self.branching}")
        if self.pump_ratio <= 0:
            raise ValueError(f"pump_ratio must be > 0, got {self.pump_ratio}")


def depolarized_fraction(stats: TrappingStats, model: DepolarizationModel) -> float:
    """Fraction of ground-state atoms pumped out of the signal channel."""
    secondary = np.maximum(stats.n_scatters - 1, 0)
    load = model.branching * float(np.mean(secondary))
    return load / (load + model.pump_ratio)


def effective_depth(d: float, p_dep: float) -> float:
    """Optical depth reduced by ground-state depolarization."""
    if not 0.0 <= p_dep <= 1.0:
        raise ValueError(f"p_dep must be in [0, 1], got {p_dep}")
    return (1.0 - p_dep) * d


@dataclass(frozen=True)
class LinewidthProxy:
    """Absorption-line width used as an optical-depth proxy."""

    fwhm: float
    fwhm_grid: float
    thin_line: bool


def absorption_linewidth_proxy(
    d_eff: float, detuning_grid: np.ndarray
) -> LinewidthProxy:
    """Width of the absorption dip 1 - exp(-2 d_eff / (1 + delta^2)).

    Detunings are in half-linewidth (gamma/2) units. For 2 d_eff > ln 2 the
    absorption crosses one half and the width has the closed form
    2 sqrt(2 d_eff / ln 2 - 1), cross-checked against the grid extraction.
    Thinner lines never reach half absorption; those return the grid width at
    half the dip maximum, flagged.
    """
    if d_eff < 0:
        raise ValueError(f"effective depth must be >= 0, got {d_eff}")
    delta = np.sort(np.asarray(detuning_grid, dtype=float))
    if delta.size < 16:
        raise ValueError("detuning grid needs at least 16 points")
    transmission = np.exp(-2.0 * d_eff / (1.0 + delta * delta))
    absorption = 1.0 - transmission

    ln2 = math.log(2.0)
    if 2.0 * d_eff > ln2:
        closed = 2.0 * math.sqrt(2.0 * d_eff / ln2 - 1.0)
        grid = _width_at_level(delta, absorption, 0.5)
        return LinewidthProxy(fwhm=closed, fwhm_grid=grid, thin_line=False)
    peak = float(np.max(absorption))
    if peak <= 0.0:
        return LinewidthProxy(fwhm=0.0, fwhm_grid=0.0, thin_line=True)
    grid = _width_at_level(delta, absorption, 0.5 * peak)
    return LinewidthProxy(fwhm=grid, fwhm_grid=grid, thin_line=True)


def _width_at_level(x: np.ndarray, y: np.ndarray, level: float) -> float:
    above = np.nonzero(y >= level)[0]
    if above.size == 0:
        return 0.0
    lo, hi = int(above[0]), int(above[-1])
    x_lo = x[lo] if lo == 0 else _interp(x[lo - 1], x[lo], y[lo - 1], y[lo], level)
    x_hi = x[hi] if hi == x.size - 1 else _interp(x[hi + 1], x[hi], y[hi + 1], y[hi], level)
    return float(x_hi - x_lo)


def _interp(x0, x1, y0, y1, level):
    if y1 == y0:
        return x1
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
