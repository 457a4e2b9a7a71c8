"""Closed-form EIT scaling laws and the steady-state transmission profile."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .medium import DEFAULT_C_DIM, MediumParams


def eit_bandwidth(omega_c: float, medium: MediumParams) -> float:
    """Transparency-window width |Omega_c|^2 / sqrt(d), in gamma units."""
    if medium.d <= 0:
        raise ValueError("EIT bandwidth diverges at zero optical depth")
    if omega_c <= 0:
        raise ValueError(f"control Rabi frequency must be > 0, got {omega_c}")
    return omega_c**2 / math.sqrt(medium.d)


def coupling_strength(medium: MediumParams, c_dim: float = DEFAULT_C_DIM) -> float:
    """Collective coupling g^2 N in gamma^2 units, recovered from d with L = 1."""
    return medium.d * c_dim


def group_velocity(
    omega_c: float, medium: MediumParams, c_dim: float = DEFAULT_C_DIM
) -> float:
    """Signal group velocity as a fraction of c."""
    if omega_c <= 0:
        raise ValueError(f"control Rabi frequency must be > 0, got {omega_c}")
    return 1.0 / (1.0 + coupling_strength(medium, c_dim) / omega_c**2)


def group_velocity_slow_limit(
    omega_c: float, medium: MediumParams, c_dim: float = DEFAULT_C_DIM
) -> float:
    """Slow-light approximation v_g/c = |Omega_c|^2 / g^2 N."""
    if omega_c <= 0:
        raise ValueError(f"control Rabi frequency must be > 0, got {omega_c}")
    g2n = coupling_strength(medium, c_dim)
    if g2n <= 0:
        raise ValueError("slow-limit form requires d > 0")
    return omega_c**2 / g2n


def absolute_delay(
    medium: MediumParams, omega_c: float, c_dim: float = DEFAULT_C_DIM
) -> float:
    """Pulse delay L / v_g in 1/gamma units: vacuum transit plus d/|Omega_c|^2."""
    vg = group_velocity(omega_c, medium, c_dim)
    return 1.0 / (vg * c_dim)


def slow_light_delay(medium: MediumParams, omega_c: float) -> float:
    """Slow-limit delay d / |Omega_c|^2, the c -> infinity form of the delay."""
    if omega_c <= 0:
        raise ValueError(f"control Rabi frequency must be > 0, got {omega_c}")
    return medium.d / omega_c**2


def _re_inverse_denominator(
    delta: np.ndarray, omega_c: float, medium: MediumParams
) -> np.ndarray:
    """Re[1/D] for D = (1 + i*Delta - i*delta) + Omega^2/(gamma_s - i*delta).

    Written with the spin term cleared so the gamma_s = 0, delta = 0 dark
    point evaluates to 0 instead of 0/0.
    """
    dd = np.asarray(delta, dtype=float)
    gs_minus = medium.gamma_s - 1j * dd
    cleared = (1.0 + 1j * medium.delta_1 - 1j * dd) * gs_minus + omega_c**2
    return np.real(gs_minus / cleared)


@dataclass
class TransmissionProfile:
    """EIT transmission scan with its fitted linewidth."""

    delta: np.ndarray
    transmission: np.ndarray
    fwhm: float
    fit_ok: bool
    unimodal: bool
    fit_params: tuple[float, float, float, float] | None


def eit_transmission_profile(
    medium: MediumParams, omega_c: float, delta_grid: np.ndarray
) -> TransmissionProfile:
    """Intensity transmission vs two-photon detuning, FWHM by Lorentzian fit.

    The profile is exp(-2 d Re[1/D(delta)]) with D the steady-state response
    of the propagation equations; on the bare two-level resonance this reduces
    to the package's exp(-2d) absorption convention.
    """
    if omega_c <= 0:
        raise ValueError(f"control Rabi frequency must be > 0, got {omega_c}")
    delta = np.asarray(delta_grid, dtype=float)
    if delta.ndim != 1 or delta.size < 9:
        raise ValueError("detuning grid must be 1-D with at least 9 points")
    atol = 1e-9 * max(1.0, float(np.max(np.abs(delta))))
    if not np.allclose(np.sort(delta), np.sort(-delta), rtol=0, atol=atol):
        raise ValueError("detuning grid must be symmetric about zero")

    transmission = np.exp(-2.0 * medium.d * _re_inverse_denominator(delta, omega_c, medium))

    order = np.argsort(delta)
    x = delta[order]
    y = transmission[order]
    unimodal = _is_unimodal(y)
    fwhm, params, fit_ok = _lorentzian_fwhm(x, y)
    if not unimodal:
        fit_ok = False
    return TransmissionProfile(
        delta=x,
        transmission=y,
        fwhm=fwhm,
        fit_ok=fit_ok,
        unimodal=unimodal,
        fit_params=params,
    )


def _is_unimodal(y: np.ndarray, rel_tol: float = 1e-9) -> bool:
    """Rises to a single peak then falls, up to a small relative tolerance."""
    peak = int(np.argmax(y))
    tol = rel_tol * float(np.max(y))
    rising = np.all(np.diff(y[: peak + 1]) >= -tol)
    falling = np.all(np.diff(y[peak:]) <= tol)
    return bool(rising and falling)


def _lorentzian(x, base, amp, center, width):
    hw = width / 2.0
    return base + amp * hw**2 / ((x - center) ** 2 + hw**2)


def _half_crossing_width(x: np.ndarray, y: np.ndarray) -> float:
    """Interpolated full width at half of (max - min), for fit seeding."""
    base = float(np.min(y))
    peak = float(np.max(y))
    if peak <= base:
        return float(x[-1] - x[0])
    half = base + 0.5 * (peak - base)
    above = y >= half
    idx = np.nonzero(above)[0]
    if idx.size == 0:
        return float(x[-1] - x[0])
    lo, hi = idx[0], idx[-1]
    x_lo = x[lo] if lo == 0 else _interp_crossing(x[lo - 1], x[lo], y[lo - 1], y[lo], half)
    x_hi = x[hi] if hi == y.size - 1 else _interp_crossing(x[hi + 1], x[hi], y[hi + 1], y[hi], half)
    return float(x_hi - x_lo)


def _interp_crossing(x0, x1, y0, y1, level):
    if y1 == y0:
        return x1
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def _lorentzian_fwhm(x: np.ndarray, y: np.ndarray):
    """Least-squares Lorentzian fit; returns (fwhm, params, ok)."""
    w0 = max(_half_crossing_width(x, y), float(x[1] - x[0]))
    p0 = [float(np.min(y)), float(np.max(y) - np.min(y)), float(x[np.argmax(y)]), w0]
    try:
        popt, _ = curve_fit(
            _lorentzian,
            x,
            y,
            p0=p0,
            bounds=([-0.5, 0.0, float(x[0]), 0.0], [1.5, 2.0, float(x[-1]), 4.0 * (x[-1] - x[0])]),
            maxfev=20000,
        )
    except (RuntimeError, ValueError):
        return float("nan"), None, False
    base, amp, center, width = (float(v) for v in popt)
    if not math.isfinite(width) or width <= 0 or amp <= 0:
        return float("nan"), None, False
    return width, (base, amp, center, width), True


def recommended_scan_grid(
    medium: MediumParams, omega_c: float, n_points: int = 241
) -> np.ndarray:
    """Symmetric detuning grid spanning the expected transparency window.

    The span is capped below the Autler-Townes sidebands at |delta| ~ Omega
    so the scanned peak stays unimodal.
    """
    if n_points % 2 == 0:
        n_points += 1
    width = eit_bandwidth(omega_c, medium)
    span = min(3.5 * width, 0.95 * omega_c)
    return np.linspace(-span, span, n_points)
