"""Iterative time-reversal optimization of the input pulse shape.

Store a pulse, retrieve it, time-reverse the retrieved shape back into the
write window, renormalize, repeat. The iteration climbs to the best storage
efficiency the medium supports at the given optical depth and control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .medium import MediumParams
from .propagation import (
    ControlSchedule,
    Envelope,
    GridSpec,
    StorageReport,
    refine_until_converged,
    store_and_retrieve,
)

RETRIEVED_AREA_FLOOR = 1e-12


class OptimizationError(RuntimeError):
    """The iteration cannot proceed (e.g. nothing is retrieved)."""


@dataclass
class OptimizationTrace:
    """Per-iteration efficiencies and the converged pulse pair.

    final_input is the iterate that produced etas[-1]; final_report is the
    full photon ledger of that same run.
    """

    etas: list[float]
    converged: bool
    iterations: int
    final_input: Envelope
    final_retrieved: Envelope
    grid: GridSpec
    final_report: StorageReport | None = None
    storable: bool = True


def default_write_window(d: float, omega_c: float) -> float:
    """Write-window length that comfortably holds the optimal pulse."""
    return (1.6 * d + 40.0) / omega_c**2


def storage_schedule(
    medium: MediumParams,
    omega_c: float,
    tau: float,
    window: float | None = None,
    omega_read: float | None = None,
    ramp: float = 0.5,
) -> ControlSchedule:
    """Write/store/read schedule sized for the medium's optimal pulse."""
    if omega_c <= 0:
        raise ValueError(f"control Rabi frequency must be > 0, got {omega_c}")
    w = window if window is not None else default_write_window(medium.d, omega_c)
    return ControlSchedule.write_store_read(
        omega_c, t_off=w, tau=tau, omega_read=omega_read, ramp=ramp
    )


def gaussian_seed(control: ControlSchedule, n_points: int = 513) -> Envelope:
    """Unit-area Gaussian centered late in the write window."""
    interval = control.storage_interval()
    if interval is None:
        raise ValueError("schedule has no storage interval")
    w0, w1 = control.t_start, interval[0]
    t = np.linspace(w0, w1, n_points)
    width = w1 - w0
    return Envelope.gaussian(t, center=w0 + 0.55 * width, fwhm=0.3 * width).normalized()


def square_seed(control: ControlSchedule, n_points: int = 513) -> Envelope:
    interval = control.storage_interval()
    if interval is None:
        raise ValueError("schedule has no storage interval")
    w0, w1 = control.t_start, interval[0]
    t = np.linspace(w0, w1, n_points)
    width = w1 - w0
    return Envelope.square(t, w0 + 0.3 * width, w0 + 0.9 * width).normalized()


def optimize_pulse(
    medium: MediumParams,
    control: ControlSchedule,
    seed: Envelope,
    max_iter: int = 50,
    tol: float = 1e-4,
    grid: GridSpec | None = None,
    grid_tol: float = 1e-3,
    reversal_points: int = 1025,
) -> OptimizationTrace:
    """Iterate input <- time-reversed retrieved output until eta converges.

    Each iterate is renormalized to unit intensity area, so the efficiency
    trace is directly comparable across iterations.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    interval = control.storage_interval()
    if interval is None:
        raise ValueError("control schedule must contain write, storage, and read phases")
    t_off, _ = interval
    if seed.intensity_area() <= 0:
        raise ValueError("seed envelope has zero area")
    if seed.t[0] < control.t_start - 1e-9 or seed.t[-1] > t_off + 1e-9:
        raise ValueError("seed must live inside the write window")

    current = seed.normalized()
    if grid is None:
        grid = refine_until_converged(current, control, medium, grid_tol)

    w0 = control.t_start
    t_end = control.t_end
    t_write = np.linspace(w0, t_off, reversal_points)

    etas: list[float] = []
    converged = False
    evaluated = current
    report = None
    for _ in range(max_iter):
        evaluated = current
        report = store_and_retrieve(current, control, medium, grid)
        etas.append(report.eta_total)
        area = report.retrieved.intensity_area()
        if area < RETRIEVED_AREA_FLOOR:
            if medium.d == 0.0:
                return OptimizationTrace(
                    etas=etas,
                    converged=False,
                    iterations=len(etas),
                    final_input=evaluated,
                    final_retrieved=report.retrieved,
                    grid=grid,
                    final_report=report,
                    storable=False,
                )
            raise OptimizationError(
                "nothing was retrieved; increase the optical depth or use a "
                "longer pulse"
            )
        if len(etas) >= 2 and abs(etas[-1] - etas[-2]) < tol:
            converged = True
            break
        flipped = report.retrieved.sample(t_end - (t_write - w0))
        current = Envelope(t_write, flipped).normalized()

    return OptimizationTrace(
        etas=etas,
        converged=converged,
        iterations=len(etas),
        final_input=evaluated,
        final_retrieved=report.retrieved,
        grid=grid,
        final_report=report,
    )


@dataclass(frozen=True)
class PulseWidth:
    duration: float
    equivalent_width_used: bool


def optimal_pulse_duration(trace: OptimizationTrace) -> PulseWidth:
    """Intensity-FWHM duration of the converged input pulse.

    Non-unimodal pulses fall back to the equivalent width (area over peak),
    flagged via equivalent_width_used.
    """
    if not trace.converged:
        raise ValueError("trace has not converged")
    env = trace.final_input
    if env.is_unimodal():
        return PulseWidth(duration=env.intensity_fwhm(), equivalent_width_used=False)
    return PulseWidth(duration=env.equivalent_width(), equivalent_width_used=True)


@dataclass(frozen=True)
class DepthPoint:
    d: float
    eta_opt: float
    t_opt: float
    delta_t_abs: float
    iterations: int


def efficiency_vs_depth(
    d_list: list[float],
    omega_c: float,
    gamma_s: float | list[float] = 0.0,
    tau: float = 25.0,
    max_iter: int = 50,
    tol: float = 1e-4,
    ramp: float = 0.5,
) -> list[DepthPoint]:
    """Optimized storage efficiency across an optical-depth ladder.

    gamma_s may be a single rate or one per depth (for density-dependent
    decoherence scans). delta_t_abs is the slow-limit delay d/|Omega_c|^2.
    """
    ds = [float(d) for d in d_list]
    if not ds or any(d <= 0 for d in ds) or any(b <= a for a, b in zip(ds, ds[1:])):
        raise ValueError("d_list must be positive and strictly ascending")
    if isinstance(gamma_s, (int, float)):
        gs_list = [float(gamma_s)] * len(ds)
    else:
        gs_list = [float(g) for g in gamma_s]
        if len(gs_list) != len(ds):
            raise ValueError("gamma_s list must match d_list length")

    points = []
    for d, gs in zip(ds, gs_list):
        medium = MediumParams(d=d, gamma_s=gs)
        control = storage_schedule(medium, omega_c, tau=tau, ramp=ramp)
        seed = gaussian_seed(control)
        trace = optimize_pulse(medium, control, seed, max_iter=max_iter, tol=tol)
        width = optimal_pulse_duration(trace)
        points.append(
            DepthPoint(
                d=d,
                eta_opt=trace.etas[-1],
                t_opt=width.duration,
                delta_t_abs=d / omega_c**2,
                iterations=trace.iterations,
            )
        )
    return points


def iteration_trace_rows(trace: OptimizationTrace) -> list[tuple[int, float]]:
    """(iteration, eta) pairs for CSV emission."""
    return [(i, eta) for i, eta in enumerate(trace.etas)]
