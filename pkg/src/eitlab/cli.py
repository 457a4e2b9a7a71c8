"""Command-line harness: scenario execution, sweeps, and CSV/JSON output.

Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 missing
configuration file. All CSV output is RFC 4180 (CRLF line endings) and byte
identical across reruns for a fixed config and seed, independent of --jobs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config, validate_config_text
from .decoherence import intensity_lifetime_us
from .eit import eit_transmission_profile, recommended_scan_grid
from .medium import MediumParams
from .optimizer import (
    gaussian_seed,
    optimal_pulse_duration,
    optimize_pulse,
    storage_schedule,
)
from .propagation import (
    ControlSchedule,
    Envelope,
    evolve,
    refine_until_converged,
    store_and_retrieve,
    suggest_grid,
)
from .trapping import (
    CellGeometry,
    DepolarizationModel,
    InsufficientStatisticsError,
    absorption_linewidth_proxy,
    depolarized_fraction,
    effective_depth,
    rise_time,
    simulate_walks,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_MISSING_FILE = 4

OUTPUT_DIR_ENV = "EITLAB_OUTPUT_DIR"

SWEEP_COLUMNS = [
    "density",
    "d",
    "omega_c",
    "gamma_eit_fwhm",
    "delta_t_abs",
    "t_opt",
    "eta_stored",
    "eta_slow",
    "eta_leakage",
    "tau_coherence",
    "error",
]

RADTRAP_COLUMNS = ["density", "mean_scatters", "rise_time_ns", "p_dep", "fwhm_proxy"]

GEOMETRY_COLUMNS = [
    "cell",
    "length_cm",
    "diameter_cm",
    "quench_prob",
    "density_cm3",
    "d",
    "mean_scatters",
    "mean_residence_ns",
    "p_dep",
    "eta_stored",
]

TRACE_COLUMNS = ["t", "input_intensity", "output_intensity", "control_omega"]


def fmt(value: float | int | str) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.10g}"


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def version_string() -> str:
    here = Path(__file__).resolve().parent
    try:
        described = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if described.returncode == 0 and described.stdout.strip():
            return f"eitlab {__version__} ({described.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"eitlab {__version__}"


def write_json_summary(
    path: Path, command: str, cfg: ScenarioConfig, seed: int, outputs: list[Path],
    extra: dict | None = None,
) -> None:
    config_dict = cfg.as_dict()
    blob = json.dumps(config_dict, sort_keys=True).encode()
    summary = {
        "command": command,
        "version": version_string(),
        "seed": seed,
        "config": config_dict,
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        summary.update(extra)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Sweep


@dataclass(frozen=True)
class SweepPoint:
    density: float
    power_mw: float


def _medium_at(cfg: ScenarioConfig, density: float) -> MediumParams:
    return MediumParams(d=cfg.depth_at(density), gamma_s=cfg.gamma_s_at(density))


def _slow_light_run(
    medium: MediumParams, omega: float, inp: Envelope, ramp: float
) -> tuple[float, float]:
    """(measured peak delay, transmitted efficiency) with the control held on."""
    delay = medium.d / omega**2
    span = float(inp.t[-1]) + delay + 3.0 * max(inp.equivalent_width(), 5.0) + 20.0
    ctrl = ControlSchedule.constant(omega, span, ramp=ramp)
    grid = suggest_grid(medium, ctrl)
    st = evolve(inp, ctrl, medium, grid)
    out = st.output_envelope()
    eta_slow = st.output_area() / inp.intensity_area()
    return out.peak_time() - inp.peak_time(), eta_slow


def sweep_point_row(cfg: ScenarioConfig, point: SweepPoint) -> list:
    density, power = point.density, point.power_mw
    try:
        medium = _medium_at(cfg, density)
        omega = cfg.omega_dim(power)
        units = cfg.units()

        profile = eit_transmission_profile(
            medium, omega, recommended_scan_grid(medium, omega, cfg.eit_points)
        )
        gamma_eit = profile.fwhm if profile.fit_ok else float("nan")

        tau_dim = units.us_to_dimensionless(cfg.storage_time_us)
        control = storage_schedule(medium, omega, tau=tau_dim, ramp=cfg.ramp_time)
        trace = optimize_pulse(
            medium,
            control,
            gaussian_seed(control),
            max_iter=cfg.opt_max_iter,
            tol=cfg.opt_tol,
            grid_tol=cfg.grid_tol,
        )
        width = optimal_pulse_duration(trace) if trace.converged else None
        t_opt = width.duration if width is not None else float("nan")
        delay, eta_slow = _slow_light_run(medium, omega, trace.final_input, cfg.ramp_time)
        tau_coh = intensity_lifetime_us(medium.gamma_s, cfg.gamma_phys_per_s)
        return [
            density,
            medium.d,
            omega,
            gamma_eit,
            delay,
            t_opt,
            trace.etas[-1],
            eta_slow,
            trace.final_report.eta_leakage,
            tau_coh,
            "",
        ]
    except Exception as exc:  # per-point failures land in the errors column
        return [density, "", "", "", "", "", "", "", "", "", f"{type(exc).__name__}: {exc}"]


def sweep_points(cfg: ScenarioConfig) -> list[SweepPoint]:
    """One point per (density, power) pair, in deterministic output order."""
    return [
        SweepPoint(density, power)
        for density in sorted(cfg.densities_cm3)
        for power in sorted(cfg.control_powers_mw)
    ]


def run_sweep(cfg: ScenarioConfig, jobs: int = 1) -> list[list]:
    points = sweep_points(cfg)
    if jobs <= 1:
        rows = [sweep_point_row(cfg, p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda p: sweep_point_row(cfg, p), points))
    return rows


# ---------------------------------------------------------------------------
# Radiation trapping


def _radtrap_row(cfg: ScenarioConfig, density: float, seed: int) -> list:
    geometry = CellGeometry(
        length_cm=cfg.cell_length_cm,
        radius_cm=0.5 * cfg.cell_diameter_cm,
        quench_prob=cfg.mc_quench_prob,
    )
    stats = simulate_walks(
        geometry,
        density,
        cfg.mc_cross_section_cm2,
        excited_lifetime_ns=cfg.mc_excited_lifetime_ns,
        n_walkers=cfg.mc_walkers,
        seed=seed,
    )
    model = DepolarizationModel(cfg.depol_branching, cfg.depol_pump_ratio)
    p_dep = depolarized_fraction(stats, model)
    d_eff = effective_depth(cfg.depth_at(density), p_dep)
    proxy = absorption_linewidth_proxy(d_eff, np.linspace(-80.0, 80.0, 4001))
    try:
        rise = rise_time(stats)
    except InsufficientStatisticsError:
        rise = float("nan")
    return [density, stats.mean_scatters, rise, p_dep, proxy.fwhm]


def run_radtrap(cfg: ScenarioConfig, seed: int) -> list[list]:
    return [
        _radtrap_row(cfg, density, seed + i)
        for i, density in enumerate(sorted(cfg.densities_cm3))
    ]


def run_geometry_compare(cfg: ScenarioConfig, seed: int) -> list[list]:
    """Baseline vs elongated cell at equal longitudinal optical depth."""
    ladder = sorted(cfg.densities_cm3)
    density_base = ladder[len(ladder) // 2]
    d_target = cfg.depth_at(density_base)
    density_alt = density_base * cfg.cell_length_cm / cfg.alt_cell_length_cm
    cells = [
        ("baseline", cfg.cell_length_cm, cfg.cell_diameter_cm, cfg.mc_quench_prob, density_base),
        ("elongated", cfg.alt_cell_length_cm, cfg.alt_cell_diameter_cm, 0.0, density_alt),
        ("elongated_quenched", cfg.alt_cell_length_cm, cfg.alt_cell_diameter_cm,
         cfg.alt_quench_prob, density_alt),
    ]
    model = DepolarizationModel(cfg.depol_branching, cfg.depol_pump_ratio)
    units = cfg.units()
    rows = []
    for i, (label, length, diameter, quench, density) in enumerate(cells):
        stats = simulate_walks(
            CellGeometry(length, 0.5 * diameter, quench),
            density,
            cfg.mc_cross_section_cm2,
            excited_lifetime_ns=cfg.mc_excited_lifetime_ns,
            n_walkers=cfg.mc_walkers,
            seed=seed + i,
        )
        p_dep = depolarized_fraction(stats, model)
        medium = MediumParams(d=d_target, gamma_s=cfg.gamma_s_at(density))
        omega = cfg.omega_dim(cfg.control_powers_mw[0])
        tau_dim = units.us_to_dimensionless(cfg.storage_time_us)
        control = storage_schedule(medium, omega, tau=tau_dim, ramp=cfg.ramp_time)
        trace = optimize_pulse(
            medium,
            control,
            gaussian_seed(control),
            max_iter=cfg.opt_max_iter,
            tol=cfg.opt_tol,
            grid_tol=cfg.grid_tol,
        )
        rows.append([
            label, length, diameter, quench, density, d_target,
            stats.mean_scatters, stats.mean_residence_ns, p_dep, trace.etas[-1],
        ])
    return rows


# ---------------------------------------------------------------------------
# Single-scenario commands


def run_eit_scan(cfg: ScenarioConfig, density: float, power: float):
    medium = _medium_at(cfg, density)
    omega = cfg.omega_dim(power)
    profile = eit_transmission_profile(
        medium, omega, recommended_scan_grid(medium, omega, cfg.eit_points)
    )
    rows = [[d, t] for d, t in zip(profile.delta, profile.transmission)]
    return profile, rows


def _trace_rows(inp: Envelope, out_t: np.ndarray, out_vals: np.ndarray,
                control: ControlSchedule) -> list[list]:
    om = control.omega_at(out_t)
    e_in = np.abs(inp.sample(out_t)) ** 2
    e_out = np.abs(out_vals) ** 2
    return [[t, a, b, o] for t, a, b, o in zip(out_t, e_in, e_out, om)]


def run_slow(cfg: ScenarioConfig, density: float, power: float):
    medium = _medium_at(cfg, density)
    omega = cfg.omega_dim(power)
    delay_est = medium.d / omega**2
    fwhm = max(20.0, 0.6 * delay_est + 8.0 / omega**2)
    center = 1.6 * fwhm
    span = center + delay_est + 3.0 * fwhm + 20.0
    t = np.linspace(0.0, span, 4097)
    inp = Envelope.gaussian(t, center=center, fwhm=fwhm).normalized()
    ctrl = ControlSchedule.constant(omega, span, ramp=cfg.ramp_time)
    st = evolve(inp, ctrl, medium, suggest_grid(medium, ctrl))
    out = st.output_envelope()
    eta = st.output_area() / inp.intensity_area()
    delay = out.peak_time() - inp.peak_time()
    return delay, eta, _trace_rows(inp, st.t, st.output, ctrl), st


def run_store(cfg: ScenarioConfig, density: float, power: float, tau_us: float):
    medium = _medium_at(cfg, density)
    omega = cfg.omega_dim(power)
    tau_dim = cfg.units().us_to_dimensionless(tau_us)
    control = storage_schedule(medium, omega, tau=tau_dim, ramp=cfg.ramp_time)
    inp = gaussian_seed(control)
    grid = refine_until_converged(inp, control, medium, cfg.grid_tol)
    report = store_and_retrieve(inp, control, medium, grid)
    rows = _trace_rows(inp, report.write_output.t, report.write_output.values, control)
    rows += _trace_rows(inp, report.retrieved.t, report.retrieved.values, control)
    return report, rows


def run_optimize(cfg: ScenarioConfig, density: float, power: float, tau_us: float):
    medium = _medium_at(cfg, density)
    omega = cfg.omega_dim(power)
    tau_dim = cfg.units().us_to_dimensionless(tau_us)
    control = storage_schedule(medium, omega, tau=tau_dim, ramp=cfg.ramp_time)
    trace = optimize_pulse(
        medium,
        control,
        gaussian_seed(control),
        max_iter=cfg.opt_max_iter,
        tol=cfg.opt_tol,
        grid_tol=cfg.grid_tol,
    )
    rows = [[i, eta] for i, eta in enumerate(trace.etas)]
    return trace, rows


# ---------------------------------------------------------------------------
# Entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitlab",
        description="EIT slow/stored light simulation harness",
    )
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--config", required=True, help="path to key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=out_default, help="output CSV path")
        p.add_argument("--json", default=None, help="optional JSON run-summary path")

    p = sub.add_parser("validate", help="validate a config file")
    p.add_argument("--config", required=True)

    p = sub.add_parser("eit-scan", help="EIT transmission profile at one point")
    common(p, "eit_scan.csv")
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--power-mw", type=float, default=None)

    p = sub.add_parser("slow", help="slow-light run: delay and transmission")
    common(p, "slow.csv")
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--power-mw", type=float, default=None)
    p.add_argument(
        "--dump-fields",
        default=None,
        help="also write the (xi, t, |E|^2, |P|^2, |S|^2) record to this CSV",
    )

    p = sub.add_parser("store", help="single store-and-retrieve run")
    common(p, "store.csv")
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--power-mw", type=float, default=None)
    p.add_argument("--tau-us", type=float, default=None)

    p = sub.add_parser("optimize", help="iterative pulse-shape optimization")
    common(p, "optimize.csv")
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--power-mw", type=float, default=None)
    p.add_argument("--tau-us", type=float, default=None)

    p = sub.add_parser("sweep", help="full (density x power) sweep")
    common(p, "sweep.csv")
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")

    p = sub.add_parser("radtrap", help="radiation-trapping Monte Carlo ladder")
    common(p, "radtrap.csv")

    p = sub.add_parser("geometry-compare", help="baseline vs elongated cell")
    common(p, "geometry.csv")

    return parser


def _resolve_out(cfg: ScenarioConfig, out: str) -> Path:
    base = os.environ.get(OUTPUT_DIR_ENV, cfg.output_dir)
    path = Path(out)
    if not path.is_absolute():
        path = Path(base) / path
    return path


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "validate":
        path = Path(args.config)
        if not path.is_file():
            print(f"config file not found: {path}", file=sys.stderr)
            return EXIT_MISSING_FILE
        _, violations = validate_config_text(path.read_text(encoding="utf-8"))
        if violations:
            for v in violations:
                print(v, file=sys.stderr)
            return EXIT_CONFIG
        print("ok")
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_MISSING_FILE
    except ConfigError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return EXIT_CONFIG

    seed = cfg.seed if args.seed is None else args.seed
    try:
        return _dispatch(args, cfg, seed)
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _point_args(args: argparse.Namespace, cfg: ScenarioConfig) -> tuple[float, float, float]:
    density = getattr(args, "density", None)
    if density is None:
        if not cfg.densities_cm3:
            raise ValueError("config has an empty density ladder; pass --density")
        density = cfg.densities_cm3[0]
    power = getattr(args, "power_mw", None)
    power = cfg.control_powers_mw[0] if power is None else power
    tau_us = getattr(args, "tau_us", None)
    tau_us = cfg.storage_time_us if tau_us is None else tau_us
    return density, power, tau_us


def _dispatch(args: argparse.Namespace, cfg: ScenarioConfig, seed: int) -> int:
    out_path = _resolve_out(cfg, args.out)

    extra: dict = {}
    if args.command == "eit-scan":
        density, power, _ = _point_args(args, cfg)
        profile, rows = run_eit_scan(cfg, density, power)
        write_csv(out_path, ["delta", "transmission"], rows)
        print(f"fwhm={fmt(profile.fwhm)} fit_ok={profile.fit_ok}")
        extra = {"fwhm": profile.fwhm, "fit_ok": profile.fit_ok}
    elif args.command == "slow":
        density, power, _ = _point_args(args, cfg)
        delay, eta, rows, state = run_slow(cfg, density, power)
        write_csv(out_path, TRACE_COLUMNS, rows)
        if args.dump_fields:
            dump_path = _resolve_out(cfg, args.dump_fields)
            write_csv(
                dump_path,
                ["xi", "t", "E2", "P2", "S2"],
                state.field_dump_rows(),
            )
        print(f"delay={fmt(delay)} eta_slow={fmt(eta)}")
        extra = {"delay": delay, "eta_slow": eta}
    elif args.command == "store":
        density, power, tau_us = _point_args(args, cfg)
        report, rows = run_store(cfg, density, power, tau_us)
        write_csv(out_path, TRACE_COLUMNS, rows)
        print(
            f"eta={fmt(report.eta_total)} leakage={fmt(report.eta_leakage)} "
            f"scatter={fmt(report.eta_scatter)} spin={fmt(report.eta_spin_decay)} "
            f"residual={fmt(report.eta_residual)} ledger={fmt(report.ledger_total())}"
        )
        extra = {"eta": report.eta_total, "ledger": report.ledger_total()}
    elif args.command == "optimize":
        density, power, tau_us = _point_args(args, cfg)
        trace, rows = run_optimize(cfg, density, power, tau_us)
        write_csv(out_path, ["iter", "eta"], rows)
        print(
            f"eta={fmt(trace.etas[-1])} iterations={trace.iterations} "
            f"converged={trace.converged}"
        )
        extra = {"eta": trace.etas[-1], "converged": trace.converged}
    elif args.command == "sweep":
        rows = run_sweep(cfg, jobs=args.jobs)
        write_csv(out_path, SWEEP_COLUMNS, rows)
        print(f"wrote {len(rows)} rows to {out_path}")
    elif args.command == "radtrap":
        rows = run_radtrap(cfg, seed)
        write_csv(out_path, RADTRAP_COLUMNS, rows)
        print(f"wrote {len(rows)} rows to {out_path}")
    elif args.command == "geometry-compare":
        rows = run_geometry_compare(cfg, seed)
        write_csv(out_path, GEOMETRY_COLUMNS, rows)
        print(f"wrote {len(rows)} rows to {out_path}")
    else:  # pragma: no cover - argparse enforces the choice
        raise ValueError(f"unknown command {args.command}")

    if getattr(args, "json", None):
        write_json_summary(
            _resolve_out(cfg, args.json), args.command, cfg, seed, [out_path], extra
        )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
