"""Numerical laboratory for EIT slow and stored light in a lambda medium."""

from .medium import (
    DEFAULT_C_DIM,
    DEFAULT_GAMMA_PHYS_PER_S,
    DepthCalibration,
    MediumParams,
    PhysicalCell,
    UnitSystem,
    control_rabi_mhz,
    optical_depth,
)
from .eit import (
    TransmissionProfile,
    absolute_delay,
    eit_bandwidth,
    eit_transmission_profile,
    group_velocity,
    group_velocity_slow_limit,
    recommended_scan_grid,
    slow_light_delay,
)
from .propagation import (
    ControlSchedule,
    ControlSegment,
    Envelope,
    GridSpec,
    IntegrationError,
    SimState,
    StorageReport,
    efficiency,
    evolve,
    refine_until_converged,
    store_and_retrieve,
    suggest_grid,
)
from .optimizer import (
    DepthPoint,
    OptimizationError,
    OptimizationTrace,
    PulseWidth,
    efficiency_vs_depth,
    gaussian_seed,
    optimal_pulse_duration,
    optimize_pulse,
    square_seed,
    storage_schedule,
)
from .decoherence import (
    DecoherenceModel,
    SlowLightPrediction,
    coherence_lifetime,
    gamma_s_from_lifetime,
    intensity_lifetime_us,
    slow_light_prediction,
)
from .trapping import (
    CellGeometry,
    DepolarizationModel,
    InsufficientStatisticsError,
    LinewidthProxy,
    TrappingStats,
    absorption_linewidth_proxy,
    depolarized_fraction,
    effective_depth,
    rise_time,
    simulate_walks,
)
from .config import (
    ConfigError,
    ScenarioConfig,
    load_config,
    reference_config,
    validate_config_text,
)

__version__ = "0.1.0"
