"""Floquet, Husimi and state-synthesis tools for the delta-kicked trapped ion."""

from .classicmap import (
    ClassicalParams,
    Orbit,
    find_periodic_points,
    inverse_map_step,
    kick_map_step,
    portrait,
    stroboscopic_orbit,
    winding_number,
)
from .errors import (
    ConfigError,
    DecompositionFailure,
    DegeneracyWarning,
    EmptySelection,
    NonRotational,
    NullState,
    TruncationLoss,
)
from .floquet import (
    FloquetDecomposition,
    Ordering,
    TrapParams,
    decompose,
    evolve,
    floquet_decompose,
    free_propagator,
    kick_operator,
    one_period_operator,
)
from .fockcore import (
    PhasePoint,
    alpha_to_phase_point,
    coherent_state,
    displacement_operator,
    fock_state,
    phase_point_to_alpha,
    position_quadrature,
)
from .husimi import PhaseGrid, QField, q_average_finite, q_average_floquet, q_grid, q_value
from .scenarios import ScenarioConfig, load_config, measure_displaced_ground, run_scenario
from .synth import (
    Sign,
    StabilizationSpec,
    SynthesisSpec,
    autocorrelation,
    barrier_passage_state,
    cross_correlation,
    find_doublets,
    floquet_weights,
    fock_truncate,
    spectral_function,
    stabilized_state,
    transport_probability,
)

__version__ = "0.1.0"
