"""
Parametric capacitance of a strongly driven, reservoir-coupled double quantum dot in the
double-passage Landau-Zener-Stückelberg-Majorana regime, and recovery of its relaxation,
coherence and reservoir times from measured traces.
"""
from lzsmcap.errors import (
    LzsmError,
    InvalidArgumentError,
    DomainError,
    DegenerateInputError,
    InsufficientDataError,
    NumericRangeError,
    ResourceError,
    ConfigError,
    TraceFormatError,
    Diagnostic,
)
from lzsmcap.structures import (
    Axis,
    Branch,
    CircuitParams,
    EnvelopeResult,
    FitResult,
    GateCouplings,
    ModelParams,
    OccupationState,
    OdeResult,
    PeriodLaw,
    RateParams,
    RelaxationParams,
    ReservoirParams,
    SpectrumPeak,
    SweepSpec,
    Trace,
)
from lzsmcap.units import (
    HBAR,
    ELEMENTARY_CHARGE,
    hbar,
    detuning_from_voltage,
    voltage_from_detuning,
)
from lzsmcap.specfun import bessel_j, bessel_j_orders, airy, airy_ai, airy_ai_prime
from lzsmcap.dynamics import (
    zeta,
    first_passage_time,
    lzsm_rate_airy,
    lzsm_rate_bessel_sum,
    lzsm_rate_derivative,
    stationary_pg,
    reservoir_prob,
    p11,
    dp11_deps_full,
    dp11_deps_approx,
)
from lzsmcap.capacitance import (
    geometric_capacitance,
    gamma_factor,
    capacitance_terms,
    capacitance_from_terms,
    parametric_capacitance,
    voltage_period,
    capacitance_sinusoid,
    phase_shift,
    normalize_trace,
)
from lzsmcap.sweep import simulate_trace, simulate_on_axis, mirror_branch, frequency_grid
from lzsmcap.analysis import (
    fourier_peak,
    chirp_free_trace,
    period_law,
    envelope,
    peak_to_peak_vs_frequency,
    fit_parameters,
    fit_peak_to_peak,
)
from lzsmcap.oracle import (
    integrate_rate_equation,
    analytic_rate_solution,
    numeric_rate_integral,
    windowed_rate_integrals,
    finite_difference,
)
from lzsmcap.serialization import (
    load_config,
    parse_config,
    read_trace_csv,
    write_trace_csv,
)
