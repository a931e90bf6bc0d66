"""
Strictly defined parameter bundles and result containers.
All invariants are checked when an instance is created.
"""
import enum
import logging
import math

import numpy as np
from typedpy import (
    Array,
    Boolean,
    Enum,
    Float,
    ImmutableStructure,
    Integer,
    Map,
    String,
    Structure,
)

from lzsmcap.fields import (
    AngularFrequency,
    Capacitance,
    Duration,
    Energy,
    FiniteFloat,
    Fraction,
    NonNegativeEnergy,
    NumpyArray,
    PositiveFiniteFloat,
    Probability,
    Voltage,
)
from lzsmcap.units import HBAR, detuning_from_voltage

logger = logging.getLogger(__name__)

REFERENCE_OMEGA = 2 * math.pi * 11.0


class Branch(enum.Enum):
    """
    Which reservoir exchange closes the drive cycle. The two are mirror images about ε = 0.
    """

    RESERVOIR_01_11 = "01-11"
    RESERVOIR_00_10 = "00-10"


class Axis(enum.Enum):
    DETUNING_REDUCED = "detuning-reduced"
    DETUNING_ABSOLUTE = "detuning-absolute"
    GATE_VOLTAGE = "gate-voltage"


class GateCouplings(ImmutableStructure):
    """
    QD-gate lever arms. α± = (α₂ ± α₁)/2.
    """

    alpha1: Fraction
    alpha2: Fraction

    @property
    def alpha_plus(self):
        return (self.alpha2 + self.alpha1) / 2

    @property
    def alpha_minus(self):
        return (self.alpha2 - self.alpha1) / 2

    def __validate__(self):
        if self.alpha2 <= self.alpha1:
            raise ValueError(
                "alpha2: Got {}; Expected a value larger than alpha1 = {}".format(
                    self.alpha2, self.alpha1
                )
            )
        if self.alpha_minus >= 0.5 * self.alpha_plus:
            logger.warning(
                "alpha_minus = %g is not small compared to alpha_plus = %g; "
                "the P01 - P10 term of the capacitance is no longer negligible",
                self.alpha_minus,
                self.alpha_plus,
            )


class CircuitParams(ImmutableStructure):
    c_g1: Capacitance
    c_g2: Capacitance
    c_m: Capacitance
    c_d: Capacitance
    q_factor: PositiveFiniteFloat
    c_p: Capacitance

    def __validate__(self):
        if self.c_m > 0.1 * min(self.c_g2, self.c_d):
            logger.warning(
                "weak-coupling limit violated: C_m = %g F is not small compared to "
                "C_G2 = %g F and C_D = %g F",
                self.c_m,
                self.c_g2,
                self.c_d,
            )


class RateParams(ImmutableStructure):
    delta: NonNegativeEnergy
    amplitude: PositiveFiniteFloat
    omega: AngularFrequency
    t2: Duration

    @property
    def hbar_omega(self):
        return HBAR * self.omega

    @property
    def photon_number(self):
        """A/ħω, the Bessel argument"""
        return self.amplitude / self.hbar_omega


class ReservoirParams(ImmutableStructure):
    eps_hat: Energy
    t_r: Duration


class RelaxationParams(ImmutableStructure):
    t1: Duration

    @property
    def gamma1(self):
        return 1.0 / self.t1


class OccupationState(ImmutableStructure):
    p_g: Probability
    p_e: Probability

    def __validate__(self):
        if abs(self.p_g + self.p_e - 1.0) > 1e-12:
            raise ValueError(
                "p_e: Got {}; Expected p_g + p_e = 1 with p_g = {}".format(self.p_e, self.p_g)
            )


class ModelParams(ImmutableStructure):
    """
    Every input of the capacitance model in internal units (µeV, ns, V, F).
    Defaults are the values fitted to the measured device, except the tunnel coupling,
    which the measurement does not fix.
    """

    delta: NonNegativeEnergy = 2.0
    alpha1: Fraction = 0.40
    alpha2: Fraction = 0.52
    eps_hat: Energy = 1350.0
    vtg0: Voltage = 0.475
    amplitude: PositiveFiniteFloat = 1350.0
    omega: AngularFrequency = REFERENCE_OMEGA
    t1: Duration = 50.0
    t2: Duration = 0.035
    t_r: Duration = 0.030
    c_g1: Capacitance = 10e-15
    c_g2: Capacitance = 10e-15
    c_m: Capacitance = 0.5e-15
    c_d: Capacitance = 10e-15
    q_factor: PositiveFiniteFloat = 40.0
    c_p: Capacitance = 660e-15
    branch: Enum[Branch] = Branch.RESERVOIR_01_11

    def __validate__(self):
        self.couplings()

    @property
    def alpha_minus(self):
        return (self.alpha2 - self.alpha1) / 2

    @property
    def alpha_plus(self):
        return (self.alpha2 + self.alpha1) / 2

    @property
    def hbar_omega(self):
        return HBAR * self.omega

    def couplings(self) -> GateCouplings:
        return GateCouplings(alpha1=self.alpha1, alpha2=self.alpha2)

    def circuit(self) -> CircuitParams:
        return CircuitParams(
            c_g1=self.c_g1,
            c_g2=self.c_g2,
            c_m=self.c_m,
            c_d=self.c_d,
            q_factor=self.q_factor,
            c_p=self.c_p,
        )

    def rate_params(self) -> RateParams:
        return RateParams(
            delta=self.delta, amplitude=self.amplitude, omega=self.omega, t2=self.t2
        )

    def reservoir(self) -> ReservoirParams:
        return ReservoirParams(eps_hat=self.eps_hat, t_r=self.t_r)

    def relaxation(self) -> RelaxationParams:
        return RelaxationParams(t1=self.t1)

    def with_alpha_minus(self, alpha_minus):
        """
        Keep α₁ and move α₂ so that (α₂ - α₁)/2 equals alpha_minus
        """
        return self.shallow_clone_with_overrides(alpha2=self.alpha1 + 2 * alpha_minus)


class SweepSpec(ImmutableStructure):
    axis: Enum[Axis] = Axis.DETUNING_REDUCED
    start: FiniteFloat = -1.2
    stop: FiniteFloat = 1.5
    n_points: Integer(minimum=2) = 2001
    frequencies = Array(items=AngularFrequency, minItems=1)
    branch: Enum[Branch] = Branch.RESERVOIR_01_11
    _required = ["frequencies"]

    def __validate__(self):
        if self.start >= self.stop:
            raise ValueError(
                "stop: Got {}; Expected a value larger than start = {}".format(self.stop, self.start)
            )

    def grid(self):
        return np.linspace(self.start, self.stop, self.n_points)


class Trace(Structure):
    """
    Ordered samples of the capacitance (or a normalized response) along one axis.
    NaN values mark points where the model is not defined (gaps).
    """

    axis: Enum[Axis]
    x: NumpyArray
    values: NumpyArray
    normalized: Boolean = False
    omega: AngularFrequency
    branch: Enum[Branch] = Branch.RESERVOIR_01_11
    params: ModelParams
    _optional = ["omega", "params"]
    _additionalProperties = False

    def __validate__(self):
        if len(self.x) != len(self.values):
            raise ValueError(
                "values: Expected {} samples to match the axis; Got {}".format(
                    len(self.x), len(self.values)
                )
            )
        if len(self.x) > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("x: Expected a strictly increasing axis")

    @property
    def gaps(self):
        return np.isnan(self.values)

    def __len__(self):
        return len(self.x)

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return False
        return (
            self.axis == other.axis
            and self.normalized == other.normalized
            and self.omega == other.omega
            and self.branch == other.branch
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def __hash__(self):
        return hash((self.axis, self.omega, len(self.x)))

    def with_values(self, values, normalized=None):
        fields = dict(
            axis=self.axis,
            x=self.x,
            values=np.asarray(values, dtype=float),
            normalized=self.normalized if normalized is None else normalized,
            branch=self.branch,
        )
        if self.omega is not None:
            fields["omega"] = self.omega
        if self.params is not None:
            fields["params"] = self.params
        return Trace(**fields)

    def detuning(self):
        """
        The axis expressed as absolute detuning ε₀ in µeV
        """
        if self.axis is Axis.DETUNING_ABSOLUTE:
            return self.x
        if self.params is None:
            raise ValueError("params: Expected a parameter snapshot to convert the {} axis".format(
                self.axis.value))
        if self.axis is Axis.DETUNING_REDUCED:
            return self.x * self.params.amplitude
        return detuning_from_voltage(self.x, self.params.alpha_minus, self.params.vtg0)

    def reduced_detuning(self):
        if self.axis is Axis.DETUNING_REDUCED:
            return self.x
        return self.detuning() / self.params.amplitude


class SpectrumPeak(ImmutableStructure):
    """
    Dominant non-zero frequency of a trace, in cycles per axis unit (cycles/V for a
    gate-voltage trace).
    """

    position: PositiveFiniteFloat
    magnitude: Float(minimum=0)
    uncertainty: Float(minimum=0)
    dc_dominated: Boolean = False

    @property
    def period(self):
        return 1.0 / self.position


class PeriodLaw(ImmutableStructure):
    """
    Line through the origin δV = slope·ω fitted to voltage periods, and the gate-coupling
    difference it implies.
    """

    slope: PositiveFiniteFloat
    r_squared: Float
    alpha_minus: PositiveFiniteFloat


class EnvelopeResult(Structure):
    x: NumpyArray
    upper: NumpyArray
    lower: NumpyArray
    t2: Duration
    t_r: Duration
    residual: Float
    _optional = ["t2", "t_r", "residual"]

    def __validate__(self):
        if not np.all(self.upper >= self.lower):
            raise ValueError("upper: Expected the upper envelope to be above the lower one")

    @property
    def amplitude(self):
        return (self.upper - self.lower) / 2


class FitResult(Structure):
    params: ModelParams
    free = Array[String]
    values = Map[String, Float]
    uncertainties = Map[String, Float]
    residual_norm: Float
    converged: Boolean
    iterations: Integer
    objective_history = Array[Float]
    warnings = Array[String]


class OdeResult(Structure):
    t: NumpyArray
    p_g: NumpyArray
    final: OccupationState

    @property
    def p_e(self):
        return 1.0 - self.p_g
