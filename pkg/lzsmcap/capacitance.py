"""
Parametric capacitance of the driven double quantum dot, its sinusoidal reduction,
the gate-voltage period and the conversion to a resonator phase response.

Capacitances are returned in farads.
"""
import logging
import math

import numpy as np

from lzsmcap.commons import like_input
from lzsmcap.dynamics import (
    dephasing_factor,
    first_passage_time,
    reservoir_phase,
    reservoir_prob,
    zeta,
)
from lzsmcap.errors import DegenerateInputError, DomainError, InvalidArgumentError
from lzsmcap.specfun import airy
from lzsmcap.structures import (
    Branch,
    CircuitParams,
    ModelParams,
    RateParams,
    RelaxationParams,
    Trace,
)
from lzsmcap.units import ELEMENTARY_CHARGE, HBAR, UEV_PER_EV, detuning_from_voltage

logger = logging.getLogger(__name__)

RESONATOR_INDUCTANCE = 390e-9
_ENVELOPE_PHASES = np.linspace(0.0, math.pi / 2, 1441)


def geometric_capacitance(c: CircuitParams):
    """
    C_G2 · C_G2/(C_G2 + C_D).

    The circuit relation gives the dimensionless ratio C_G2/(C_G2 + C_D); it is scaled by
    C_G2 here so that the result is a capacitance.
    """
    return c.c_g2 * c.c_g2 / (c.c_g2 + c.c_d)


def gamma_factor(eps0, rate: RateParams, rel: RelaxationParams):
    """
    γ = T₁ πζ²Δ²/(ħ²ω) · exp(-t₁/T₂)
    """
    z = zeta(rate.amplitude, rate.omega)
    scale = rel.t1 * math.pi * z ** 2 * rate.delta ** 2 / (HBAR ** 2 * rate.omega)
    return like_input(eps0, scale * dephasing_factor(eps0, rate))


def capacitance_prefactor(params: ModelParams):
    """
    2e²α₋α₊ζ/ħω in farads
    """
    z = zeta(params.amplitude, params.omega)
    hbar_omega_volts = params.hbar_omega / UEV_PER_EV
    return 2.0 * ELEMENTARY_CHARGE * params.alpha_minus * params.alpha_plus * z / hbar_omega_volts


def _branch_detuning(eps0, params: ModelParams):
    eps0 = np.asarray(eps0, dtype=float)
    if params.branch is Branch.RESERVOIR_00_10:
        return -eps0
    return eps0


class CapacitanceTerms:
    """
    The parts of C_pm that do not depend on T₁, T₂, T_R or Δ: Ai(u), Ai'(u), the time
    between passages and the drive phase past the reservoir crossing.
    """

    __slots__ = ("ai", "aip", "passage_time", "reservoir_phase")

    def __init__(self, ai, aip, passage_time, reservoir_phase):
        self.ai = ai
        self.aip = aip
        self.passage_time = passage_time
        self.reservoir_phase = reservoir_phase


def capacitance_terms(eps0, params: ModelParams) -> CapacitanceTerms:
    """
    Evaluate the timescale-free terms of C_pm at ε₀ for the frequency, amplitude,
    reservoir crossing and branch of ``params``.

    Raises:
        DomainError: if the drive does not reach the reservoir crossing at some ε₀
    """
    eps = _branch_detuning(eps0, params)
    z = zeta(params.amplitude, params.omega)
    u = z * (eps - params.amplitude) / params.hbar_omega
    ai, aip = (np.asarray(v) for v in airy(u))
    return CapacitanceTerms(
        ai=ai,
        aip=aip,
        passage_time=np.asarray(first_passage_time(eps, params.amplitude, params.omega)),
        reservoir_phase=np.asarray(reservoir_phase(eps, params.reservoir(), params.amplitude)),
    )


def capacitance_from_terms(terms: CapacitanceTerms, params: ModelParams):
    """
    C_pm in farads from precomputed terms and the timescales and coupling of ``params``
    """
    z = zeta(params.amplitude, params.omega)
    scale = params.t1 * math.pi * z ** 2 * params.delta ** 2 / (HBAR ** 2 * params.omega)
    gamma = scale * np.exp(-terms.passage_time / params.t2)
    p_r = -np.expm1(-terms.reservoir_phase / (params.t_r * params.omega))
    ai = terms.ai
    kernel = gamma * terms.aip * ai / (1.0 + gamma * ai ** 2) ** 2
    return capacitance_prefactor(params) * p_r * kernel


def parametric_capacitance(eps0, params: ModelParams):
    """
    C_pm(ε₀) = (2e²α₋α₊ζ/ħω) · P_R · γ Ai'(u) Ai(u)/(1 + γ Ai²(u))², u = ζ(ε₀ - A)/ħω.

    The (00)-(10) branch is the mirror image of the (01)-(11) branch about ε₀ = 0.

    Arguments:
        eps0: detuning offset(s) in µeV
        params(ModelParams): the full parameter bundle

    Returns:
        C_pm in farads, same shape as eps0

    Raises:
        DomainError: if the drive does not reach the reservoir crossing at some ε₀
    """
    return like_input(eps0, capacitance_from_terms(capacitance_terms(eps0, params), params))


def envelope_amplitude(eps0, params: ModelParams):
    """
    C_pm⁰(ε₀), the local oscillation amplitude of C_pm below the drive amplitude.

    Uses the large-|u| forms Ai ≈ |u|^{-1/4}/√π cos θ and Ai' ≈ |u|^{1/4}/√π sin θ and takes
    the maximum of γ Ai Ai'/(1 + γ Ai²)² over the fringe phase θ. NaN where ε₀ ≥ A.
    """
    eps = _branch_detuning(eps0, params)
    z = zeta(params.amplitude, params.omega)
    u = np.atleast_1d(z * (eps - params.amplitude) / params.hbar_omega)
    below = u < 0
    magnitude = np.where(below, -u, 1.0)
    a = magnitude ** -0.25 / math.sqrt(math.pi)
    b = magnitude ** 0.25 / math.sqrt(math.pi)
    gamma = np.atleast_1d(gamma_factor(eps, params.rate_params(), params.relaxation()))
    cos = np.cos(_ENVELOPE_PHASES)[None, :]
    sin = np.sin(_ENVELOPE_PHASES)[None, :]
    ga2 = (gamma * a * a)[:, None]
    kernel = (gamma * a * b)[:, None] * sin * cos / (1.0 + ga2 * cos ** 2) ** 2
    peak = kernel.max(axis=1)
    p_r = np.atleast_1d(
        reservoir_prob(eps, params.reservoir(), params.amplitude, params.omega)
    )
    amplitude = np.where(below, capacitance_prefactor(params) * p_r * peak, np.nan)
    return like_input(eps0, amplitude.reshape(np.shape(eps0)))


def voltage_period(omega, alpha_minus):
    """
    δV_TG = πħω/(2√2 e α₋), in volts
    """
    if alpha_minus < 0:
        raise InvalidArgumentError("alpha_minus: Got {}; Expected a positive value".format(alpha_minus))
    return math.pi * HBAR * omega / UEV_PER_EV / (2.0 * math.sqrt(2.0) * alpha_minus)


def capacitance_sinusoid(v_tg, params: ModelParams, v_ref=None):
    """
    C_pm ≈ C_pm⁰(ε₀) · cos[2π(V_TG - V_ref)/δV_TG].

    Arguments:
        v_tg: gate voltage(s) in V, inside the oscillatory window 0 ≤ ε₀ < A
        params(ModelParams): parameter bundle; the envelope uses its timescales
        v_ref: voltage of a maximum; defaults to the anticrossing voltage
    """
    v_ref = params.vtg0 if v_ref is None else v_ref
    eps0 = detuning_from_voltage(v_tg, params.alpha_minus, params.vtg0)
    eps = _branch_detuning(eps0, params)
    if np.any(eps >= params.amplitude):
        raise DomainError(
            "v_tg: the sinusoidal form holds only below the drive amplitude "
            "(eps0 < A = {} ueV)".format(params.amplitude)
        )
    period = voltage_period(params.omega, params.alpha_minus)
    phase = 2.0 * math.pi * (np.asarray(v_tg, dtype=float) - v_ref) / period
    return like_input(v_tg, np.asarray(envelope_amplitude(eps0, params)) * np.cos(phase))


def phase_shift(c_pm, c: CircuitParams):
    """
    ΔΦ = -2Q·C_pm/C_p, in radians
    """
    return like_input(c_pm, -2.0 * c.q_factor * np.asarray(c_pm, dtype=float) / c.c_p)


def differential_capacitance(eps0, params: ModelParams):
    """
    C_diff = C_geom + C_pm
    """
    return geometric_capacitance(params.circuit()) + parametric_capacitance(eps0, params)


def resonator_frequency(capacitance, inductance=RESONATOR_INDUCTANCE):
    """
    ω_r = 1/√(LC), in rad/s
    """
    return 1.0 / np.sqrt(inductance * np.asarray(capacitance, dtype=float))


def resonator_frequency_shift(c_pm, c: CircuitParams, inductance=RESONATOR_INDUCTANCE):
    """
    ω_r(C_p + C_pm) - ω_r(C_p), in rad/s
    """
    shifted = resonator_frequency(c.c_p + np.asarray(c_pm, dtype=float), inductance)
    return like_input(c_pm, shifted - resonator_frequency(c.c_p, inductance))


def normalize_trace(t: Trace) -> Trace:
    """
    Divide a trace by its largest absolute value. Gaps stay NaN.
    """
    if len(t) == 0:
        raise DegenerateInputError("cannot normalize an empty trace")
    with np.errstate(invalid="ignore"):
        scale = np.nanmax(np.abs(t.values)) if not np.all(t.gaps) else 0.0
    if not scale > 0:
        raise DegenerateInputError("cannot normalize a trace whose values are all zero")
    return t.with_values(t.values / scale, normalized=True)
