"""
LZSM transition rates, stationary occupations and the reservoir exchange probability.

Every function accepts a scalar detuning or a numpy array of detunings (µeV) and returns
a float or an array of the same shape. Rates are in 1/ns.
"""
import logging
import math

import numpy as np

from lzsmcap.commons import like_input
from lzsmcap.errors import DegenerateInputError, DomainError, InvalidArgumentError
from lzsmcap.specfun import airy, bessel_j_orders
from lzsmcap.structures import (
    OccupationState,
    RateParams,
    RelaxationParams,
    ReservoirParams,
)
from lzsmcap.units import HBAR

logger = logging.getLogger(__name__)

BESSEL_EXTRA_ORDERS = 40
BESSEL_TAIL_TOLERANCE = 1e-10


def zeta(amplitude, omega):
    """
    ζ = (2ħω/A)^{1/3}
    """
    if amplitude < 0:
        raise InvalidArgumentError("amplitude: Got {}; Expected a positive energy".format(amplitude))
    return (2.0 * HBAR * omega / amplitude) ** (1.0 / 3.0)


def first_passage_time(eps0, amplitude, omega):
    """
    t₁ = 2[π - arcsin(ε₀/A)]/ω, the time spent between the two passages.
    Outside |ε₀| ≤ A the ratio is clamped to ±1.
    """
    ratio = np.asarray(eps0, dtype=float) / amplitude
    if np.any(np.abs(ratio) > 1):
        logger.debug("first passage time clamped outside |eps0| <= A")
    t1 = 2.0 * (math.pi - np.arcsin(np.clip(ratio, -1.0, 1.0))) / omega
    return like_input(eps0, t1)


def first_passage_time_derivative(eps0, amplitude, omega):
    """
    ∂t₁/∂ε₀; zero where t₁ is clamped.
    """
    eps0_arr = np.asarray(eps0, dtype=float)
    inside = np.abs(eps0_arr) < amplitude
    radicand = np.where(inside, amplitude ** 2 - eps0_arr ** 2, 1.0)
    return like_input(eps0, np.where(inside, -2.0 / (omega * np.sqrt(radicand)), 0.0))


def _airy_terms(eps0, p: RateParams):
    z = zeta(p.amplitude, p.omega)
    u = z * (np.asarray(eps0, dtype=float) - p.amplitude) / p.hbar_omega
    ai, aip = airy(u)
    prefactor = math.pi * p.delta ** 2 * z ** 2 / (2.0 * HBAR ** 2 * p.omega)
    return z, u, np.asarray(ai), np.asarray(aip), prefactor


def dephasing_factor(eps0, p: RateParams):
    """exp(-t₁/T₂)"""
    return np.exp(-np.asarray(first_passage_time(eps0, p.amplitude, p.omega)) / p.t2)


def lzsm_rate_airy(eps0, p: RateParams, dephasing=True):
    """
    Large-photon-number LZSM rate
    W = πΔ²ζ²/(2ħ²ω) · Ai²[ζ(ε₀ - A)/ħω] · exp(-t₁/T₂).

    Arguments:
        eps0: detuning offset(s) in µeV
        p(RateParams): Δ, A, ω, T₂
        dephasing(bool): when False, the exp(-t₁/T₂) factor is dropped

    Returns:
        the rate in 1/ns
    """
    if p.photon_number <= 1:
        logger.warning(
            "A/hbar*omega = %g; the Airy form of the rate assumes many photons", p.photon_number
        )
    _, _, ai, _, prefactor = _airy_terms(eps0, p)
    rate = prefactor * ai ** 2
    if dephasing:
        rate = rate * dephasing_factor(eps0, p)
    return like_input(eps0, rate)


def lzsm_rate_derivative(eps0, p: RateParams, dephasing=True):
    """
    ∂W/∂ε₀ of :func:`lzsm_rate_airy`, including the dependence of t₁ on ε₀.
    """
    z, _, ai, aip, prefactor = _airy_terms(eps0, p)
    slope = prefactor * 2.0 * ai * aip * z / p.hbar_omega
    if not dephasing:
        return like_input(eps0, slope)
    decay = dephasing_factor(eps0, p)
    dt1 = np.asarray(first_passage_time_derivative(eps0, p.amplitude, p.omega))
    derivative = decay * (slope - prefactor * ai ** 2 * dt1 / p.t2)
    return like_input(eps0, derivative)


def bessel_sum_orders(p: RateParams):
    """
    Truncation order of the sideband sum: ⌈A/ħω⌉ + 40
    """
    return int(math.ceil(p.photon_number)) + BESSEL_EXTRA_ORDERS


def bessel_tail_bound(z, n_max):
    """
    1 - Σ_{|n| ≤ n_max} J_n²(z), the weight missing from a truncated sideband sum
    """
    j = bessel_j_orders(n_max, z)
    return abs(1.0 - (j[0] ** 2 + 2.0 * np.sum(j[1:] ** 2)))


def lzsm_rate_bessel_sum(eps0, p: RateParams, n_max=None):
    """
    W = (Δ²/2) Σₙ J_n²(A/ħω) · (1/T₂) / [(ε₀ - nħω)² + (ħ/T₂)²]

    A Lorentzian line of half-width ħ/T₂ per photon sideband, summed over |n| ≤ n_max.
    """
    z = p.photon_number
    if n_max is None:
        n_max = bessel_sum_orders(p)
    j = bessel_j_orders(n_max, z)
    tail = abs(1.0 - (j[0] ** 2 + 2.0 * np.sum(j[1:] ** 2)))
    if tail > BESSEL_TAIL_TOLERANCE:
        logger.warning("sideband sum truncated at |n| <= %d misses weight %.3g", n_max, tail)

    orders = np.arange(-n_max, n_max + 1)
    weights = j[np.abs(orders)] ** 2
    width = HBAR / p.t2
    eps0_arr = np.atleast_1d(np.asarray(eps0, dtype=float))
    offsets = eps0_arr[:, None] - orders[None, :] * p.hbar_omega
    lines = (1.0 / p.t2) / (offsets ** 2 + width ** 2)
    rate = p.delta ** 2 / 2.0 * (lines @ weights)
    return like_input(eps0, rate.reshape(np.shape(eps0)))


def _ground_probability(w, gamma1):
    return 1.0 - w / (2.0 * w + gamma1)


def stationary_pg(w, gamma1) -> OccupationState:
    """
    Stationary solution of the two-level rate equation at zero temperature,
    P_g = 1 - W/(2W + Γ₁).
    """
    if w < 0 or gamma1 < 0:
        raise InvalidArgumentError(
            "Expected non-negative rates; Got w = {}, gamma1 = {}".format(w, gamma1)
        )
    if w == 0 and gamma1 == 0:
        raise DegenerateInputError("stationary state undefined for w = gamma1 = 0")
    p_g = float(_ground_probability(w, gamma1))
    return OccupationState(p_g=p_g, p_e=1.0 - p_g)


def reservoir_argument(eps0, r: ReservoirParams, amplitude):
    return (r.eps_hat - np.asarray(eps0, dtype=float)) / amplitude


def reservoir_domain(eps0, r: ReservoirParams, amplitude):
    """
    Mask of the detunings at which the drive reaches the reservoir crossing
    """
    return np.abs(reservoir_argument(eps0, r, amplitude)) <= 1.0


def _check_reservoir_domain(eps0, r, amplitude):
    arg = np.atleast_1d(reservoir_argument(eps0, r, amplitude))
    outside = np.abs(arg) > 1.0
    if np.any(outside):
        offending = np.atleast_1d(np.asarray(eps0, dtype=float))[np.argmax(outside)]
        raise DomainError(
            "eps0: Got {}; the drive never reaches the reservoir crossing at eps_hat = {} "
            "(|(eps_hat - eps0)/A| = {:.6g} > 1)".format(
                offending, r.eps_hat, abs(arg[np.argmax(outside)])
            )
        )


def reservoir_phase(eps0, r: ReservoirParams, amplitude):
    """
    ω·t_R = π - 2 arcsin[(ε̂ - ε₀)/A], the drive phase spent past the reservoir crossing
    """
    _check_reservoir_domain(eps0, r, amplitude)
    return math.pi - 2.0 * np.arcsin(reservoir_argument(eps0, r, amplitude))


def reservoir_prob(eps0, r: ReservoirParams, amplitude, omega):
    """
    P_R = 1 - exp{-[π - 2 arcsin((ε̂ - ε₀)/A)]/(T_R ω)}
    """
    phase = reservoir_phase(eps0, r, amplitude)
    return like_input(eps0, -np.expm1(-phase / (r.t_r * omega)))


def reservoir_prob_derivative(eps0, r: ReservoirParams, amplitude, omega):
    """
    ∂P_R/∂ε₀ = exp(-φ/(T_R ω)) · 2/√(A² - (ε̂ - ε₀)²) / (T_R ω)
    """
    phase = reservoir_phase(eps0, r, amplitude)
    offset = r.eps_hat - np.asarray(eps0, dtype=float)
    with np.errstate(divide="ignore"):
        dphase = 2.0 / np.sqrt(amplitude ** 2 - offset ** 2)
    return like_input(eps0, np.exp(-phase / (r.t_r * omega)) * dphase / (r.t_r * omega))


def p11(eps0, p: RateParams, rel: RelaxationParams, r: ReservoirParams):
    """
    P₁₁ = P_R · (1 - W/(2W + Γ₁)), the probability of the (11) charge state
    """
    w = np.asarray(lzsm_rate_airy(eps0, p))
    p_r = np.asarray(reservoir_prob(eps0, r, p.amplitude, p.omega))
    return like_input(eps0, p_r * _ground_probability(w, rel.gamma1))


def dp11_deps_full(eps0, p: RateParams, rel: RelaxationParams, r: ReservoirParams):
    """
    ∂P₁₁/∂ε₀ with both the reservoir-slope and the rate-slope terms.
    """
    w = np.asarray(lzsm_rate_airy(eps0, p))
    dw = np.asarray(lzsm_rate_derivative(eps0, p))
    p_r = np.asarray(reservoir_prob(eps0, r, p.amplitude, p.omega))
    dp_r = np.asarray(reservoir_prob_derivative(eps0, r, p.amplitude, p.omega))
    gamma1 = rel.gamma1
    result = dp_r * _ground_probability(w, gamma1) - p_r * gamma1 * dw / (2.0 * w + gamma1) ** 2
    return like_input(eps0, result)


def dp11_deps_approx(eps0, p: RateParams, rel: RelaxationParams, r: ReservoirParams):
    """
    -P_R · T₁ · ∂W/(1 + 2WT₁)²; the reservoir-slope term is dropped, which is accurate
    where the drive spends long past the reservoir crossing.
    """
    w = np.asarray(lzsm_rate_airy(eps0, p))
    dw = np.asarray(lzsm_rate_derivative(eps0, p))
    p_r = np.asarray(reservoir_prob(eps0, r, p.amplitude, p.omega))
    return like_input(eps0, -p_r * rel.t1 * dw / (1.0 + 2.0 * w * rel.t1) ** 2)
