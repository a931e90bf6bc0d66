"""
Brute-force validators for the closed forms: a Runge-Kutta integration of the two-level
rate equation, direct quadrature of the sideband correlation integral, windowed rate
integrals, and centered finite differences.

These deliberately use different numerical machinery from the production modules.
"""
import logging
import math

import numpy as np
import scipy.integrate

from lzsmcap.dynamics import bessel_sum_orders, lzsm_rate_airy, lzsm_rate_bessel_sum, stationary_pg
from lzsmcap.errors import InvalidArgumentError, NumericRangeError, ResourceError
from lzsmcap.specfun import bessel_j_orders
from lzsmcap.structures import OccupationState, OdeResult, RateParams
from lzsmcap.units import HBAR

logger = logging.getLogger(__name__)

MAX_STEPS = 10 ** 8
MIN_STEPS = 1000
STEP_FRACTION = 0.05
MAX_STORED_SAMPLES = 10001
CONSERVATION_TOLERANCE = 1e-12
POINTS_PER_CYCLE = 128
NEGLIGIBLE_WEIGHT = 1e-24


def _rate_equation(p, w, gamma1):
    """(dP_g/dt, dP_e/dt) with the upward rate W and the downward rate W + Γ₁"""
    flow = (w + gamma1) * p[1] - w * p[0]
    return np.array([flow, -flow])


def integrate_rate_equation(w, gamma1, p_g0, t_end, n_steps=None) -> OdeResult:
    """
    Fixed-step fourth-order Runge-Kutta integration of
    dP_g/dt = (W + Γ₁)P_e - W·P_g from P_g(0) = p_g0 to t_end.

    Arguments:
        w: excitation rate (1/ns), w >= 0
        gamma1: relaxation rate (1/ns), gamma1 >= 0
        p_g0: initial ground-state probability
        t_end: final time (ns)
        n_steps: number of steps; by default a twentieth of the relaxation time per step

    Raises:
        ResourceError: if more than 10⁸ steps would be needed
    """
    if w < 0 or gamma1 < 0 or not 0 <= p_g0 <= 1 or t_end <= 0:
        raise InvalidArgumentError(
            "Expected w, gamma1 >= 0, p_g0 in [0, 1] and t_end > 0; Got {}, {}, {}, {}".format(
                w, gamma1, p_g0, t_end
            )
        )
    relaxation_rate = 2.0 * w + gamma1
    if n_steps is None:
        n_steps = max(MIN_STEPS, int(math.ceil(t_end * relaxation_rate / STEP_FRACTION)))
    if n_steps > MAX_STEPS:
        raise ResourceError("integration needs {} steps; the limit is {}".format(n_steps, MAX_STEPS))
    dt = t_end / n_steps
    stride = max(1, int(math.ceil(n_steps / (MAX_STORED_SAMPLES - 1))))

    p = np.array([p_g0, 1.0 - p_g0])
    times, trajectory = [0.0], [p[0]]
    for i in range(1, n_steps + 1):
        k1 = _rate_equation(p, w, gamma1)
        k2 = _rate_equation(p + 0.5 * dt * k1, w, gamma1)
        k3 = _rate_equation(p + 0.5 * dt * k2, w, gamma1)
        k4 = _rate_equation(p + dt * k3, w, gamma1)
        p = p + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(p[0] + p[1] - 1.0) > CONSERVATION_TOLERANCE:
            raise NumericRangeError("probability not conserved at step {}: {}".format(i, p.sum()))
        if i % stride == 0 or i == n_steps:
            times.append(i * dt)
            trajectory.append(p[0])

    p_g = float(np.clip(p[0], 0.0, 1.0))
    return OdeResult(
        t=np.array(times),
        p_g=np.clip(np.array(trajectory), 0.0, 1.0),
        final=OccupationState(p_g=p_g, p_e=1.0 - p_g),
    )


def analytic_rate_solution(w, gamma1, p_g0, t):
    """
    P_g(t) = P_g* + (p_g0 - P_g*)·exp(-(2W + Γ₁)t)
    """
    stationary = stationary_pg(w, gamma1).p_g
    return stationary + (p_g0 - stationary) * np.exp(-(2.0 * w + gamma1) * np.asarray(t, dtype=float))


def numeric_rate_integral(eps0, p: RateParams, t_max, n_max=None):
    """
    The rate as the correlation integral
    W = Δ²/(2ħ²) Σₙ J_n²(A/ħω) ∫₀^t_max cos[(ε₀ - nħω)τ/ħ] e^{-τ/T₂} dτ,
    evaluated by Simpson quadrature on a grid resolving the fastest sideband.

    Arguments:
        eps0: detuning offset in µeV
        p(RateParams): rate parameters
        t_max: upper limit of the integral (ns), at least 20·T₂
    """
    if t_max < 20 * p.t2:
        raise InvalidArgumentError(
            "t_max: Got {}; Expected at least 20*T2 = {}".format(t_max, 20 * p.t2)
        )
    if n_max is None:
        n_max = bessel_sum_orders(p)
    j = bessel_j_orders(n_max, p.photon_number)
    orders = np.arange(-n_max, n_max + 1)
    weights = j[np.abs(orders)] ** 2
    keep = weights > NEGLIGIBLE_WEIGHT
    orders, weights = orders[keep], weights[keep]
    detunings = float(eps0) - orders * p.hbar_omega

    fastest = max(np.max(np.abs(detunings)) / HBAR, 1.0 / p.t2)
    cycles = fastest * t_max / (2 * math.pi)
    n_points = 2 * int(math.ceil(POINTS_PER_CYCLE * cycles / 2)) + 1
    tau = np.linspace(0.0, t_max, n_points)
    decay = np.exp(-tau / p.t2)
    integrand = np.zeros_like(tau)
    for weight, detuning in zip(weights, detunings):
        integrand += weight * np.cos(detuning * tau / HBAR)
    integrand *= decay

    logger.debug(
        "correlation integral over %d points, %d sidebands, residual weight %.3g",
        n_points,
        len(orders),
        math.exp(-t_max / p.t2),
    )
    return p.delta ** 2 / (2.0 * HBAR ** 2) * float(scipy.integrate.simpson(integrand, x=tau))


def windowed_rate_integrals(p: RateParams, lower, upper, samples_per_period=200):
    """
    ∫ W dε₀ of the sideband sum and of the Airy form (without dephasing) over the whole
    photon periods ħω that fit in [lower·A, upper·A].

    Returns:
        (bessel_integral, airy_integral) in µeV/ns
    """
    start = lower * p.amplitude
    periods = int(math.floor((upper - lower) * p.amplitude / p.hbar_omega))
    if periods < 1:
        raise InvalidArgumentError(
            "window [{}, {}] is narrower than one photon energy".format(lower, upper)
        )
    eps0 = np.linspace(start, start + periods * p.hbar_omega, periods * samples_per_period + 1)
    bessel = scipy.integrate.simpson(lzsm_rate_bessel_sum(eps0, p), x=eps0)
    airy = scipy.integrate.simpson(lzsm_rate_airy(eps0, p, dephasing=False), x=eps0)
    return float(bessel), float(airy)


def finite_difference(fn, x, h, richardson=False):
    """
    Centered difference (f(x + h) - f(x - h))/2h; with richardson=True the estimates at
    h and h/2 are combined to cancel the h² error term.
    """
    if not h > 0:
        raise InvalidArgumentError("h: Got {}; Expected a positive step".format(h))

    def centered(step):
        return (fn(x + step) - fn(x - step)) / (2.0 * step)

    if not richardson:
        return centered(h)
    return (4.0 * centered(h / 2.0) - centered(h)) / 3.0
