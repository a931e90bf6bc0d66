"""
Integer-order Bessel functions of the first kind and the Airy function Ai with its
derivative, evaluated in-house for real arguments.

Bessel functions use Miller's downward recurrence normalized by
J₀(z) + 2 Σ J₂ₖ(z) = 1. Airy functions use the Maclaurin series around the origin and
the standard large-argument expansions beyond it.
"""
import logging
import math

import numpy as np

from lzsmcap.errors import InvalidArgumentError, NumericRangeError

logger = logging.getLogger(__name__)

MAX_BESSEL_ARGUMENT = 1e5
SMALL_ARGUMENT = 1e-3
_RESCALE_THRESHOLD = 1e250

# Ai(0) and -Ai'(0)
AIRY_C1 = 0.355028053887817239
AIRY_C2 = 0.258819403792806798

AIRY_SERIES_MIN = -8.0
AIRY_SERIES_MAX = 6.0
_MAX_SERIES_TERMS = 120
_MAX_ASYMPTOTIC_TERMS = 40


def _miller_start(n_max, z):
    """
    An even starting order well above both n_max and z, so that J at the start
    is negligible relative to every requested order.
    """
    reach = max(n_max, z)
    start = int(reach + 20 + 4 * math.sqrt(reach + 1))
    return start + (start % 2)


def bessel_j_orders(n_max: int, z: float) -> np.ndarray:
    """
    J₀(z), ..., J_{n_max}(z) from one downward-recurrence pass.

    Arguments:
        n_max(int): highest order, n_max >= 0
        z(float): finite argument; negative values use J_n(-z) = (-1)ⁿ J_n(z)

    Returns:
        a numpy array of length n_max + 1
    """
    if isinstance(n_max, bool) or int(n_max) != n_max or n_max < 0:
        raise InvalidArgumentError("n_max: Got {}; Expected a non-negative integer".format(n_max))
    n_max = int(n_max)
    if not math.isfinite(z):
        raise InvalidArgumentError("z: Got {}; Expected a finite number".format(z))
    if max(n_max, abs(z)) > MAX_BESSEL_ARGUMENT:
        raise NumericRangeError(
            "Bessel recurrence beyond working range: order {}, argument {}".format(n_max, z)
        )
    result = np.zeros(n_max + 1)
    if z == 0:
        result[0] = 1.0
        return result
    sign_flip = z < 0
    z = abs(z)
    if z < SMALL_ARGUMENT:
        result = _power_series(n_max, z)
    else:
        result = _miller(n_max, z)
    if sign_flip:
        result[1::2] = -result[1::2]
    return result


def _power_series(n_max, z):
    half = z / 2.0
    result = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        log_lead = n * math.log(half) - math.lgamma(n + 1)
        if log_lead < -745:
            break
        term = math.exp(log_lead)
        total = term
        for m in range(1, 20):
            term *= -half * half / (m * (m + n))
            total += term
            if abs(term) < 1e-17 * abs(total):
                break
        result[n] = total
    return result


def _miller(n_max, z):
    result = np.zeros(n_max + 1)
    start = _miller_start(n_max, z)
    j_next, j_curr = 0.0, 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = (2.0 * k / z) * j_curr - j_next
        j_next, j_curr = j_curr, j_prev
        # j_curr now holds the unnormalized J_{k-1}
        order = k - 1
        if order <= n_max:
            result[order] = j_curr
        if order > 0 and order % 2 == 0:
            norm += 2.0 * j_curr
        if abs(j_curr) > _RESCALE_THRESHOLD:
            j_curr /= _RESCALE_THRESHOLD
            j_next /= _RESCALE_THRESHOLD
            norm /= _RESCALE_THRESHOLD
            result[: n_max + 1] /= _RESCALE_THRESHOLD
    norm += j_curr
    if not math.isfinite(norm) or norm == 0:
        raise NumericRangeError("Bessel normalization failed for z = {}".format(z))
    return result / norm


def bessel_j(n: int, z: float) -> float:
    """
    J_n(z) for an integer order of either sign and a finite real argument.
    Negative orders use J₋ₙ = (-1)ⁿ Jₙ.
    """
    if isinstance(n, bool) or int(n) != n:
        raise InvalidArgumentError("n: Got {}; Expected an integer order".format(n))
    n = int(n)
    value = bessel_j_orders(abs(n), z)[abs(n)]
    if n < 0 and n % 2:
        value = -value
    return float(value)


def _as_finite_array(x, name):
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("{}: Expected finite values; Got {}".format(name, x))
    return values


def _maclaurin(x):
    x3 = x ** 3
    f = np.ones_like(x)
    g = x.copy()
    fp = x * x / 2.0
    gp = np.ones_like(x)
    a, c, b, d = f.copy(), g.copy(), fp.copy(), gp.copy()
    for k in range(1, _MAX_SERIES_TERMS):
        a = a * x3 / ((3 * k - 1) * (3 * k))
        c = c * x3 / ((3 * k) * (3 * k + 1))
        d = d * x3 / ((3 * k) * (3 * k - 2))
        f += a
        g += c
        gp += d
        if k >= 2:
            b = b * x3 / ((3 * k - 1) * (3 * k - 3))
            fp += b
        largest = max(np.max(np.abs(t), initial=0) for t in (a, b, c, d))
        if k > 3 and largest < 1e-18:
            break
    return AIRY_C1 * f - AIRY_C2 * g, AIRY_C1 * fp - AIRY_C2 * gp


def _asymptotic_coefficients(count):
    u = np.empty(count)
    v = np.empty(count)
    u[0] = v[0] = 1.0
    for k in range(1, count):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _asymptotic_coefficients(_MAX_ASYMPTOTIC_TERMS)


def _truncated_terms(xi, coefficients):
    """
    Terms cₖ/ξᵏ of an asymptotic series, zeroed from the first term that stops
    decreasing in magnitude (optimal truncation).
    """
    powers = xi[:, None] ** -np.arange(len(coefficients))[None, :]
    terms = coefficients[None, :] * powers
    magnitude = np.abs(terms)
    growing = np.zeros_like(magnitude, dtype=bool)
    growing[:, 1:] = magnitude[:, 1:] >= magnitude[:, :-1]
    keep = np.logical_not(np.cumsum(growing, axis=1) > 0)
    return np.where(keep, terms, 0.0)


def _asymptotic_positive(x):
    xi = 2.0 / 3.0 * x ** 1.5
    signs = (-1.0) ** np.arange(_MAX_ASYMPTOTIC_TERMS)
    su = np.sum(_truncated_terms(xi, signs * _U), axis=1)
    sv = np.sum(_truncated_terms(xi, signs * _V), axis=1)
    decay = np.exp(-xi)
    quarter = x ** 0.25
    ai = decay / (2 * math.sqrt(math.pi) * quarter) * su
    aip = -quarter * decay / (2 * math.sqrt(math.pi)) * sv
    return ai, aip


def _asymptotic_negative(x):
    z = -x
    xi = 2.0 / 3.0 * z ** 1.5
    k = np.arange(_MAX_ASYMPTOTIC_TERMS)
    # (-1)^floor(k/2) splits the series into its even and odd halves
    signs = np.where((k // 2) % 2 == 0, 1.0, -1.0)
    tu = _truncated_terms(xi, signs * _U)
    tv = _truncated_terms(xi, signs * _V)
    even, odd = k % 2 == 0, k % 2 == 1
    u_even, u_odd = tu[:, even].sum(axis=1), tu[:, odd].sum(axis=1)
    v_even, v_odd = tv[:, even].sum(axis=1), tv[:, odd].sum(axis=1)
    phase = xi - math.pi / 4
    cos, sin = np.cos(phase), np.sin(phase)
    quarter = z ** 0.25
    ai = (cos * u_even + sin * u_odd) / (math.sqrt(math.pi) * quarter)
    aip = quarter / math.sqrt(math.pi) * (sin * v_even - cos * v_odd)
    return ai, aip


def airy(x):
    """
    (Ai(x), Ai'(x)) for a scalar or an array of finite real arguments.
    Scalars in, floats out.
    """
    values = _as_finite_array(x, "x")
    flat = np.atleast_1d(values).ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)

    low = flat < AIRY_SERIES_MIN
    high = flat > AIRY_SERIES_MAX
    mid = ~(low | high)
    if np.any(mid):
        ai[mid], aip[mid] = _maclaurin(flat[mid])
    if np.any(high):
        ai[high], aip[high] = _asymptotic_positive(flat[high])
    if np.any(low):
        ai[low], aip[low] = _asymptotic_negative(flat[low])

    if values.ndim == 0:
        return float(ai[0]), float(aip[0])
    return ai.reshape(values.shape), aip.reshape(values.shape)


def airy_ai(x):
    return airy(x)[0]


def airy_ai_prime(x):
    return airy(x)[1]
