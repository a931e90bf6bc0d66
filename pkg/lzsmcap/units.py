"""
Physical constants and conversions between the detuning and gate-voltage axes.

Internal units are µeV for energies, ns for times, rad/ns for angular frequencies
and V for voltages. In these units ħ = 0.6582119569 µeV·ns.
"""
import math

import numpy as np

from lzsmcap.errors import InvalidArgumentError

HBAR = 0.6582119569
ELEMENTARY_CHARGE = 1.602176634e-19
UEV_PER_EV = 1e6


def angular_frequency(f_ghz):
    """rad/ns for a drive frequency in GHz"""
    return 2 * math.pi * f_ghz


def frequency_ghz(omega):
    return omega / (2 * math.pi)


def ps_to_ns(value):
    return value * 1e-3


def ns_to_ps(value):
    return value * 1e3


def mev_to_uev(value):
    return value * 1e3


def ff_to_farad(value):
    return value * 1e-15


def farad_to_ff(value):
    return value * 1e15


def hbar():
    """ħ in µeV·ns"""
    return HBAR


def _check_alpha_minus(alpha_minus):
    if alpha_minus == 0:
        raise ZeroDivisionError("alpha_minus: Got 0; the detuning does not depend on the gate voltage")
    if not 0 < alpha_minus < 1:
        raise InvalidArgumentError(
            "alpha_minus: Got {}; Expected a value in (0, 1)".format(alpha_minus)
        )


def _finite(values, name):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("{}: Got {}; Expected finite values".format(name, values))
    return values


def detuning_from_voltage(v_tg, alpha_minus, v0):
    """
    ε = -2 α₋ (V_TG - V₀) e, returned in µeV. Accepts scalars or arrays.
    """
    _check_alpha_minus(alpha_minus)
    return -2.0 * alpha_minus * (_finite(v_tg, "v_tg") - v0) * UEV_PER_EV


def voltage_from_detuning(eps, alpha_minus, v0):
    """
    Inverse of :func:`detuning_from_voltage`
    """
    _check_alpha_minus(alpha_minus)
    return v0 - _finite(eps, "eps") / (2.0 * alpha_minus * UEV_PER_EV)
