"""
Field types for physical quantities. Internal unit system is (µeV, ns, V); capacitances
are in farads.
"""
import math

import numpy as np
from typedpy import Float, create_typed_field
from lzsmcap.commons import wrap_val


def _err_prefix(field, value):
    return "{}: Got {}; ".format(field._name, wrap_val(value)) if field._name else ""


class FiniteFloat(Float):
    """
    A float that is neither NaN nor infinite. Integers are accepted and stored as floats.
    """

    def __set__(self, instance, value):
        if isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        super().__set__(instance, value)

    def _validate(self, value):
        super()._validate(value)
        if not math.isfinite(value):
            raise ValueError("{}Expected a finite number".format(_err_prefix(self, value)))


class Energy(FiniteFloat):
    """
    An energy in µeV, e.g. detuning, tunnel coupling, drive amplitude
    """


class NonNegativeEnergy(Energy):
    def _validate(self, value):
        super()._validate(value)
        if value < 0:
            raise ValueError("{}Expected a non-negative energy".format(_err_prefix(self, value)))


class PositiveFiniteFloat(FiniteFloat):
    def _validate(self, value):
        super()._validate(value)
        if value <= 0:
            raise ValueError("{}Expected a positive number".format(_err_prefix(self, value)))


class NonNegativeFiniteFloat(FiniteFloat):
    def _validate(self, value):
        super()._validate(value)
        if value < 0:
            raise ValueError("{}Expected a non-negative number".format(_err_prefix(self, value)))


class AngularFrequency(PositiveFiniteFloat):
    """
    Angular frequency in rad/ns. A drive at 11 GHz is 2π·11 rad/ns.
    """


class Duration(PositiveFiniteFloat):
    """
    A time in ns. Relaxation, coherence and reservoir times all use this field.
    """


class Capacitance(PositiveFiniteFloat):
    """
    A capacitance in farads
    """


class Voltage(FiniteFloat):
    pass


class Probability(FiniteFloat):
    def _validate(self, value):
        super()._validate(value)
        if not 0 <= value <= 1:
            raise ValueError("{}Expected a probability in [0, 1]".format(_err_prefix(self, value)))


class Fraction(FiniteFloat):
    """
    A number in the open interval (0, 1), e.g. a gate lever arm
    """

    def _validate(self, value):
        super()._validate(value)
        if not 0 < value < 1:
            raise ValueError("{}Expected a value in (0, 1)".format(_err_prefix(self, value)))


def _validate_array(value):
    if value.ndim != 1:
        raise ValueError("Expected a one-dimensional array; Got {} dimensions".format(value.ndim))


NumpyArray = create_typed_field("NumpyArray", np.ndarray, validate_func=_validate_array)
