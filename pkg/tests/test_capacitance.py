import math

import numpy as np
from pytest import approx, fixture, raises

from lzsmcap.capacitance import (
    capacitance_from_terms,
    capacitance_terms,
    capacitance_prefactor,
    capacitance_sinusoid,
    differential_capacitance,
    envelope_amplitude,
    gamma_factor,
    geometric_capacitance,
    normalize_trace,
    parametric_capacitance,
    phase_shift,
    resonator_frequency,
    resonator_frequency_shift,
    voltage_period,
)
from lzsmcap.dynamics import lzsm_rate_airy, zeta
from lzsmcap.errors import DegenerateInputError, DomainError, InvalidArgumentError
from lzsmcap.specfun import airy
from lzsmcap.structures import Axis, Branch, ModelParams, Trace
from lzsmcap.sweep import simulate_on_axis
from lzsmcap.units import ELEMENTARY_CHARGE, HBAR, voltage_from_detuning

OMEGA = 2 * math.pi * 11


@fixture(name="params")
def fixture_params():
    return ModelParams()


def test_geometric_capacitance(params):
    c = params.circuit()
    assert geometric_capacitance(c) == approx(c.c_g2 ** 2 / (c.c_g2 + c.c_d))


def test_prefactor(params):
    z = zeta(params.amplitude, params.omega)
    expected = 2 * ELEMENTARY_CHARGE * params.alpha_minus * params.alpha_plus * z / (params.hbar_omega * 1e-6)
    assert capacitance_prefactor(params) == approx(expected, rel=1e-12)


def test_gamma_factor_positive_scalar(params):
    value = gamma_factor(700.0, params.rate_params(), params.relaxation())
    assert isinstance(value, float)
    assert value > 0


def test_capacitance_vanishes_without_tunnel_coupling(params):
    p = params.shallow_clone_with_overrides(delta=0.0)
    eps0 = np.linspace(10.0, 2000.0, 41)
    assert np.all(parametric_capacitance(eps0, p) == 0)


def test_capacitance_is_finite_and_oscillates(params):
    eps0 = np.linspace(0.05, 0.95, 2001) * params.amplitude
    c = parametric_capacitance(eps0, params)
    assert np.all(np.isfinite(c))
    assert np.count_nonzero(np.diff(np.sign(c))) > 10


def test_capacitance_decays_above_amplitude(params):
    eps0 = np.linspace(1.1, 1.5, 200) * params.amplitude
    c = np.abs(parametric_capacitance(eps0, params))
    assert c[-1] < c[0]
    assert np.all(np.diff(c) <= 0)


def test_reservoir_branch_is_mirror_image(params):
    mirrored = params.shallow_clone_with_overrides(branch=Branch.RESERVOIR_00_10)
    eps0 = np.linspace(0.05, 1.4, 101) * params.amplitude
    assert np.array_equal(parametric_capacitance(-eps0, mirrored), parametric_capacitance(eps0, params))


def test_capacitance_outside_reservoir_domain(params):
    with raises(DomainError):
        parametric_capacitance(np.array([100.0, -50.0]), params)


def test_envelope_nan_above_amplitude(params):
    env = envelope_amplitude(np.array([0.5, 1.0, 1.2]) * params.amplitude, params)
    assert not math.isnan(env[0])
    assert math.isnan(env[1])
    assert math.isnan(env[2])


def test_envelope_bounds_local_oscillation(params):
    centre = 0.5 * params.amplitude
    eps0 = np.linspace(centre - 150.0, centre + 150.0, 2001)
    local_max = np.max(np.abs(parametric_capacitance(eps0, params)))
    assert local_max / envelope_amplitude(centre, params) == approx(1.0, abs=0.2)


def test_voltage_period(params):
    expected = math.pi * HBAR * OMEGA * 1e-6 / (2 * math.sqrt(2) * params.alpha_minus)
    assert voltage_period(OMEGA, params.alpha_minus) == approx(expected, rel=1e-14)
    assert voltage_period(OMEGA, params.alpha_minus) == approx(0.842e-3, rel=1e-2)


def test_voltage_period_scaling():
    base = voltage_period(OMEGA, 0.06)
    assert voltage_period(2 * OMEGA, 0.06) == approx(2 * base, rel=1e-14)
    assert voltage_period(OMEGA, 0.12) == approx(base / 2, rel=1e-14)


def test_voltage_period_rejects_negative_coupling():
    with raises(InvalidArgumentError):
        voltage_period(OMEGA, -0.06)


def test_sinusoid_maximum_at_reference(params):
    v_ref = voltage_from_detuning(0.5 * params.amplitude, params.alpha_minus, params.vtg0)
    assert capacitance_sinusoid(v_ref, params, v_ref=v_ref) == approx(
        envelope_amplitude(0.5 * params.amplitude, params), rel=1e-9
    )


def test_sinusoid_is_periodic(params):
    v = voltage_from_detuning(0.5 * params.amplitude, params.alpha_minus, params.vtg0)
    period = voltage_period(params.omega, params.alpha_minus)
    half = capacitance_sinusoid(v + period / 2, params, v_ref=v)
    assert half < 0


def test_sinusoid_outside_window(params):
    v = voltage_from_detuning(1.1 * params.amplitude, params.alpha_minus, params.vtg0)
    with raises(DomainError) as excinfo:
        capacitance_sinusoid(v, params)
    assert "below the drive amplitude" in str(excinfo.value)


def test_phase_shift(params):
    c = params.circuit()
    assert phase_shift(1e-15, c) == approx(-2 * c.q_factor * 1e-15 / c.c_p)
    assert isinstance(phase_shift(1e-15, c), float)


def test_differential_capacitance(params):
    eps0 = 700.0
    assert differential_capacitance(eps0, params) == approx(
        geometric_capacitance(params.circuit()) + parametric_capacitance(eps0, params)
    )


def test_resonator_frequency():
    assert resonator_frequency(1e-12, inductance=1e-6) == approx(1e9)


def test_resonator_shift_sign(params):
    c = params.circuit()
    assert resonator_frequency_shift(1e-15, c) < 0
    assert resonator_frequency_shift(-1e-15, c) > 0
    assert resonator_frequency_shift(0.0, c) == 0


def test_gamma_ai_squared_is_twice_t1_times_rate(params):
    rate = params.rate_params()
    eps0 = np.linspace(0.05, 1.5, 301) * params.amplitude
    u = zeta(params.amplitude, params.omega) * (eps0 - params.amplitude) / params.hbar_omega
    ai, _ = airy(u)
    left = gamma_factor(eps0, rate, params.relaxation()) * np.asarray(ai) ** 2
    right = 2 * params.t1 * lzsm_rate_airy(eps0, rate)
    assert np.max(np.abs(left - right) / np.abs(right)) < 1e-12


def test_gamma_factor_limits(params):
    uncoupled = params.shallow_clone_with_overrides(delta=0.0).rate_params()
    assert gamma_factor(700.0, uncoupled, params.relaxation()) == 0
    coherent = params.shallow_clone_with_overrides(t2=1e12).rate_params()
    z = zeta(params.amplitude, params.omega)
    undamped = params.t1 * math.pi * z ** 2 * params.delta ** 2 / (HBAR ** 2 * params.omega)
    assert gamma_factor(700.0, coherent, params.relaxation()) == approx(undamped, rel=1e-9)


def _values_trace(values):
    values = np.asarray(values, dtype=float)
    return Trace(axis=Axis.DETUNING_REDUCED, x=np.linspace(0.1, 0.9, len(values)), values=values)


def test_normalize_constant_trace():
    assert list(normalize_trace(_values_trace([3.0, 3.0, 3.0])).values) == [1.0, 1.0, 1.0]
    assert list(normalize_trace(_values_trace([-2.5, -2.5])).values) == [-1.0, -1.0]


def test_normalize_is_idempotent_and_scale_free(params):
    trace = simulate_on_axis(np.linspace(-0.2, 1.3, 301), Axis.DETUNING_REDUCED, params)
    once = normalize_trace(trace)
    assert once.normalized
    assert np.nanmax(np.abs(once.values)) == 1.0
    assert normalize_trace(once) == once
    scaled = normalize_trace(trace.with_values(7 * trace.values))
    assert np.array_equal(scaled.gaps, once.gaps)
    assert np.nanmax(np.abs(scaled.values - once.values)) <= 1e-12


def test_normalize_all_zero_trace():
    with raises(DegenerateInputError):
        normalize_trace(_values_trace(np.zeros(5)))


def test_phase_shift_is_linear(params):
    c = params.circuit()
    a, b = 3e-16, -1.2e-15
    assert phase_shift(a + b, c) == approx(phase_shift(a, c) + phase_shift(b, c), rel=1e-12)
    doubled = params.shallow_clone_with_overrides(q_factor=2 * params.q_factor).circuit()
    c_pm = parametric_capacitance(np.linspace(0.1, 0.9, 11) * params.amplitude, params)
    assert np.abs(phase_shift(c_pm, doubled)) == approx(2 * np.abs(phase_shift(c_pm, c)), rel=1e-12)


def test_sinusoid_period_from_zero_crossings(params):
    period = voltage_period(params.omega, params.alpha_minus)
    start = voltage_from_detuning(0.9 * params.amplitude, params.alpha_minus, params.vtg0)
    v = np.linspace(start, start + 10 * period, 20001)
    values = capacitance_sinusoid(v, params, v_ref=start)
    crossings = v[np.flatnonzero(np.diff(np.sign(values)) != 0)]
    assert len(crossings) == 20
    measured = 2 * (crossings[-1] - crossings[0]) / (len(crossings) - 1)
    assert measured == approx(period, rel=0.01)


def test_terms_are_reused_across_timescales(params):
    eps = np.linspace(0.05, 1.3, 301) * params.amplitude
    terms = capacitance_terms(eps, params)
    other = params.shallow_clone_with_overrides(t1=7.0, t2=0.02, t_r=0.05, delta=3.0)
    assert np.array_equal(capacitance_from_terms(terms, other), parametric_capacitance(eps, other))
    assert np.array_equal(capacitance_from_terms(terms, params), parametric_capacitance(eps, params))
