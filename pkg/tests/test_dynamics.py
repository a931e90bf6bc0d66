import logging
import math

import numpy as np
from pytest import approx, fixture, raises

from lzsmcap.dynamics import (
    bessel_sum_orders,
    bessel_tail_bound,
    dephasing_factor,
    dp11_deps_approx,
    dp11_deps_full,
    first_passage_time,
    lzsm_rate_airy,
    lzsm_rate_bessel_sum,
    lzsm_rate_derivative,
    p11,
    reservoir_domain,
    reservoir_prob,
    reservoir_prob_derivative,
    stationary_pg,
    zeta,
)
from lzsmcap.errors import DegenerateInputError, DomainError, InvalidArgumentError
from lzsmcap.oracle import finite_difference
from lzsmcap.specfun import bessel_j
from lzsmcap.structures import ModelParams, RateParams, RelaxationParams, ReservoirParams
from lzsmcap.units import HBAR

OMEGA = 2 * math.pi * 11


@fixture(name="params")
def fixture_params():
    return ModelParams()


@fixture(name="rate")
def fixture_rate(params):
    return params.rate_params()


def test_zeta():
    assert zeta(2 * HBAR * OMEGA, OMEGA) == approx(1.0)
    assert zeta(1350.0, OMEGA) == approx((2 * HBAR * OMEGA / 1350.0) ** (1 / 3))
    assert zeta(1350.0, OMEGA) == approx(0.407, abs=1e-3)
    assert zeta(1350.0, 8 * OMEGA) == approx(2 * zeta(1350.0, OMEGA))


def test_first_passage_time():
    assert first_passage_time(0.0, 1350.0, OMEGA) == approx(2 * math.pi / OMEGA)
    assert first_passage_time(1350.0, 1350.0, OMEGA) == approx(math.pi / OMEGA)
    assert first_passage_time(-1350.0, 1350.0, OMEGA) == approx(3 * math.pi / OMEGA)


def test_first_passage_time_clamped_beyond_amplitude():
    assert first_passage_time(2000.0, 1350.0, OMEGA) == approx(math.pi / OMEGA)


def test_rates_vanish_without_tunnel_coupling(params):
    rate = params.shallow_clone_with_overrides(delta=0.0).rate_params()
    eps0 = np.linspace(-1350, 2000, 51)
    assert np.all(lzsm_rate_airy(eps0, rate) == 0)
    assert np.all(lzsm_rate_bessel_sum(eps0, rate) == 0)


def test_airy_rate_non_negative(rate):
    eps0 = np.linspace(-1.0, 1.5, 1000) * rate.amplitude
    assert np.all(lzsm_rate_airy(eps0, rate) >= 0)
    assert np.all(lzsm_rate_bessel_sum(eps0, rate) >= 0)


def test_scalar_in_float_out(rate):
    assert isinstance(lzsm_rate_airy(500.0, rate), float)
    assert isinstance(lzsm_rate_bessel_sum(500.0, rate), float)
    assert lzsm_rate_bessel_sum(np.array([500.0]), rate).shape == (1,)


def test_dephasing_factor(rate):
    assert lzsm_rate_airy(700.0, rate) == approx(
        lzsm_rate_airy(700.0, rate, dephasing=False) * dephasing_factor(700.0, rate)
    )


def test_few_photons_warns(caplog):
    rate = RateParams(delta=2.0, amplitude=10.0, omega=OMEGA, t2=0.035)
    with caplog.at_level(logging.WARNING):
        lzsm_rate_airy(0.0, rate)
    assert "assumes many photons" in caplog.text


def test_rate_derivative_matches_finite_difference(rate):
    for eps0 in (300.0, 800.0, 1200.0):
        numeric = finite_difference(lambda e: lzsm_rate_airy(e, rate), eps0, 1e-2, richardson=True)
        assert lzsm_rate_derivative(eps0, rate) == approx(numeric, rel=1e-6, abs=1e-14)


def test_bessel_sum_single_sideband_limit():
    rate = RateParams(delta=2.0, amplitude=1e-6, omega=OMEGA, t2=0.035)
    width = HBAR / rate.t2
    for eps0 in (0.0, 5.0, 30.0):
        lorentzian = rate.delta ** 2 / 2 * (1 / rate.t2) / (eps0 ** 2 + width ** 2)
        assert lzsm_rate_bessel_sum(eps0, rate) == approx(lorentzian, rel=1e-9)


def test_bessel_sum_peaks_on_resonance():
    # narrow lines, so that neighbouring sidebands do not pull the maximum
    rate = RateParams(delta=2.0, amplitude=1350.0, omega=OMEGA, t2=1.0)
    n = max(range(5, 25), key=lambda k: abs(bessel_j(k, rate.photon_number)))
    scan = n * rate.hbar_omega + np.linspace(-3, 3, 61)
    values = lzsm_rate_bessel_sum(scan, rate)
    assert np.argmax(values) == 30


def test_bessel_sum_truncation(rate):
    assert bessel_sum_orders(rate) == math.ceil(rate.photon_number) + 40
    assert bessel_tail_bound(rate.photon_number, bessel_sum_orders(rate)) < 1e-10


def test_truncated_bessel_sum_warns(rate, caplog):
    with caplog.at_level(logging.WARNING):
        lzsm_rate_bessel_sum(500.0, rate, n_max=5)
    assert "sideband sum truncated" in caplog.text


def test_stationary_pg():
    assert stationary_pg(0.0, 0.02).p_g == 1.0
    assert stationary_pg(0.3, 0.0).p_g == approx(0.5)
    state = stationary_pg(0.02, 0.02)
    assert state.p_g == approx(2 / 3)
    assert state.p_e == approx(1 / 3)


def test_stationary_pg_errors():
    with raises(DegenerateInputError):
        stationary_pg(0.0, 0.0)
    with raises(InvalidArgumentError):
        stationary_pg(-1.0, 0.02)


def test_reservoir_prob_at_crossing(params):
    r = params.reservoir()
    expected = 1 - math.exp(-math.pi / (r.t_r * OMEGA))
    assert reservoir_prob(r.eps_hat, r, 1350.0, OMEGA) == approx(expected, rel=1e-12)


def test_reservoir_prob_limits():
    fast = ReservoirParams(eps_hat=1350.0, t_r=1e-9)
    slow = ReservoirParams(eps_hat=1350.0, t_r=1e9)
    assert reservoir_prob(1000.0, fast, 1350.0, OMEGA) == approx(1.0)
    assert reservoir_prob(1000.0, slow, 1350.0, OMEGA) == approx(0.0, abs=1e-9)


def test_reservoir_prob_increasing(params):
    r = params.reservoir()
    eps0 = np.linspace(0.0, 2 * r.eps_hat, 401)
    assert np.all(np.diff(reservoir_prob(eps0, r, 1350.0, OMEGA)) > 0)


def test_reservoir_domain(params):
    r = params.reservoir()
    mask = reservoir_domain(np.array([-10.0, 0.0, 1350.0, 2700.0, 2710.0]), r, 1350.0)
    assert list(mask) == [False, True, True, True, False]


def test_reservoir_prob_outside_domain(params):
    with raises(DomainError) as excinfo:
        reservoir_prob(np.array([100.0, -50.0]), params.reservoir(), 1350.0, OMEGA)
    assert "eps0: Got -50.0" in str(excinfo.value)


def test_reservoir_derivative_matches_finite_difference(params):
    r = params.reservoir()
    for eps0 in (200.0, 900.0, 2000.0):
        numeric = finite_difference(lambda e: reservoir_prob(e, r, 1350.0, OMEGA), eps0, 1e-2, richardson=True)
        assert reservoir_prob_derivative(eps0, r, 1350.0, OMEGA) == approx(numeric, rel=1e-8)


def test_p11_without_tunnel_coupling(params):
    p = params.shallow_clone_with_overrides(delta=0.0)
    eps0 = np.linspace(10.0, 1300.0, 20)
    expected = reservoir_prob(eps0, p.reservoir(), p.amplitude, p.omega)
    assert p11(eps0, p.rate_params(), p.relaxation(), p.reservoir()) == approx(expected)


def test_p11_without_reservoir_exchange(params):
    p = params.shallow_clone_with_overrides(t_r=1e12)
    assert p11(600.0, p.rate_params(), p.relaxation(), p.reservoir()) == approx(0.0, abs=1e-9)


def test_p11_is_product_of_factors(params, rate):
    eps0 = 0.9 * params.eps_hat
    w = lzsm_rate_airy(eps0, rate)
    p_g = stationary_pg(w, params.relaxation().gamma1).p_g
    p_r = reservoir_prob(eps0, params.reservoir(), params.amplitude, params.omega)
    assert p11(eps0, rate, params.relaxation(), params.reservoir()) == approx(p_r * p_g, rel=1e-14)


def test_dp11_without_tunnel_coupling(params):
    p = params.shallow_clone_with_overrides(delta=0.0)
    eps0 = np.linspace(10.0, 1300.0, 20)
    expected = reservoir_prob_derivative(eps0, p.reservoir(), p.amplitude, p.omega)
    assert dp11_deps_full(eps0, p.rate_params(), p.relaxation(), p.reservoir()) == approx(expected)
    assert np.all(dp11_deps_approx(eps0, p.rate_params(), p.relaxation(), p.reservoir()) == 0)


def test_dp11_full_matches_finite_difference(params, rate):
    rel, r = params.relaxation(), params.reservoir()
    grid = np.linspace(0.05, 0.95, 200) * params.eps_hat
    closed = dp11_deps_full(grid, rate, rel, r)
    numeric = np.array(
        [finite_difference(lambda e: p11(e, rate, rel, r), x, 1e-3, richardson=True) for x in grid]
    )
    scale = np.max(np.abs(closed))
    # away from stationary points the relative error is bounded; near them compare to the scale
    away = np.abs(closed) > 1e-3 * scale
    assert np.all(np.abs(numeric[away] - closed[away]) <= 1e-6 * np.abs(closed[away]))
    assert np.all(np.abs(numeric - closed) <= 1e-6 * scale)


def test_dp11_approx_in_fast_reservoir_regime(params):
    p = params.shallow_clone_with_overrides(t_r=0.003)
    args = (p.rate_params(), p.relaxation(), p.reservoir())
    eps0 = 0.95 * p.eps_hat
    full = dp11_deps_full(eps0, *args)
    assert abs(dp11_deps_approx(eps0, *args) - full) / abs(full) < 0.1


def test_dp11_approx_worse_near_zero_detuning(params, rate):
    args = (rate, params.relaxation(), params.reservoir())

    def deviation(eps0):
        full = dp11_deps_full(eps0, *args)
        return abs(dp11_deps_approx(eps0, *args) - full) / abs(full)

    assert deviation(0.95 * params.eps_hat) < deviation(1e-3 * params.eps_hat)
