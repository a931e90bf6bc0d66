import math

import numpy as np
from pytest import approx, fixture, raises

from lzsmcap.capacitance import parametric_capacitance
from lzsmcap.errors import InvalidArgumentError
from lzsmcap.structures import Axis, Branch, ModelParams, SweepSpec
from lzsmcap.sweep import (
    axis_to_detuning,
    frequency_grid,
    mirror_branch,
    simulate_on_axis,
    simulate_trace,
)
from lzsmcap.units import voltage_from_detuning


@fixture(name="params")
def fixture_params():
    return ModelParams()


def test_axis_to_detuning(params):
    x = np.array([0.0, 0.5, 1.0])
    assert axis_to_detuning(x, Axis.DETUNING_REDUCED, params) == approx(x * 1350.0)
    assert axis_to_detuning(x, Axis.DETUNING_ABSOLUTE, params) == approx(x)
    v = voltage_from_detuning(np.array([0.0, 675.0]), params.alpha_minus, params.vtg0)
    assert axis_to_detuning(v, Axis.GATE_VOLTAGE, params) == approx(np.array([0.0, 675.0]), abs=1e-9)


def test_simulate_two_points_without_tunnel_coupling(params):
    spec = SweepSpec(frequencies=[params.omega], start=0.0, stop=1.0, n_points=2)
    (trace,) = simulate_trace(spec, params.shallow_clone_with_overrides(delta=0.0))
    assert list(trace.values) == [0.0, 0.0]
    assert not np.any(trace.gaps)


def test_simulate_matches_capacitance(params):
    x = np.linspace(0.1, 1.4, 27)
    trace = simulate_on_axis(x, Axis.DETUNING_REDUCED, params)
    assert np.array_equal(trace.values, parametric_capacitance(x * params.amplitude, params))
    assert trace.omega == params.omega
    assert trace.params == params


def test_samples_outside_domain_are_gaps(params, caplog):
    x = np.array([-0.5, 0.0, 1.0, 2.0, 2.5])
    with caplog.at_level("INFO"):
        trace = simulate_on_axis(x, Axis.DETUNING_REDUCED, params)
    assert list(trace.gaps) == [True, False, False, False, True]
    assert "2 of 5 samples" in caplog.text


def test_traces_ordered_by_frequency(params):
    omegas = [2 * math.pi * 15, 2 * math.pi * 8]
    spec = SweepSpec(frequencies=omegas, start=0.1, stop=0.9, n_points=11)
    traces = simulate_trace(spec, params)
    assert [t.omega for t in traces] == sorted(omegas)
    assert [t.params.omega for t in traces] == sorted(omegas)


def test_simulation_is_deterministic(params):
    spec = SweepSpec(frequencies=[params.omega], start=-0.2, stop=1.5, n_points=301)
    assert simulate_trace(spec, params) == simulate_trace(spec, params)


def test_mirror_branch_is_exact(params):
    x = np.linspace(-0.2, 1.5, 341)
    trace = simulate_on_axis(x, Axis.DETUNING_REDUCED, params)
    other = params.shallow_clone_with_overrides(branch=Branch.RESERVOIR_00_10)
    assert mirror_branch(trace) == simulate_on_axis(-x[::-1], Axis.DETUNING_REDUCED, other)


def test_mirror_twice_is_identity(params):
    trace = simulate_on_axis(np.linspace(0.1, 1.2, 50), Axis.DETUNING_ABSOLUTE, params)
    assert mirror_branch(mirror_branch(trace)) == trace


def test_mirror_rejects_voltage_axis(params):
    trace = simulate_on_axis(np.array([0.470, 0.474]), Axis.GATE_VOLTAGE, params)
    with raises(InvalidArgumentError):
        mirror_branch(trace)


def test_frequency_grid():
    grid = frequency_grid(1.0, 100.0, 3)
    assert grid == approx(2 * math.pi * np.array([1.0, 10.0, 100.0]))
    assert frequency_grid(1.0, 3.0, 3, log=False) == approx(2 * math.pi * np.array([1.0, 2.0, 3.0]))


def test_frequency_grid_invalid():
    with raises(InvalidArgumentError):
        frequency_grid(0.0, 10.0, 5)
    with raises(InvalidArgumentError):
        frequency_grid(10.0, 1.0, 5)
