"""
Trace generation over detuning or gate-voltage grids and lists of drive frequencies.
"""
import logging
import math
from typing import List

import numpy as np

from lzsmcap.capacitance import parametric_capacitance
from lzsmcap.dynamics import reservoir_domain
from lzsmcap.errors import InvalidArgumentError
from lzsmcap.structures import Axis, Branch, ModelParams, SweepSpec, Trace
from lzsmcap.units import detuning_from_voltage

logger = logging.getLogger(__name__)


def axis_to_detuning(x, axis: Axis, params: ModelParams):
    """
    Absolute detuning ε₀ (µeV) for samples of any sweep axis
    """
    x = np.asarray(x, dtype=float)
    if axis is Axis.DETUNING_REDUCED:
        return x * params.amplitude
    if axis is Axis.DETUNING_ABSOLUTE:
        return x
    return detuning_from_voltage(x, params.alpha_minus, params.vtg0)


def simulate_on_axis(x, axis: Axis, params: ModelParams) -> Trace:
    """
    Evaluate C_pm at every sample of an explicit axis, at the drive frequency and branch
    of ``params``. Samples where the drive never reaches the reservoir crossing are gaps.
    """
    x = np.asarray(x, dtype=float)
    eps0 = axis_to_detuning(x, axis, params)
    branch_eps = -eps0 if params.branch is Branch.RESERVOIR_00_10 else eps0
    valid = reservoir_domain(branch_eps, params.reservoir(), params.amplitude)
    values = np.full(len(x), np.nan)
    if np.any(valid):
        values[valid] = parametric_capacitance(eps0[valid], params)
    gaps = len(x) - int(np.count_nonzero(valid))
    if gaps:
        logger.info(
            "%d of %d samples outside the reservoir-crossing domain recorded as gaps",
            gaps,
            len(x),
        )
    return Trace(
        axis=axis,
        x=x,
        values=values,
        omega=params.omega,
        branch=params.branch,
        params=params,
    )


def simulate_trace(spec: SweepSpec, params: ModelParams) -> List[Trace]:
    """
    One trace per drive frequency of the sweep, ordered by ascending frequency.
    Each trace carries the parameter snapshot it was evaluated with.

    Arguments:
        spec(SweepSpec): axis, grid, frequencies and branch
        params(ModelParams): every other model input; its omega and branch are overridden

    Returns:
        a list of :class:`Trace`
    """
    grid = spec.grid()
    traces = []
    for omega in sorted(spec.frequencies):
        snapshot = params.shallow_clone_with_overrides(omega=omega, branch=spec.branch)
        logger.debug("simulating %d points at %.4f GHz", len(grid), omega / (2 * math.pi))
        traces.append(simulate_on_axis(grid, spec.axis, snapshot))
    return traces


def mirror_branch(t: Trace) -> Trace:
    """
    Reflect a detuning-axis trace about ε = 0: the axis is negated and reversed, the
    values keep their order relative to the axis, and the branch is swapped.
    """
    if t.axis is Axis.GATE_VOLTAGE:
        raise InvalidArgumentError(
            "axis: Got {}; mirroring is defined about zero detuning".format(t.axis.value)
        )
    other = (
        Branch.RESERVOIR_00_10 if t.branch is Branch.RESERVOIR_01_11 else Branch.RESERVOIR_01_11
    )
    fields = dict(
        axis=t.axis,
        x=-t.x[::-1],
        values=t.values[::-1].copy(),
        normalized=t.normalized,
        branch=other,
    )
    if t.omega is not None:
        fields["omega"] = t.omega
    if t.params is not None:
        fields["params"] = t.params.shallow_clone_with_overrides(branch=other)
    return Trace(**fields)


def frequency_grid(f_start_ghz, f_stop_ghz, count, log=True):
    """
    Angular drive frequencies (rad/ns) between two frequencies in GHz, log-spaced by default.
    """
    if count < 1 or f_start_ghz <= 0 or f_stop_ghz < f_start_ghz:
        raise InvalidArgumentError(
            "Expected 0 < f_start <= f_stop and count >= 1; Got {}, {}, {}".format(
                f_start_ghz, f_stop_ghz, count
            )
        )
    spacing = np.geomspace if log else np.linspace
    return 2 * math.pi * spacing(f_start_ghz, f_stop_ghz, count)
