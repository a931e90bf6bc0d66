"""
Quantities derived from traces, simulated or measured: the dominant Fourier period,
the oscillation envelope, the peak-to-peak amplitude against drive frequency, and
least-squares recovery of the model timescales.
"""
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from lzsmcap.capacitance import (
    capacitance_from_terms,
    capacitance_terms,
    envelope_amplitude,
    normalize_trace,
)
from lzsmcap.dynamics import reservoir_domain
from lzsmcap.errors import DegenerateInputError, InsufficientDataError, InvalidArgumentError
from lzsmcap.optimize import LogSpaceProblem
from lzsmcap.structures import (
    Axis,
    Branch,
    EnvelopeResult,
    FitResult,
    ModelParams,
    PeriodLaw,
    SpectrumPeak,
    Trace,
)
from lzsmcap.sweep import axis_to_detuning, simulate_on_axis
from lzsmcap.units import HBAR, UEV_PER_EV

logger = logging.getLogger(__name__)

MIN_PERIODS = 4
PADDING_FACTOR = 8
UNIFORM_SPACING_TOLERANCE = 1e-9
LOG_FLOOR = 1e-300
PEAK_TO_PEAK_WINDOW = (0.1, 0.95)
ENVELOPE_FIT_WINDOW = (0.1, 0.8)
MIN_EXTREMA = 3


def _uniform_samples(t: Trace):
    """
    Axis spacing and values on a uniform grid; gaps become zeros.
    Non-uniform axes are resampled linearly onto the same number of points.
    """
    x = t.x
    values = np.where(np.isnan(t.values), 0.0, t.values)
    steps = np.diff(x)
    mean_step = (x[-1] - x[0]) / (len(x) - 1)
    if np.max(np.abs(steps - mean_step)) > UNIFORM_SPACING_TOLERANCE * abs(mean_step):
        logger.info("resampling a non-uniform axis of %d points", len(x))
        uniform = np.linspace(x[0], x[-1], len(x))
        values = np.interp(uniform, x, values)
    return mean_step, values


def _parabolic_peak(ym1, y0, yp1):
    """Vertex offset and height of the parabola through three equally spaced samples"""
    denominator = ym1 - 2.0 * y0 + yp1
    if denominator == 0:
        return 0.0, y0
    p = 0.5 * (ym1 - yp1) / denominator
    return p, y0 - 0.25 * (ym1 - yp1) * p


def fourier_peak(t: Trace) -> SpectrumPeak:
    """
    Dominant non-zero frequency of a trace, in cycles per axis unit.

    The values (gaps set to zero) are Hann-windowed and zero-padded to at least eight
    times their length; the largest bin outside the DC lobe is refined by a parabola
    through the log magnitudes of the three bins around it.

    Raises:
        InsufficientDataError: fewer than four periods fit in the window, or the
            trace has no oscillating content
    """
    n = len(t)
    if n < 8:
        raise InsufficientDataError("fourier_peak: Got {} samples; Expected at least 8".format(n))
    step, values = _uniform_samples(t)
    n_fft = 1 << int(math.ceil(math.log2(PADDING_FACTOR * n)))
    spectrum = np.abs(np.fft.rfft(values * np.hanning(n), n_fft))
    bin_width = 1.0 / (n_fft * step)

    # the Hann main lobe around DC spans two unpadded bins
    first = int(math.ceil(2 * n_fft / n)) + 1
    if first >= len(spectrum) - 1 or np.max(spectrum[first:]) == 0:
        raise InsufficientDataError("fourier_peak: the trace has no non-DC content")
    k = first + int(np.argmax(spectrum[first:-1]))
    logs = np.log(np.maximum(spectrum[k - 1 : k + 2], LOG_FLOOR))
    offset, log_height = _parabolic_peak(*logs)
    position = (k + offset) * bin_width
    periods = position * (t.x[-1] - t.x[0])
    if periods < MIN_PERIODS:
        raise InsufficientDataError(
            "fourier_peak: Got {:.3g} periods in the window; Expected at least {}".format(
                periods, MIN_PERIODS
            )
        )
    magnitude = math.exp(log_height)
    dc_dominated = bool(spectrum[0] > magnitude)
    if dc_dominated:
        logger.warning(
            "spectrum is dominated by its DC component (%.3g > peak %.3g)", spectrum[0], magnitude
        )
    return SpectrumPeak(
        position=float(position),
        magnitude=float(magnitude),
        uncertainty=float(bin_width / 2),
        dc_dominated=dc_dominated,
    )


def chirp_free_trace(t: Trace) -> Trace:
    """
    The oscillating part (0 ≤ ε₀ < A) of a trace on the axis φ = (2/3)A[1 - (1 - ε₀/A)^{3/2}],
    in µeV.

    The Airy fringes are uniformly spaced in φ, with the period they have at ε₀ = 0, so the
    Fourier period on this axis converts to the gate-voltage period δV_TG. Needs the
    trace's parameter snapshot.

    Raises:
        InvalidArgumentError: the trace has no parameter snapshot
        InsufficientDataError: fewer than eight samples lie in the oscillating window
    """
    if t.params is None:
        raise InvalidArgumentError("chirp_free_trace: Expected a trace with a parameter snapshot")
    amplitude = t.params.amplitude
    eps = t.detuning()
    if t.branch is Branch.RESERVOIR_00_10:
        eps = -eps
    keep = (eps >= 0) & (eps < amplitude) & np.isfinite(t.values)
    if np.count_nonzero(keep) < 8:
        raise InsufficientDataError(
            "chirp_free_trace: Got {} samples in 0 <= eps0 < A; Expected at least 8".format(
                np.count_nonzero(keep)
            )
        )
    phi = 2.0 / 3.0 * amplitude * (1.0 - (1.0 - eps[keep] / amplitude) ** 1.5)
    order = np.argsort(phi)
    fields = dict(
        axis=Axis.DETUNING_ABSOLUTE,
        x=phi[order],
        values=t.values[keep][order],
        normalized=t.normalized,
        params=t.params,
    )
    if t.omega is not None:
        fields["omega"] = t.omega
    return Trace(**fields)


def period_law(omegas: Sequence[float], periods: Sequence[float]) -> PeriodLaw:
    """
    Fits δV = s·ω through the origin.

    Arguments:
        omegas: angular drive frequencies in rad/ns
        periods: voltage periods in V

    Returns:
        :class:`PeriodLaw` with the slope (V·ns/rad), the coefficient of determination and
        α₋ = πħ/(2√2 e s)
    """
    w = np.asarray(omegas, dtype=float)
    v = np.asarray(periods, dtype=float)
    if len(w) != len(v) or len(w) < 2:
        raise InsufficientDataError(
            "period_law: Expected at least two (omega, period) pairs; Got {} and {}".format(
                len(w), len(v)
            )
        )
    slope = float(np.dot(w, v) / np.dot(w, w))
    ssr = float(np.sum((v - slope * w) ** 2))
    sst = float(np.sum((v - v.mean()) ** 2))
    r_squared = 1.0 - ssr / sst if sst > 0 else 1.0
    alpha_minus = math.pi * HBAR / UEV_PER_EV / (2.0 * math.sqrt(2.0) * slope)
    return PeriodLaw(slope=slope, r_squared=r_squared, alpha_minus=alpha_minus)


def _local_extrema(values):
    inner = values[1:-1]
    maxima = np.flatnonzero((inner > values[:-2]) & (inner >= values[2:])) + 1
    minima = np.flatnonzero((inner < values[:-2]) & (inner <= values[2:])) + 1
    return maxima, minima


def _branch_reduced_detuning(t: Trace):
    reduced = t.reduced_detuning()
    return -reduced if t.branch is Branch.RESERVOIR_00_10 else reduced


def envelope(t: Trace, fit=False, params: ModelParams = None) -> EnvelopeResult:
    """
    Upper and lower envelopes of an oscillating trace, interpolated linearly between its
    local maxima and minima.

    Arguments:
        t(Trace): the trace; gaps are skipped
        fit(bool): also fit the dephasing time T₂ and the reservoir time T_R to the
            envelope amplitude, with a free overall scale
        params(ModelParams): starting point and fixed values for the fit; defaults to the
            trace's own parameter snapshot

    Raises:
        InsufficientDataError: if the trace has fewer than three extrema
    """
    valid = ~t.gaps
    x = t.x[valid]
    values = t.values[valid]
    if len(values) < 3:
        raise InsufficientDataError("envelope: Got {} valid samples".format(len(values)))
    maxima, minima = _local_extrema(values)
    if len(maxima) + len(minima) < MIN_EXTREMA or not len(maxima) or not len(minima):
        raise InsufficientDataError(
            "envelope: Got {} maxima and {} minima; Expected at least {} extrema".format(
                len(maxima), len(minima), MIN_EXTREMA
            )
        )
    upper = np.interp(x, x[maxima], values[maxima])
    lower = np.interp(x, x[minima], values[minima])
    upper, lower = np.maximum(upper, lower), np.minimum(upper, lower)
    result = EnvelopeResult(x=x, upper=upper, lower=lower)
    if fit:
        _fit_envelope(t, result, params if params is not None else t.params)
    return result


def _fit_envelope(t: Trace, result: EnvelopeResult, params: ModelParams):
    if params is None:
        raise InvalidArgumentError("params: Expected model parameters to fit the envelope")
    snapshot = t.params if t.params is not None else params
    probe = Trace(
        axis=t.axis, x=result.x, values=result.amplitude, branch=t.branch, params=snapshot
    )
    reduced = _branch_reduced_detuning(probe)
    window = (reduced >= ENVELOPE_FIT_WINDOW[0]) & (reduced <= ENVELOPE_FIT_WINDOW[1])
    if np.count_nonzero(window) < 3:
        raise InsufficientDataError(
            "envelope: no samples in the fit window eps0/A in [{}, {}]".format(*ENVELOPE_FIT_WINDOW)
        )
    eps0 = probe.detuning()[window]
    data = result.amplitude[window]
    start = params.shallow_clone_with_overrides(omega=t.omega or params.omega, branch=t.branch)

    def residuals(candidate):
        model = np.asarray(envelope_amplitude(eps0, candidate))
        norm = float(np.dot(model, model))
        scale = float(np.dot(model, data)) / norm if norm > 0 else 0.0
        return data - scale * model

    fitted = LogSpaceProblem(start, ["t2", "t_r"], residuals).solve()
    result.t2 = fitted.values["t2"]
    result.t_r = fitted.values["t_r"]
    result.residual = fitted.residual_norm


def peak_to_peak(t: Trace, window=PEAK_TO_PEAK_WINDOW):
    """
    max - min of a trace over a reduced-detuning window of its branch
    """
    reduced = _branch_reduced_detuning(t)
    inside = (reduced >= window[0]) & (reduced <= window[1]) & ~t.gaps
    if not np.any(inside):
        raise InsufficientDataError(
            "peak_to_peak: no valid samples in eps0/A in [{}, {}]".format(*window)
        )
    selected = t.values[inside]
    return float(selected.max() - selected.min())


def peak_to_peak_vs_frequency(
    traces: Sequence[Trace], window=PEAK_TO_PEAK_WINDOW
) -> List[Tuple[float, float]]:
    """
    (ω, peak-to-peak amplitude) for each trace, in input order

    Raises:
        InsufficientDataError: fewer than two traces, or an empty window
        InvalidArgumentError: repeated or missing drive frequencies
    """
    if len(traces) < 2:
        raise InsufficientDataError(
            "peak_to_peak_vs_frequency: Got {} traces; Expected at least 2".format(len(traces))
        )
    omegas = [t.omega for t in traces]
    if any(w is None for w in omegas) or len(set(omegas)) != len(omegas):
        raise InvalidArgumentError("traces: Expected distinct drive frequencies; Got {}".format(omegas))
    amplitudes = []
    for index, t in enumerate(traces):
        try:
            amplitudes.append((t.omega, peak_to_peak(t, window)))
        except InsufficientDataError as ex:
            raise InsufficientDataError(
                "trace {} at {:.4g} GHz: {}".format(index, t.omega / (2 * math.pi), ex)
            ) from ex
    return amplitudes


def _normalized_values(t: Trace):
    return t.values if t.normalized else normalize_trace(t).values


class _TraceModel:
    """
    Normalized model values on the samples of one measured trace. The timescale-free
    capacitance terms are kept while A, ω, ε̂, the branch and the axis mapping are unchanged.
    """

    def __init__(self, t: Trace):
        self.trace = t
        self._key = None
        self._valid = None
        self._terms = None

    def __call__(self, candidate: ModelParams):
        t = self.trace
        omega = t.omega or candidate.omega
        if omega != candidate.omega or t.branch is not candidate.branch:
            candidate = candidate.shallow_clone_with_overrides(omega=omega, branch=t.branch)
        key = (candidate.amplitude, omega, candidate.eps_hat, candidate.branch)
        if t.axis is Axis.GATE_VOLTAGE:
            key += (candidate.alpha_minus, candidate.vtg0)
        if key != self._key:
            eps0 = axis_to_detuning(t.x, t.axis, candidate)
            branch_eps = -eps0 if candidate.branch is Branch.RESERVOIR_00_10 else eps0
            self._valid = reservoir_domain(branch_eps, candidate.reservoir(), candidate.amplitude)
            self._terms = capacitance_terms(eps0[self._valid], candidate)
            self._key = key
        values = np.full(len(t), np.nan)
        values[self._valid] = capacitance_from_terms(self._terms, candidate)
        with np.errstate(invalid="ignore"):
            scale = np.nanmax(np.abs(values)) if np.any(self._valid) else 0.0
        if not scale > 0:
            raise DegenerateInputError("cannot normalize a trace whose values are all zero")
        return values / scale


def fit_parameters(
    measured: Sequence[Trace],
    free: Sequence[str],
    init: ModelParams,
    bounds=None,
    max_iterations=2000,
) -> FitResult:
    """
    Least-squares recovery of model parameters from measured traces.

    Model and data are both divided by their own largest absolute value before the
    residuals are formed. A grid scan over the bounds (four points per decade, log spaced)
    seeds a Nelder-Mead simplex; uncertainties come from the curvature of the summed
    squared residuals at the optimum.

    Arguments:
        measured: one or more traces; each carries its drive frequency and branch
        free: names among t1, t2, t_r (or tr), alpha_minus, delta
        init(ModelParams): starting point, and the value of every fixed parameter
        bounds: optional {name: (low, high)} overrides
        max_iterations: simplex iteration budget

    Returns:
        :class:`FitResult`; ``converged`` is False when the budget ran out
    """
    if not measured:
        raise InsufficientDataError("fit_parameters: Expected at least one trace")
    data = [_normalized_values(t) for t in measured]
    for t in measured:
        if t.omega is None:
            logger.info("trace without drive frequency; using %.4g rad/ns", init.omega)

    models = [_TraceModel(t) for t in measured]

    def residuals(candidate: ModelParams):
        parts = []
        for model_of, d in zip(models, data):
            model = model_of(candidate)
            both = np.isfinite(model) & np.isfinite(d)
            parts.append(model[both] - d[both])
        return np.concatenate(parts)

    problem = LogSpaceProblem(init, free, residuals, bounds)
    return problem.solve(max_iterations)


def model_peak_to_peak(omegas, params: ModelParams, window=PEAK_TO_PEAK_WINDOW, n_points=801):
    """
    Model peak-to-peak amplitude (farads) at each drive frequency over the default window
    """
    grid = np.linspace(window[0], window[1], n_points)
    if params.branch is Branch.RESERVOIR_00_10:
        grid = -grid[::-1]
    amplitudes = []
    for omega in omegas:
        snapshot = params.shallow_clone_with_overrides(omega=float(omega))
        amplitudes.append(peak_to_peak(simulate_on_axis(grid, Axis.DETUNING_REDUCED, snapshot), window))
    return np.array(amplitudes)


def fit_peak_to_peak(
    omegas: Sequence[float],
    amplitudes: Sequence[float],
    init: ModelParams,
    free: Sequence[str] = ("t1",),
    bounds=None,
    window=PEAK_TO_PEAK_WINDOW,
) -> FitResult:
    """
    Fit the frequency dependence of the peak-to-peak amplitude, both sides normalized
    to their maximum. With T₂ and T_R fixed this extracts T₁.
    """
    omegas = np.asarray(omegas, dtype=float)
    data = np.asarray(amplitudes, dtype=float)
    if len(omegas) != len(data) or len(omegas) < 2:
        raise InsufficientDataError("fit_peak_to_peak: Expected at least two frequencies")
    if not np.max(np.abs(data)) > 0:
        raise InsufficientDataError("fit_peak_to_peak: all amplitudes are zero")
    data = data / np.max(np.abs(data))

    def residuals(candidate: ModelParams):
        model = model_peak_to_peak(omegas, candidate, window)
        return model / np.max(np.abs(model)) - data

    return LogSpaceProblem(init, free, residuals, bounds).solve()
