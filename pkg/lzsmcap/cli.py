"""
Command-line front end.

Subcommands: simulate, sweep, analyze, fit and verify. Every subcommand is deterministic
given its configuration, inputs and seed. Exit codes: 0 success, 1 usage, 2 I/O,
3 domain or model error, 4 non-convergence.
"""
import argparse
import logging
import math
import os
import sys
import time
from typing import List

import numpy as np
import pandas as pd

from lzsmcap import analysis, capacitance, dynamics, oracle, specfun
from lzsmcap.errors import ConfigError, LzsmError, TraceFormatError
from lzsmcap.optimize import canonical_name
from lzsmcap.serialization import (
    Settings,
    fit_report,
    format_report,
    load_config,
    params_report,
    parse_config,
    read_trace_csv,
    write_report,
    write_trace_csv,
)
from lzsmcap.structures import Branch, ModelParams, Trace
from lzsmcap.sweep import simulate_on_axis, simulate_trace
from lzsmcap.units import HBAR, UEV_PER_EV, frequency_ghz, ns_to_ps

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_MODEL = 3
EXIT_NOT_CONVERGED = 4

DECAY_WINDOW = (1.05, 1.5)

# reference values of the verification suite, independent of the implementation
AIRY_AI_ORIGIN = 0.355028053887817239
AIRY_AI_PRIME_ORIGIN = -0.258819403792806798
BESSEL_ARGUMENTS = (1.0, 5.0, 20.0, 50.0, 100.0)

ANALYZE_GUIDANCE = {
    "fourier": "the Fourier peak needs at least 4 oscillation periods inside the trace",
    "envelope": "the envelope needs at least 3 extrema and samples with eps0/A in [0.1, 0.8]",
    "p2p": "peak-to-peak analysis needs at least two traces at distinct frequencies with "
    "samples in eps0/A in [0.1, 0.95]",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _settings(path) -> Settings:
    if path is None:
        return parse_config("")
    return load_config(path)


def _check_out(path):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise UsageError("--out: the directory {} does not exist".format(parent))


def _emit(entries, report_path=None):
    text = format_report(entries)
    sys.stdout.write(text)
    if report_path is not None:
        write_report(entries, report_path)


def _with_params(traces: List[Trace], params: ModelParams) -> List[Trace]:
    """
    Attach a parameter snapshot, at each trace's own frequency and branch, to traces
    read from a file.
    """
    result = []
    for t in traces:
        snapshot = params.shallow_clone_with_overrides(
            omega=t.omega or params.omega, branch=t.branch
        )
        fields = dict(
            axis=t.axis, x=t.x, values=t.values, normalized=t.normalized, branch=t.branch,
            params=snapshot,
        )
        if t.omega is not None:
            fields["omega"] = t.omega
        result.append(Trace(**fields))
    return result


def _sign_changes(values):
    signs = np.sign(values[np.isfinite(values) & (values != 0)])
    return int(np.count_nonzero(np.diff(signs)))


def _decay_slope(reduced, values):
    inside = (reduced >= DECAY_WINDOW[0]) & (reduced <= DECAY_WINDOW[1]) & np.isfinite(values)
    inside &= np.abs(values) > 0
    if np.count_nonzero(inside) < 2:
        return math.nan
    slope, _ = np.polyfit(reduced[inside], np.log(np.abs(values[inside])), 1)
    return float(slope)


def trace_summary(t: Trace):
    params = t.params
    reduced = t.reduced_detuning()
    if params.branch is Branch.RESERVOIR_00_10:
        reduced = -reduced
    oscillating = (reduced >= 0) & (reduced <= 1)
    period = capacitance.voltage_period(params.omega, params.alpha_minus)
    return [
        ("omega_ghz", frequency_ghz(params.omega)),
        ("branch", params.branch.value),
        ("points", len(t)),
        ("gaps", int(np.count_nonzero(t.gaps))),
        ("voltage_period_mv", period * 1e3),
        ("oscillation_count", _sign_changes(t.values[oscillating]) // 2),
        ("sign_changes", _sign_changes(t.values[oscillating])),
        ("decay_slope_per_reduced_detuning", _decay_slope(reduced, t.values)),
    ]


def run_simulate(args) -> int:
    settings = _settings(args.config)
    params = settings.params
    if params.delta == 0:
        logger.warning("tunnel coupling is zero; the parametric capacitance vanishes everywhere")
    t = simulate_on_axis(settings.sweep.grid(), settings.sweep.axis, params)
    if args.out is not None:
        write_trace_csv([t], args.out)
    _emit(trace_summary(t) + params_report(params), args.report)
    return EXIT_OK


def run_sweep(args) -> int:
    settings = _settings(args.config)
    traces = simulate_trace(settings.sweep, settings.params)
    if args.out is not None:
        write_trace_csv(traces, args.out)
    entries = [("traces", len(traces))]
    for index, t in enumerate(traces):
        entries.extend(("trace.{}.{}".format(index, k), v) for k, v in trace_summary(t))
    _emit(entries, args.report)
    return EXIT_OK


def _period_in_volts(t: Trace, period):
    """detuning period in µeV to gate-voltage period in V"""
    return period / (2.0 * t.params.alpha_minus * UEV_PER_EV)


def _analyze_fourier(traces):
    entries, rows = [("period_axis", "chirp-free detuning")], []
    omegas, periods = [], []
    for index, t in enumerate(traces):
        chirp_free = analysis.chirp_free_trace(t)
        peak = analysis.fourier_peak(chirp_free)
        period_v = _period_in_volts(chirp_free, peak.period)
        omega_ghz = frequency_ghz(t.omega) if t.omega is not None else math.nan
        rows.append([omega_ghz, peak.position, period_v, peak.magnitude, peak.uncertainty,
                     int(peak.dc_dominated)])
        entries.extend(
            [
                ("trace.{}.omega_ghz".format(index), omega_ghz),
                ("trace.{}.period_mv".format(index), period_v * 1e3),
                ("trace.{}.dc_dominated".format(index), peak.dc_dominated),
            ]
        )
        if t.omega is not None:
            omegas.append(t.omega)
            periods.append(period_v)
    if len(omegas) >= 2:
        law = analysis.period_law(omegas, periods)
        entries.extend(
            [
                ("slope_v_per_rad_per_ns", law.slope),
                ("r_squared", law.r_squared),
                ("alpha_minus", law.alpha_minus),
            ]
        )
    header = ["omega_ghz", "position", "period_v", "magnitude", "uncertainty", "dc_dominated"]
    return entries, header, rows


def _analyze_envelope(traces):
    entries, rows = [], []
    for index, t in enumerate(traces):
        result = analysis.envelope(t, fit=True)
        omega_ghz = frequency_ghz(t.omega) if t.omega is not None else math.nan
        entries.extend(
            [
                ("trace.{}.omega_ghz".format(index), omega_ghz),
                ("trace.{}.t2_ps".format(index), ns_to_ps(result.t2)),
                ("trace.{}.tr_ps".format(index), ns_to_ps(result.t_r)),
                ("trace.{}.residual".format(index), result.residual),
            ]
        )
        rows.extend(
            [omega_ghz, x, upper, lower] for x, upper, lower in zip(result.x, result.upper, result.lower)
        )
    return entries, ["omega_ghz", "axis_value", "upper", "lower"], rows


def _analyze_p2p(traces):
    pairs = analysis.peak_to_peak_vs_frequency(traces)
    rows = sorted([frequency_ghz(w), a] for w, a in pairs)
    best = max(rows, key=lambda r: r[1])
    entries = [("traces", len(rows)), ("max_omega_ghz", best[0]), ("max_amplitude", best[1])]
    return entries, ["omega_ghz", "peak_to_peak"], rows


ANALYZERS = {"fourier": _analyze_fourier, "envelope": _analyze_envelope, "p2p": _analyze_p2p}


def run_analyze(args) -> int:
    settings = _settings(args.config)
    traces = _with_params(read_trace_csv(args.traces), settings.params)
    try:
        entries, header, rows = ANALYZERS[args.mode](traces)
    except LzsmError as ex:
        logger.error("%s analysis failed: %s (%s)", args.mode, ex, ANALYZE_GUIDANCE[args.mode])
        raise
    if args.out is not None:
        pd.DataFrame(rows, columns=header, dtype=float).to_csv(args.out, index=False)
    _emit([("mode", args.mode)] + entries, args.report)
    return EXIT_OK


def synthetic_traces(settings: Settings, seed, noise) -> List[Trace]:
    """
    Normalized model traces at the configured sweep with additive Gaussian noise of
    standard deviation ``noise``
    """
    rng = np.random.default_rng(seed)
    traces = []
    for t in simulate_trace(settings.sweep, settings.params):
        normalized = capacitance.normalize_trace(t)
        traces.append(
            normalized.with_values(normalized.values + noise * rng.standard_normal(len(t)))
        )
    return traces


def _free_names(args, settings):
    if args.free is None:
        return [canonical_name(n) for n in settings.fit.free]
    names = [n.strip() for n in args.free.split(",") if n.strip()]
    if not names:
        raise UsageError("--free: Expected at least one parameter name")
    return [canonical_name(n) for n in names]


def run_fit(args) -> int:
    settings = _settings(args.config)
    free = _free_names(args, settings)
    seed = settings.fit.seed if args.seed is None else args.seed
    if args.synthetic:
        noise = settings.fit.noise if args.noise is None else args.noise
        if not (math.isfinite(noise) and noise >= 0):
            raise UsageError("--noise: Got {}; Expected a finite non-negative number".format(noise))
        measured = synthetic_traces(settings, seed, noise)
    elif args.measured is None:
        raise UsageError("fit: Expected a measured trace file or --synthetic")
    else:
        measured = _with_params(read_trace_csv(args.measured), settings.params)
    result = analysis.fit_parameters(
        measured, free, settings.params, bounds=settings.fit.bounds_dict()
    )
    entries = [("seed", seed)] + fit_report(result)
    if args.out is not None:
        write_report(entries, args.out)
    sys.stdout.write(format_report(entries))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _check(name, error, tolerance):
    passed = bool(np.isfinite(error) and error <= tolerance)
    return name, passed, float(error), tolerance


def verification_checks():
    """
    (name, passed, error, tolerance) for every cross-check between the closed forms and
    the independent oracles
    """
    results = []
    worst = max(
        abs(b[0] ** 2 + 2.0 * np.sum(b[1:] ** 2) - 1.0)
        for b in (specfun.bessel_j_orders(int(z) + 60, z) for z in BESSEL_ARGUMENTS)
    )
    results.append(_check("bessel_normalization", worst, 1e-10))

    ai, aip = specfun.airy(0.0)
    results.append(
        _check("airy_origin", max(abs(ai - AIRY_AI_ORIGIN), abs(aip - AIRY_AI_PRIME_ORIGIN)), 1e-14)
    )
    points = np.array([-7.5, -3.0, -0.5, 1.0, 4.0, 7.0])
    second = oracle.finite_difference(specfun.airy_ai_prime, points, 1e-3, richardson=True)
    scale = np.maximum(np.abs(points * specfun.airy_ai(points)), 1e-3)
    results.append(
        _check("airy_differential_equation", float(np.max(np.abs(second - points * specfun.airy_ai(points)) / scale)), 1e-6)
    )

    params = ModelParams()
    rate = params.rate_params()
    bessel, airy = oracle.windowed_rate_integrals(rate, 0.75, 1.5)
    results.append(_check("airy_vs_bessel_window", abs(airy - bessel) / abs(bessel), 0.05))

    eps0 = 0.8 * params.amplitude
    quadrature = oracle.numeric_rate_integral(eps0, rate, 40 * rate.t2)
    closed = float(dynamics.lzsm_rate_bessel_sum(eps0, rate))
    results.append(_check("rate_quadrature_vs_bessel_sum", abs(quadrature - closed) / abs(closed), 1e-6))

    worst = 0.0
    for w, gamma1 in ((0.0, 0.02), (0.02, 0.02), (0.5, 0.02)):
        t_end = 100.0 / (2 * w + gamma1)
        final = oracle.integrate_rate_equation(w, gamma1, 0.3, t_end).final.p_g
        worst = max(worst, abs(final - dynamics.stationary_pg(w, gamma1).p_g))
    results.append(_check("ode_vs_stationary", worst, 1e-8))

    rel, res = params.relaxation(), params.reservoir()
    x = 0.5 * params.eps_hat
    numeric = oracle.finite_difference(
        lambda e: float(dynamics.p11(e, rate, rel, res)), x, 1e-2, richardson=True
    )
    closed = float(dynamics.dp11_deps_full(x, rate, rel, res))
    results.append(_check("dp11_vs_finite_difference", abs(numeric - closed) / abs(closed), 1e-6))

    ratio = capacitance.voltage_period(params.omega, 0.06) / (
        math.pi * HBAR * params.omega / (2 * math.sqrt(2) * 0.06 * UEV_PER_EV)
    )
    results.append(_check("voltage_period", abs(ratio - 1.0), 1e-10))
    return results


def run_verify(args) -> int:
    start = time.perf_counter()
    results = verification_checks()
    entries = []
    for name, passed, error, tolerance in results:
        entries.append((name, "PASS" if passed else "FAIL"))
        entries.append(("{}.error".format(name), error))
        entries.append(("{}.tolerance".format(name), tolerance))
    failed = [name for name, passed, _, _ in results if not passed]
    entries.append(("failed", ", ".join(failed) if failed else "none"))
    entries.append(("seconds", round(time.perf_counter() - start, 3)))
    _emit(entries, args.out)
    for name in failed:
        logger.error("verification check %s failed", name)
    return EXIT_OK if not failed else EXIT_MODEL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lzsmcap", description="Parametric capacitance of a driven double quantum dot")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    def common(sub):
        sub.add_argument("--config", help="key = value configuration file")
        sub.add_argument("--out", help="output file")
        sub.add_argument("--seed", type=int, help="random seed")

    simulate = subparsers.add_parser("simulate", help="one trace at the first configured frequency")
    common(simulate)
    simulate.add_argument("--report", help="also write the summary to this file")
    simulate.set_defaults(handler=run_simulate)

    sweep = subparsers.add_parser("sweep", help="one trace per configured frequency")
    common(sweep)
    sweep.add_argument("--report", help="also write the summary to this file")
    sweep.set_defaults(handler=run_sweep)

    analyze = subparsers.add_parser("analyze", help="Fourier, envelope or peak-to-peak analysis")
    common(analyze)
    analyze.add_argument("traces", help="trace CSV file")
    analyze.add_argument("--mode", required=True, choices=sorted(ANALYZERS))
    analyze.add_argument("--report", help="also write the report to this file")
    analyze.set_defaults(handler=run_analyze)

    fit = subparsers.add_parser("fit", help="fit model parameters to traces")
    common(fit)
    fit.add_argument("measured", nargs="?", help="measured or simulated trace CSV file")
    fit.add_argument("--free", help="comma separated free parameters, e.g. t1,t2,tr")
    fit.add_argument("--synthetic", action="store_true", help="fit model pseudo-data")
    fit.add_argument("--noise", type=float, help="standard deviation of the synthetic noise")
    fit.set_defaults(handler=run_fit)

    verify = subparsers.add_parser("verify", help="run the oracle cross-checks")
    common(verify)
    verify.set_defaults(handler=run_verify)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as ex:
        sys.stderr.write("usage error: {}\n".format(ex))
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        _check_out(args.out)
        return args.handler(args)
    except UsageError as ex:
        sys.stderr.write("usage error: {}\n".format(ex))
        return EXIT_USAGE
    except (OSError, ConfigError, TraceFormatError) as ex:
        sys.stderr.write("input/output error: {}\n".format(ex))
        return EXIT_IO
    except (LzsmError, ValueError, ArithmeticError) as ex:
        sys.stderr.write("error: {}\n".format(ex))
        return EXIT_MODEL
