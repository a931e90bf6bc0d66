"""
Configuration files, trace CSV files and key = value reports.

A configuration file is flat ``key = value`` text with ``#`` comments. Every key carries
its unit in its name (``t2_ps``, ``a_mev``, ...); values are converted to the internal
units on load.
"""
import io
import logging
import re
from collections import OrderedDict
from typing import Iterable, List

import numpy as np
import pandas as pd
from typedpy import (
    Array,
    Enum,
    Float,
    ImmutableStructure,
    Integer,
    Map,
    String,
    Structure,
    serialize,
)

from lzsmcap.capacitance import normalize_trace
from lzsmcap.errors import (
    ConfigError,
    DegenerateInputError,
    TraceFormatError,
    config_error_from,
    diagnostic_for,
)
from lzsmcap.fields import (
    Energy,
    FiniteFloat,
    Fraction,
    NonNegativeEnergy,
    NonNegativeFiniteFloat,
    PositiveFiniteFloat,
    Voltage,
)
from lzsmcap.structures import Axis, Branch, FitResult, ModelParams, SweepSpec, Trace
from lzsmcap.units import (
    angular_frequency,
    ff_to_farad,
    frequency_ghz,
    mev_to_uev,
    ps_to_ns,
)

logger = logging.getLogger(__name__)

SIMULATED_COLUMNS = [
    "axis_name",
    "axis_value",
    "c_pm_farads",
    "c_pm_norm",
    "omega_ghz",
    "branch",
    "gap_flag",
]
MEASURED_COLUMNS = ["v_tg_volts", "phase_norm"]
PHASE_SANITY_BAND = 1.5

DEFAULT_FIT_FREE = ["t1", "t2", "tr"]


def _bounds_field():
    return Array(items=PositiveFiniteFloat, minItems=2, maxItems=2)


class ConfigFile(Structure):
    """
    The raw content of a configuration file, one field per recognised key.
    """

    delta_uev: NonNegativeEnergy = 2.0
    alpha1: Fraction = 0.40
    alpha2: Fraction = 0.52
    alpha_minus = Fraction
    eps_hat_mev = Energy
    vtg0_v: Voltage = 0.475
    cg1_ff: PositiveFiniteFloat = 10.0
    cg2_ff: PositiveFiniteFloat = 10.0
    cm_ff: PositiveFiniteFloat = 0.5
    cd_ff: PositiveFiniteFloat = 10.0
    q_factor: PositiveFiniteFloat = 40.0
    cp_ff: PositiveFiniteFloat = 660.0
    a_mev: PositiveFiniteFloat = 1.35
    omega_ghz = Array(items=PositiveFiniteFloat, minItems=1)
    branch: Enum(values=[b.value for b in Branch]) = Branch.RESERVOIR_01_11.value
    t1_ns: PositiveFiniteFloat = 50.0
    t2_ps: PositiveFiniteFloat = 35.0
    tr_ps: PositiveFiniteFloat = 30.0
    axis: Enum(values=[a.value for a in Axis]) = Axis.DETUNING_REDUCED.value
    sweep_start: FiniteFloat = -1.2
    sweep_stop: FiniteFloat = 1.5
    n_points: Integer(minimum=2) = 2001
    fit_free = Array(items=String, minItems=1)
    t1_bounds_ns = _bounds_field()
    t2_bounds_ps = _bounds_field()
    tr_bounds_ps = _bounds_field()
    alpha_minus_bounds = _bounds_field()
    delta_bounds_uev = _bounds_field()
    seed: Integer(minimum=0) = 0
    noise: NonNegativeFiniteFloat = 0.0

    _optional = [
        "alpha_minus",
        "eps_hat_mev",
        "omega_ghz",
        "fit_free",
        "t1_bounds_ns",
        "t2_bounds_ps",
        "tr_bounds_ps",
        "alpha_minus_bounds",
        "delta_bounds_uev",
    ]
    _additionalProperties = False


class FitSettings(ImmutableStructure):
    free = Array[String]
    bounds = Map[String, Array[Float]]
    seed: Integer(minimum=0) = 0
    noise: NonNegativeFiniteFloat = 0.0

    def bounds_dict(self):
        return {name: (low, high) for name, (low, high) in self.bounds.items()}


class Settings(ImmutableStructure):
    """
    A validated configuration: model parameters, the sweep and the fit settings.
    """

    params: ModelParams
    sweep: SweepSpec
    fit: FitSettings


# model and sweep field names, mapped back to the key the user wrote
_KEY_FOR_FIELD = {
    "delta": "delta_uev",
    "alpha1": "alpha1",
    "alpha2": "alpha2",
    "eps_hat": "eps_hat_mev",
    "vtg0": "vtg0_v",
    "amplitude": "a_mev",
    "t1": "t1_ns",
    "t2": "t2_ps",
    "t_r": "tr_ps",
    "c_g1": "cg1_ff",
    "c_g2": "cg2_ff",
    "c_m": "cm_ff",
    "c_d": "cd_ff",
    "q_factor": "q_factor",
    "c_p": "cp_ff",
    "start": "sweep_start",
    "stop": "sweep_stop",
    "n_points": "n_points",
    "frequencies": "omega_ghz",
}

_BOUND_KEYS = OrderedDict(
    [
        ("t1", ("t1_bounds_ns", 1.0)),
        ("t2", ("t2_bounds_ps", 1e-3)),
        ("t_r", ("tr_bounds_ps", 1e-3)),
        ("alpha_minus", ("alpha_minus_bounds", 1.0)),
        ("delta", ("delta_bounds_uev", 1.0)),
    ]
)


def _convert_value(field, text):
    if isinstance(field, Array):
        items = [s.strip() for s in text.split(",") if s.strip()]
        if isinstance(field.items, String):
            return items
        return [float(s) for s in items]
    if isinstance(field, Integer):
        return int(text)
    if isinstance(field, Enum):
        return text
    return float(text)


def _parse_lines(text):
    fields = ConfigFile.get_all_fields_by_name()
    values, lines = {}, {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        key, separator, value = content.partition("=")
        key, value = key.strip(), value.strip()
        if not separator or not key:
            raise ConfigError("Expected a line of the form key = value", line=line_number)
        if key not in fields:
            raise ConfigError("unknown key {}".format(key), key=key, line=line_number)
        if key in values:
            raise ConfigError(
                "{}: duplicate key; first given on line {}".format(key, lines[key]),
                key=key,
                line=line_number,
            )
        try:
            values[key] = _convert_value(fields[key], value)
        except ValueError:
            raise ConfigError(
                "{}: Got {}; Expected a value of type {}".format(
                    key, value, fields[key].__class__.__name__
                ),
                key=key,
                line=line_number,
            ) from None
        lines[key] = line_number
    return values, lines


def _config_error(ex, lines, rename=None):
    diagnostic = diagnostic_for(ex)
    key = diagnostic.key
    if rename is not None and key is not None:
        key = rename.get(key, key)
        message = "{}: {}".format(key, diagnostic.problem)
        if diagnostic.value is not None:
            message += "; Got {}".format(diagnostic.value)
        return ConfigError(message, key=key, line=lines.get(key))
    return config_error_from(ex, line=lines.get(key))


def _model_params(config: ConfigFile) -> ModelParams:
    amplitude = mev_to_uev(config.a_mev)
    eps_hat = amplitude if config.eps_hat_mev is None else mev_to_uev(config.eps_hat_mev)
    alpha2 = config.alpha2
    if config.alpha_minus is not None:
        alpha2 = config.alpha1 + 2.0 * config.alpha_minus
    frequencies = config.omega_ghz or [11.0]
    return ModelParams(
        delta=config.delta_uev,
        alpha1=config.alpha1,
        alpha2=alpha2,
        eps_hat=eps_hat,
        vtg0=config.vtg0_v,
        amplitude=amplitude,
        omega=angular_frequency(frequencies[0]),
        t1=config.t1_ns,
        t2=ps_to_ns(config.t2_ps),
        t_r=ps_to_ns(config.tr_ps),
        c_g1=ff_to_farad(config.cg1_ff),
        c_g2=ff_to_farad(config.cg2_ff),
        c_m=ff_to_farad(config.cm_ff),
        c_d=ff_to_farad(config.cd_ff),
        q_factor=config.q_factor,
        c_p=ff_to_farad(config.cp_ff),
        branch=Branch(config.branch),
    )


def _sweep_spec(config: ConfigFile) -> SweepSpec:
    return SweepSpec(
        axis=Axis(config.axis),
        start=config.sweep_start,
        stop=config.sweep_stop,
        n_points=config.n_points,
        frequencies=[angular_frequency(f) for f in (config.omega_ghz or [11.0])],
        branch=Branch(config.branch),
    )


def _fit_settings(config: ConfigFile, lines) -> FitSettings:
    bounds = {}
    for name, (key, scale) in _BOUND_KEYS.items():
        given = getattr(config, key)
        if given is None:
            continue
        low, high = given
        if not low < high:
            raise ConfigError(
                "{}: Got {}, {}; Expected low < high".format(key, low, high),
                key=key,
                line=lines.get(key),
            )
        bounds[name] = [low * scale, high * scale]
    return FitSettings(
        free=list(config.fit_free or DEFAULT_FIT_FREE),
        bounds=bounds,
        seed=config.seed,
        noise=config.noise,
    )


def parse_config(text: str) -> Settings:
    """
    Parse and validate configuration text. An empty text gives the default settings.

    Raises:
        ConfigError: naming the line and the key for every parse or validation failure
    """
    values, lines = _parse_lines(text)
    try:
        config = ConfigFile(**values)
    except (TypeError, ValueError) as ex:
        raise _config_error(ex, lines) from ex
    try:
        params = _model_params(config)
        sweep = _sweep_spec(config)
    except (TypeError, ValueError) as ex:
        raise _config_error(ex, lines, rename=_KEY_FOR_FIELD) from ex
    fit = _fit_settings(config, lines)
    logger.debug("configuration parsed: %d keys given", len(values))
    return Settings(params=params, sweep=sweep, fit=fit)


def load_config(path) -> Settings:
    """
    Read and validate a configuration file.

    Raises:
        OSError: the file cannot be read
        ConfigError: the content is invalid
    """
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def _trace_frame(t: Trace) -> pd.DataFrame:
    if t.normalized:
        farads = [""] * len(t)
        norm = t.values
    else:
        farads = list(t.values)
        try:
            norm = normalize_trace(t).values
        except DegenerateInputError:
            logger.warning("trace at %s has no non-zero value; written as zeros", t.omega)
            norm = np.where(t.gaps, np.nan, 0.0)
    return pd.DataFrame(
        OrderedDict(
            [
                ("axis_name", t.axis.value),
                ("axis_value", t.x),
                ("c_pm_farads", pd.Series(farads, dtype=object)),
                ("c_pm_norm", norm),
                ("omega_ghz", "" if t.omega is None else frequency_ghz(t.omega)),
                ("branch", t.branch.value),
                ("gap_flag", np.where(t.gaps, "1", "0")),
            ]
        ),
        columns=SIMULATED_COLUMNS,
    )


def write_trace_csv(traces: Iterable[Trace], path):
    """
    Write traces in the simulated-trace schema, one row per sample. Normalized traces
    leave c_pm_farads empty.
    """
    frames = [_trace_frame(t) for t in traces]
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=SIMULATED_COLUMNS)
    table.to_csv(path, index=False, na_rep="nan", encoding="utf-8")


def _row_number(index):
    # header is row 1
    return int(index) + 2


def _first_bad(frame, mask, message):
    if mask.any():
        index = mask.idxmax()
        raise TraceFormatError(message(frame.loc[index]), row=_row_number(index))


def _numeric_column(frame, column, optional=False) -> pd.Series:
    raw = frame[column]
    text = raw.str.strip()
    parsed = pd.to_numeric(text, errors="coerce")
    bad = parsed.isna() & (text.str.lower() != "nan")
    if optional:
        bad &= raw.notna()
    _first_bad(
        frame,
        bad,
        lambda row: "{}: Got {!r}; Expected a number".format(
            column, "" if pd.isna(row[column]) else row[column]
        ),
    )
    # float() parses shortest-repr text exactly
    return text.astype(float)


def _required_column(frame, column):
    _first_bad(frame, frame[column].isna(), lambda row: "{}: Expected a value".format(column))


def _build_trace(group: pd.DataFrame, **fields) -> Trace:
    x = group["x"].to_numpy(dtype=float)
    values = group["value"].to_numpy(dtype=float)
    first_row = _row_number(group.index[0])
    steps = np.diff(x)
    if len(x) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise TraceFormatError("Expected a strictly monotone axis", row=first_row)
    if len(x) > 1 and steps[0] < 0:
        x, values = x[::-1].copy(), values[::-1].copy()
    try:
        return Trace(x=x, values=values, **fields)
    except ValueError as ex:
        raise TraceFormatError(str(ex), row=first_row) from ex


def _omega(value):
    return None if pd.isna(value) else angular_frequency(value)


def _read_simulated(frame: pd.DataFrame) -> List[Trace]:
    for column in ("axis_name", "axis_value", "c_pm_norm", "branch", "gap_flag"):
        _required_column(frame, column)
    known = frame["axis_name"].str.strip().isin([a.value for a in Axis]) & frame[
        "branch"
    ].str.strip().isin([b.value for b in Branch])
    _first_bad(
        frame,
        ~known,
        lambda row: "unknown axis {!r} or branch {!r}".format(row["axis_name"], row["branch"]),
    )
    normalized = frame["c_pm_farads"].isna()
    farads = _numeric_column(frame, "c_pm_farads", optional=True)
    norm = _numeric_column(frame, "c_pm_norm")
    table = pd.DataFrame(
        {
            "axis": frame["axis_name"].str.strip(),
            "omega": _numeric_column(frame, "omega_ghz", optional=True),
            "branch": frame["branch"].str.strip(),
            "x": _numeric_column(frame, "axis_value"),
            "value": norm.where(normalized, farads).mask(frame["gap_flag"].str.strip() == "1"),
            "normalized": normalized,
        }
    )

    traces = []
    for (axis, omega, branch), group in table.groupby(
        ["axis", "omega", "branch"], sort=False, dropna=False
    ):
        is_normalized = bool(group["normalized"].iloc[0])
        _first_bad(
            group,
            group["normalized"] != is_normalized,
            lambda row: "c_pm_farads given for part of a trace only",
        )
        traces.append(
            _build_trace(
                group,
                axis=Axis(axis),
                branch=Branch(branch),
                normalized=is_normalized,
                omega=_omega(omega),
            )
        )
    return traces


def _read_measured(frame: pd.DataFrame) -> List[Trace]:
    v_tg = _numeric_column(frame, "v_tg_volts")
    phase = _numeric_column(frame, "phase_norm")
    _first_bad(
        frame,
        ~phase.between(-PHASE_SANITY_BAND, PHASE_SANITY_BAND),
        lambda row: "phase_norm: Got {}; Expected a value within [-{}, {}]".format(
            row["phase_norm"].strip(), PHASE_SANITY_BAND, PHASE_SANITY_BAND
        ),
    )
    if "omega_ghz" in frame.columns:
        omega = _numeric_column(frame, "omega_ghz", optional=True)
    else:
        omega = pd.Series(np.nan, index=frame.index)
    table = pd.DataFrame({"omega": omega, "x": v_tg, "value": phase})
    return [
        _build_trace(group, axis=Axis.GATE_VOLTAGE, normalized=True, omega=_omega(key))
        for key, group in table.groupby("omega", sort=False, dropna=False)
    ]


def _parser_row(ex):
    match = re.search(r"line (\d+)", str(ex))
    return int(match.group(1)) if match else None


def parse_trace_csv(text: str) -> List[Trace]:
    try:
        frame = pd.read_csv(
            io.StringIO(text), header=None, dtype=str, keep_default_na=False, na_values=[""]
        )
    except pd.errors.EmptyDataError:
        raise TraceFormatError("Expected a header row", row=1) from None
    except pd.errors.ParserError as ex:
        raise TraceFormatError("Expected one value per header column", row=_parser_row(ex)) from ex
    # the header row fixes the column count; wider rows are parser errors
    frame.columns = [str(c).strip() for c in frame.iloc[0]]
    frame = frame.iloc[1:]
    header = list(frame.columns)
    if all(c in header for c in SIMULATED_COLUMNS):
        reader = _read_simulated
    elif all(c in header for c in MEASURED_COLUMNS):
        reader = _read_measured
    else:
        raise TraceFormatError(
            "Expected the columns {} or {}; Got {}".format(
                ", ".join(SIMULATED_COLUMNS), ", ".join(MEASURED_COLUMNS), ", ".join(header)
            ),
            row=1,
        )
    if frame.empty:
        raise TraceFormatError("the file has a header but no data rows", row=2)
    return reader(frame.reset_index(drop=True))


def read_trace_csv(path) -> List[Trace]:
    """
    Read every trace of a CSV file, either a simulated-trace file or a measured file with
    v_tg_volts and phase_norm columns and an optional omega_ghz column. Rows are grouped
    into traces by frequency (and axis and branch for simulated files), in order of first
    appearance; a decreasing axis is reversed.

    Raises:
        OSError: the file cannot be read
        TraceFormatError: naming the offending row
    """
    with open(path, newline="", encoding="utf-8") as f:
        return parse_trace_csv(f.read())


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format(v) for v in value)
    return str(value)


def format_report(entries) -> str:
    """
    ``key = value`` lines, in the order given
    """
    items = entries.items() if isinstance(entries, dict) else entries
    return "".join("{} = {}\n".format(key, _format(value)) for key, value in items)


def parse_report(text: str) -> OrderedDict:
    result = OrderedDict()
    for line in text.splitlines():
        key, separator, value = line.partition(" = ")
        if separator:
            result[key.strip()] = value.strip()
    return result


def params_report(params: ModelParams, prefix="param"):
    return [("{}.{}".format(prefix, k), v) for k, v in sorted(serialize(params).items())]


def fit_report(result: FitResult):
    entries = [
        ("converged", result.converged),
        ("iterations", result.iterations),
        ("residual_norm", result.residual_norm),
        ("free", list(result.free)),
    ]
    for name in result.free:
        entries.append(("fit.{}".format(name), result.values[name]))
        entries.append(("fit.{}.uncertainty".format(name), result.uncertainties[name]))
    entries.extend(("warning.{}".format(i), w) for i, w in enumerate(result.warnings, start=1))
    entries.extend(params_report(result.params))
    return entries


def write_report(entries, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_report(entries))
