from pytest import approx, fixture, mark

from lzsmcap import specfun
from lzsmcap.cli import (
    EXIT_IO,
    EXIT_MODEL,
    EXIT_OK,
    EXIT_USAGE,
    main,
    synthetic_traces,
    verification_checks,
)
from lzsmcap.serialization import parse_config, parse_report, read_trace_csv


@fixture(name="config")
def fixture_config(tmp_path):
    path = tmp_path / "device.cfg"
    path.write_text(
        "n_points = 401\nsweep_start = 0.05\nsweep_stop = 1.3\nomega_ghz = 8, 16\n",
        encoding="utf-8",
    )
    return str(path)


def _report(capsys):
    return parse_report(capsys.readouterr().out)


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["explode"]) == EXIT_USAGE
    assert main(["analyze", "traces.csv"]) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_synthetic_noise_must_be_finite(config):
    assert main(["fit", "--synthetic", "--config", config, "--noise", "nan"]) == EXIT_USAGE


def test_missing_output_directory(tmp_path, config):
    out = str(tmp_path / "missing" / "trace.csv")
    assert main(["simulate", "--config", config, "--out", out]) == EXIT_USAGE


def test_missing_config_file(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "none.cfg")]) == EXIT_IO
    assert "input/output error" in capsys.readouterr().err


def test_invalid_config(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("t2_ps = -1\n", encoding="utf-8")
    assert main(["simulate", "--config", str(path)]) == EXIT_IO
    assert "line 1: t2_ps" in capsys.readouterr().err


def test_simulate(tmp_path, config, capsys):
    out = tmp_path / "trace.csv"
    report = tmp_path / "report.txt"
    assert main(["simulate", "--config", config, "--out", str(out), "--report", str(report)]) == EXIT_OK
    summary = _report(capsys)
    assert float(summary["omega_ghz"]) == approx(8.0)
    assert int(summary["points"]) == 401
    assert int(summary["oscillation_count"]) > 3
    assert float(summary["decay_slope_per_reduced_detuning"]) < 0
    assert float(summary["param.t2"]) == approx(0.035)
    assert parse_report(report.read_text(encoding="utf-8")) == summary
    (trace,) = read_trace_csv(str(out))
    assert len(trace) == 401


def test_simulate_without_tunnel_coupling_warns(tmp_path, caplog):
    path = tmp_path / "zero.cfg"
    path.write_text("delta_uev = 0\nn_points = 11\nsweep_start = 0.1\nsweep_stop = 1.0\n", encoding="utf-8")
    assert main(["simulate", "--config", str(path)]) == EXIT_OK
    assert "tunnel coupling is zero" in caplog.text


def test_sweep(tmp_path, config, capsys):
    out = tmp_path / "traces.csv"
    assert main(["sweep", "--config", config, "--out", str(out)]) == EXIT_OK
    summary = _report(capsys)
    assert summary["traces"] == "2"
    assert float(summary["trace.1.omega_ghz"]) == approx(16.0)
    assert len(read_trace_csv(str(out))) == 2


def test_analyze_modes(tmp_path, config, capsys):
    traces = tmp_path / "traces.csv"
    assert main(["sweep", "--config", config, "--out", str(traces)]) == EXIT_OK
    capsys.readouterr()

    assert main(["analyze", str(traces), "--mode", "fourier", "--config", config]) == EXIT_OK
    fourier = _report(capsys)
    assert fourier["mode"] == "fourier"
    assert float(fourier["trace.0.period_mv"]) > 0
    assert "alpha_minus" in fourier

    out = tmp_path / "p2p.csv"
    assert main(["analyze", str(traces), "--mode", "p2p", "--config", config, "--out", str(out)]) == EXIT_OK
    p2p = _report(capsys)
    assert p2p["traces"] == "2"
    assert out.read_text(encoding="utf-8").splitlines()[0] == "omega_ghz,peak_to_peak"


def test_analyze_failure_gives_guidance(tmp_path, caplog, capsys):
    traces = tmp_path / "short.csv"
    traces.write_text("v_tg_volts,phase_norm\n0.470,0.1\n0.471,0.2\n", encoding="utf-8")
    assert main(["analyze", str(traces), "--mode", "fourier"]) == EXIT_MODEL
    assert "needs at least 4 oscillation periods" in caplog.text
    assert "error:" in capsys.readouterr().err


def test_analyze_malformed_file(tmp_path):
    traces = tmp_path / "bad.csv"
    traces.write_text("v_tg_volts,phase_norm\n0.470,zero\n", encoding="utf-8")
    assert main(["analyze", str(traces), "--mode", "fourier"]) == EXIT_IO


def test_synthetic_traces_are_seeded():
    settings = parse_config("n_points = 51\nsweep_start = 0.1\nsweep_stop = 0.9\n")
    first = synthetic_traces(settings, 7, 0.05)
    assert first == synthetic_traces(settings, 7, 0.05)
    assert first != synthetic_traces(settings, 8, 0.05)
    assert all(t.normalized for t in first)


def test_fit_synthetic_without_noise(tmp_path, config, capsys):
    out = tmp_path / "fit.txt"
    assert main(["fit", "--synthetic", "--free", "t2", "--config", config, "--out", str(out)]) == EXIT_OK
    report = _report(capsys)
    assert report["converged"] == "true"
    assert float(report["fit.t2"]) == approx(0.035)
    assert parse_report(out.read_text(encoding="utf-8"))["seed"] == "0"


def test_fit_measured_file(tmp_path, config, capsys):
    traces = tmp_path / "traces.csv"
    assert main(["sweep", "--config", config, "--out", str(traces)]) == EXIT_OK
    capsys.readouterr()
    assert main(["fit", str(traces), "--free", "tr", "--config", config]) == EXIT_OK
    assert float(_report(capsys)["fit.t_r"]) == approx(0.030, rel=1e-9)


def test_fit_usage(config):
    assert main(["fit", "--config", config]) == EXIT_USAGE
    assert main(["fit", "--synthetic", "--free", " , ", "--config", config]) == EXIT_USAGE
    assert main(["fit", "--synthetic", "--free", "colour", "--config", config]) == EXIT_MODEL


def test_verify_passes(tmp_path, capsys):
    out = tmp_path / "verify.txt"
    assert main(["verify", "--out", str(out)]) == EXIT_OK
    report = _report(capsys)
    assert report["failed"] == "none"
    assert report["airy_origin"] == "PASS"
    assert parse_report(out.read_text(encoding="utf-8"))["failed"] == "none"


def test_verification_check_names():
    names = [name for name, _, _, _ in verification_checks()]
    assert names == [
        "bessel_normalization",
        "airy_origin",
        "airy_differential_equation",
        "airy_vs_bessel_window",
        "rate_quadrature_vs_bessel_sum",
        "ode_vs_stationary",
        "dp11_vs_finite_difference",
        "voltage_period",
    ]


@mark.parametrize("value", [0.36, 0.3550280538877])
def test_verify_detects_broken_airy_constant(monkeypatch, capsys, value):
    monkeypatch.setattr(specfun, "AIRY_C1", value)
    assert main(["verify"]) == EXIT_MODEL
    report = _report(capsys)
    assert report["airy_origin"] == "FAIL"
    assert "airy_origin" in report["failed"]


def test_analyze_fourier_recovers_lever_arm_from_full_traces(tmp_path, capsys):
    config = tmp_path / "law.cfg"
    config.write_text(
        "omega_ghz = 4.72, 6.9, 8, 11, 15, 21\nsweep_start = 0.02\nsweep_stop = 0.98\n"
        "n_points = 4001\n",
        encoding="utf-8",
    )
    traces = tmp_path / "traces.csv"
    assert main(["sweep", "--config", str(config), "--out", str(traces)]) == EXIT_OK
    capsys.readouterr()
    assert main(["analyze", str(traces), "--mode", "fourier", "--config", str(config)]) == EXIT_OK
    report = _report(capsys)
    assert report["period_axis"] == "chirp-free detuning"
    assert float(report["alpha_minus"]) == approx(0.06, rel=0.05)
    assert float(report["r_squared"]) > 0.99
