from pytest import raises

from lzsmcap.errors import (
    ConfigError,
    DegenerateInputError,
    Diagnostic,
    DomainError,
    InsufficientDataError,
    InvalidArgumentError,
    LzsmError,
    NumericRangeError,
    ResourceError,
    TraceFormatError,
    config_error_from,
    diagnostic_for,
)
from lzsmcap.structures import ModelParams


def test_hierarchy():
    assert issubclass(InvalidArgumentError, ValueError)
    assert issubclass(DomainError, ValueError)
    assert issubclass(DegenerateInputError, ValueError)
    assert issubclass(InsufficientDataError, ValueError)
    assert issubclass(NumericRangeError, ArithmeticError)
    assert issubclass(ResourceError, RuntimeError)
    for cls in (InvalidArgumentError, DomainError, ConfigError, TraceFormatError, ResourceError):
        assert issubclass(cls, LzsmError)


def test_config_error_names_line_and_key():
    err = ConfigError("t2_ps: Expected a positive number", key="t2_ps", line=4)
    assert str(err) == "line 4: t2_ps: Expected a positive number"
    assert err.key == "t2_ps"
    assert err.line == 4


def test_trace_format_error_names_row():
    err = TraceFormatError("Expected a number", row=7)
    assert str(err) == "row 7: Expected a number"
    assert err.row == 7


def test_diagnostic_from_validation_error():
    with raises(ValueError) as excinfo:
        ModelParams(t2=-1.0)
    assert diagnostic_for(excinfo.value) == Diagnostic(
        key="t2", value="-1.0", problem="Expected a positive number"
    )


def test_diagnostic_keeps_line():
    with raises(ValueError) as excinfo:
        ModelParams(alpha1=2.0)
    diagnostic = diagnostic_for(excinfo.value, line=3)
    assert diagnostic.key == "alpha1"
    assert diagnostic.line == 3


def test_config_error_from_validation_error():
    with raises(ValueError) as excinfo:
        ModelParams(t1=0)
    err = config_error_from(excinfo.value, line=2)
    assert err.key == "t1"
    assert str(err).startswith("line 2: t1: Expected a positive number")


def test_diagnostic_is_immutable():
    d = Diagnostic(problem="x")
    with raises(ValueError):
        d.problem = "y"
