"""
Exceptions raised by lzsmcap, and conversion of typedpy validation errors to
key-naming diagnostics.
"""
from typedpy import ImmutableStructure, Integer, String, standard_readable_error_for_typedpy_exception


class LzsmError(Exception):
    """Base class of every error raised by lzsmcap"""


class InvalidArgumentError(LzsmError, ValueError):
    pass


class DomainError(LzsmError, ValueError):
    """
    An argument is outside the domain of the model, e.g. the reservoir crossing
    is never reached by the drive.
    """


class DegenerateInputError(LzsmError, ValueError):
    pass


class InsufficientDataError(LzsmError, ValueError):
    pass


class NumericRangeError(LzsmError, ArithmeticError):
    pass


class ResourceError(LzsmError, RuntimeError):
    pass


class ConfigError(LzsmError, ValueError):
    """
    Invalid configuration file. Carries the offending key and the line number when known.
    """

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        prefix = "line {}: ".format(line) if line is not None else ""
        super().__init__(prefix + message)


class TraceFormatError(LzsmError, ValueError):
    """
    Malformed trace CSV. Carries the 1-based row number (header is row 1).
    """

    def __init__(self, message, row=None):
        self.row = row
        prefix = "row {}: ".format(row) if row is not None else ""
        super().__init__(prefix + message)


class Diagnostic(ImmutableStructure):
    key = String
    value = String
    problem = String
    line = Integer
    _required = ["problem"]


def diagnostic_for(ex: Exception, line=None) -> Diagnostic:
    """
    Convert a typedpy validation error (e.g. "t2_ps: Got -1.0; Expected a positive number")
    into a :class:`Diagnostic` naming the key.
    """
    info = standard_readable_error_for_typedpy_exception(ex)
    if isinstance(info, list):
        info = info[0]
    fields = {"problem": str(info.problem)}
    if info.field is not None:
        fields["key"] = info.field
    if info.value is not None:
        fields["value"] = info.value
    if line is not None:
        fields["line"] = line
    return Diagnostic(**fields)


def config_error_from(ex: Exception, line=None) -> ConfigError:
    diagnostic = diagnostic_for(ex, line=line)
    if diagnostic.key is None:
        return ConfigError(diagnostic.problem, line=line)
    got = "; Got {}".format(diagnostic.value) if diagnostic.value is not None else ""
    return ConfigError(
        "{}: {}{}".format(diagnostic.key, diagnostic.problem, got),
        key=diagnostic.key,
        line=line,
    )
