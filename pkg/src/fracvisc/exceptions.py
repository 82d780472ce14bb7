"""Exception hierarchy shared by the model, fitting and sensitivity code."""


class FracViscError(Exception):
    """Base class for all errors raised by fracvisc."""


class DomainError(FracViscError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class DegenerateExponentError(DomainError):
    """A fractional branch has alpha == beta, for which E_c and tau_c are undefined."""


class ConfigError(FracViscError, ValueError):
    """Invalid configuration: bounds, optimizer settings, grids or run files."""


class DataError(FracViscError, ValueError):
    """A master-curve file or array failed validation."""


class ParseError(DataError):
    pass


class OrderError(DataError):
    pass


class EmptyDataError(DataError):
    pass
