"""Exception hierarchy.

``InputError`` covers malformed quotes, schedules and files; ``ConfigurationError``
covers a request the current objects cannot serve (missing tenor curve, bad
weights); ``NumericalError`` covers solver and quadrature failures. The CLI maps
the first two to exit code 1 and the last to exit code 2.
"""


class MulticurveError(Exception):
    pass


class InputError(MulticurveError, ValueError):
    pass


class ConfigurationError(MulticurveError, ValueError):
    pass


class NumericalError(MulticurveError, ArithmeticError):
    pass


class BootstrapError(NumericalError):
    def __init__(self, message: str, pillar: str | None = None):
        super().__init__(message if pillar is None else f"{pillar}: {message}")
        self.pillar = pillar


class CalibrationError(NumericalError):
    pass


class CalibrationWarning(UserWarning):
    pass
