"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition."""


class ConfigError(InvalidInputError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.reason = message
        self.key = key
        self.line = line


class NumericalFailure(RuntimeError):
    """The simulation cannot continue (element inversion, blow-up, NaN)."""

    def __init__(self, message, step=None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class ElementInversionError(NumericalFailure):
    def __init__(self, element, det, step=None):
        super().__init__(f"element {element} inverted (det F = {det:.6g})", step=step)
        self.element = element
        self.det = det


class TransferConsistencyError(RuntimeError):
    """Grid and particle set used in a transfer pair do not match."""
