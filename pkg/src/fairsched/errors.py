"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameter value."""


class CapacityError(ValueError):
    """A coalition is too large for an exponential algorithm."""


class ContractViolation(RuntimeError):
    """A caller broke a documented precondition."""


class DomainError(ValueError):
    """A quantity is undefined for the given input."""


class SWFParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
