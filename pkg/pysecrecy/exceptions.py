"""Secrecy simulator exceptions."""


class SecrecyException(Exception):
    """Exception raised by the simulator."""

    pass


class ConfigError(SecrecyException):
    """One or more configuration invariants are violated."""

    violations: list[str]

    def __init__(self, violations: list[str] | str):
        """Initialize with the named violations."""
        if isinstance(violations, str):
            violations = [violations]

        self.violations = list(violations)

        super().__init__("; ".join(self.violations))


class NumericalError(SecrecyException):
    """A numerical step could not be carried out reliably."""

    pass


class SingularMatrixError(NumericalError):
    """A matrix that must be inverted is singular or ill-conditioned."""

    pass


class RankDeficientError(NumericalError):
    """The estimated channel matrix does not have full column rank."""

    pass


class EveBoundUndefinedError(NumericalError):
    """The eavesdropper capacity bound needs L > N_E."""

    pass


class EveCapacityUnboundedError(SecrecyException):
    """No artificial noise is sent, so the eavesdropper is unbounded."""

    pass


class OutputError(SecrecyException):
    """A result file could not be written."""

    pass
