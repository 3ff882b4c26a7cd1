"""Error hierarchy and the CLI exit code each error maps to."""

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_SOLVER_INCOMPLETE = 3
EXIT_ORACLE_REFUSED = 4


class NumError(Exception):
    """Base class for all solver and harness errors."""

    exit_code: int = EXIT_INVALID_INPUT


class InvalidProblemError(NumError, ValueError):
    """A problem instance or instance file violates an invariant."""


class DomainError(NumError, ValueError):
    """A point lies outside the utility domain (x_k <= 0)."""


class ConfigurationError(NumError, ValueError):
    """A solver configuration is incompatible with the problem."""


class UsageError(NumError, ValueError):
    """Bad command-line usage or empty input to a reporting step."""


class GenerationError(NumError):
    """The instance generator could not produce a valid routing matrix."""


class NoProductiveStepsError(NumError):
    """A run ended without a single productive step."""

    exit_code = EXIT_SOLVER_INCOMPLETE


class SingularEllipsoidError(NumError):
    """The ellipsoid shape factor lost full rank."""

    exit_code = EXIT_SOLVER_INCOMPLETE


class OracleRefusedError(NumError):
    """The reference oracle refuses instances above its size guard."""

    exit_code = EXIT_ORACLE_REFUSED


class OracleFailureError(NumError):
    """No KKT-consistent active set was found."""

    exit_code = EXIT_SOLVER_INCOMPLETE
