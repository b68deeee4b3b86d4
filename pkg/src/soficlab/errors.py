"""Exception classes with stable exit codes for the CLI."""


class SoficLabError(Exception):
    exit_code = 10


class SchemaError(SoficLabError):
    """Model/config file failed validation."""

    exit_code = 2


class CapExceededError(SoficLabError):
    """Requested object larger than the configured size cap."""

    exit_code = 3


class BudgetExceededError(SoficLabError):
    """Combinatorial search budget exhausted before a definitive answer."""

    exit_code = 4


class NoSafeSymbolError(SoficLabError):
    """Operation requires a safe symbol and the structure has none."""

    exit_code = 5


class NoConsistentColorError(SoficLabError):
    """Greedy extension got stuck; certificate or input was invalid."""

    exit_code = 6


class InconsistentPinsError(SoficLabError):
    """Two adjacent vertices pinned occupied."""

    exit_code = 7


class WrongBuilderError(SoficLabError):
    """Operation restricted to a specific sofic-map builder."""

    exit_code = 8


class BallMismatchError(SoficLabError):
    """Two groups do not share the required ball structure."""

    exit_code = 9


class EmptyFiberError(SoficLabError):
    """No interior completion of an admissible boundary; internal error."""

    exit_code = 11
