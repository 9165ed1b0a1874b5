class HelmDDMError(Exception):
    """Base class for all package errors."""


class ConfigError(HelmDDMError, ValueError):
    pass


class DomainError(HelmDDMError, ValueError):
    pass


class ContractError(HelmDDMError, ValueError):
    """A caller broke an operation's precondition (shape, index range, ...)."""


class SingularMatrixError(HelmDDMError, ArithmeticError):
    pass


class SolverError(HelmDDMError, RuntimeError):
    pass
