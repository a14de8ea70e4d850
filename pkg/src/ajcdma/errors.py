"""Exception types raised by the simulator."""


class AjcdmaError(Exception):
    """Base class for all simulator errors."""


class ContractError(AjcdmaError, ValueError):
    """An input violates a documented precondition."""


class DimensionError(ContractError):
    pass


class ParameterError(ContractError):
    pass


class CapacityError(ParameterError):
    """More users requested than there are spreading codes."""


class DegenerateInputError(AjcdmaError, ValueError):
    """Input is structurally degenerate (zero matrix, singular covariance, ...)."""


class SingularChannelError(DegenerateInputError):
    """Downlink channel has a (near) zero frequency-domain coefficient."""


class NumericalFailure(AjcdmaError, ArithmeticError):
    """An iterative linear-algebra routine failed to converge."""
