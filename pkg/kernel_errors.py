"""
Exception hierarchy for the time-periodic kernel library.

Everything derives from ValueError so callers that only care about
"bad input" can keep catching ValueError.
"""


class KernelError(ValueError):
    """Base class for all library errors."""


class DomainError(KernelError):
    """Argument outside the domain of a function (z = 0, n < 2, x <= 0, ...)."""


class SingularPointError(DomainError):
    """Kernel evaluated at its singular point x = 0."""



class MethodUnavailableError(KernelError):
    """Requested backend cannot evaluate this configuration."""


class ZeroModeError(KernelError):
    """Full resolvent requested at (k, xi) = (0, 0)."""


class ContractError(KernelError):
    """Shape, representation or realness contract violated."""


class QuadratureResolutionError(KernelError):
    """Requested shells are finer than the quadrature grid can resolve."""


class DegenerateInputError(KernelError):
    """Input has zero norm where a ratio is requested."""


class ConfigError(KernelError):
    """Run configuration failed validation."""


class FieldIOError(KernelError):
    """Field container could not be read or written."""
