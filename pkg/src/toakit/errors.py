"""Semantic exceptions shared across the toolkit."""


class ToakitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ToakitError, ValueError):
    """Input outside the documented domain (NaN/inf, negative time, ...)."""


class OverflowGuardError(ToakitError, OverflowError):
    """A requested value is not representable in double precision.

    Raised instead of returning inf, e.g. for erf(z) when exp(-z^2)
    overflows.
    """


class BudgetExceededError(ToakitError, RuntimeError):
    """An adaptive routine hit its evaluation budget before converging.

    Carries the best estimate so callers can decide whether it is usable.
    """

    def __init__(self, message, best_estimate=None, abs_error=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.abs_error = abs_error


class TailEstimateError(ToakitError, RuntimeError):
    """A semi-infinite integral shows no detectable decay."""


class NoZeroError(ToakitError, RuntimeError):
    """No sign change or tangential zero found in the bracket."""


class DensityInvalidError(ToakitError, ValueError):
    """A density/CDF violates its probability contract (CDF outside [0,1])."""


class CannotNormalizeError(ToakitError, ValueError):
    """The raw arrival-time density has zero or non-finite total mass."""


class DivergentMomentError(ToakitError, RuntimeError):
    """A requested moment integral does not converge."""


class DegenerateScenarioError(ToakitError, ValueError):
    """Scenario parameters make the requested quantity undefined (e.g. g=0)."""


class BackflowSignatureError(ToakitError, RuntimeError):
    """The located zero is tangential, so it does not certify backflow."""


class ConfigError(ToakitError, ValueError):
    """A scenario configuration is invalid; lists every violated constraint."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SchemaError(ToakitError, ValueError):
    """A result file does not match the expected column schema."""
