"""Exception types shared across the package."""


class CovmechError(Exception):
    """Base class for all package errors."""


class OutOfDomain(CovmechError):
    """Coordinates violate the chart's domain predicate."""


class SingularMetric(CovmechError):
    """Metric determinant below the singularity tolerance."""


class ExtremalParams(CovmechError):
    """Black-hole parameters at or beyond the extremal bound |a| >= M."""


class DetunedParameters(CovmechError):
    """Quartic invariant requested without the frequency tuning condition."""


class MaxStepsExceeded(CovmechError):
    """Integrator ran out of its step budget before reaching the end of the span."""


class NonFiniteState(CovmechError):
    """Integration state became NaN or infinite."""


class RankZeroOperand(CovmechError):
    """Tensor bracket requires both operands to have rank >= 1."""


class UnknownObservable(CovmechError):
    """Observable name not found in the system registry."""


class ConfigError(CovmechError):
    """Run configuration could not be parsed or validated."""
