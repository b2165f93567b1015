"""Exception types raised across the package.

Every numerical failure mode gets its own class so callers (and the CLI) can
distinguish "the model is outside this operation's domain" from "the algorithm
did not reach its tolerance".
"""


class LevyExpfunError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedModel(LevyExpfunError):
    """Model family or parameters outside the supported catalog."""


class OutsideDomain(LevyExpfunError):
    """Requested exponent/argument lies outside the validity strip."""


class RootFindingFailure(LevyExpfunError):
    """Polynomial or scalar root finding did not converge to tolerance."""


class NoRoot(LevyExpfunError):
    """No positive root exists for the given exponent equation."""


class InfiniteTiltedMean(LevyExpfunError):
    """The tilted mean E[xi_1 e^{theta xi_1}] diverges at the requested root."""


class DivergentMoment(LevyExpfunError):
    """The requested moment is infinite for this model."""


class HypothesisFailure(LevyExpfunError):
    """Hypotheses of the requested asymptotic regime do not hold."""


class TruncationBias(LevyExpfunError):
    """A truncation level satisfying the error budget could not be reached."""


class NonContraction(LevyExpfunError):
    """The fixed-point/perpetuity map has no contracting exponent."""


class LowEffectiveSampleSize(LevyExpfunError):
    """Importance resampling produced ESS below the safety threshold."""


class NoConvergence(LevyExpfunError):
    """Iterative solver failed to meet its tolerance within the sweep budget."""


class NegativeDensity(LevyExpfunError):
    """Solver produced significantly negative density mass."""


class UnsupportedIdentity(LevyExpfunError):
    """Identity id not applicable to the supplied model."""


class ModelFileError(LevyExpfunError):
    """Malformed model file: unknown fields, missing keys, or bad values."""
