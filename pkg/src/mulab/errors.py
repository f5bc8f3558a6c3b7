"""Exception taxonomy shared across the library.

Every failure mode that a caller can reasonably branch on gets its own
class; plain ValueError is reserved for programmer errors (bad arguments,
mixed precisions, malformed inputs caught at construction time).
"""


class MuLabError(Exception):
    """Base class for all library-specific errors."""


class PrecisionMismatch(MuLabError):
    """Arithmetic attempted between values carried at different (p, N)."""


class NotOrdinary(MuLabError):
    """p divides a_p; the unit root of x^2 - a_p x + p does not exist."""


class PrecisionExhausted(MuLabError):
    """Every coefficient vanishes at working precision."""


class PrecisionInsufficient(MuLabError):
    """The p-power filtration is still nonzero at the top precision layer."""


class TruncationUnresolved(MuLabError):
    """A pivot decision depends on power-series coefficients beyond the
    T-truncation bound."""


class NotTorsion(MuLabError):
    """A relation matrix fails the torsion certificate."""


class EigenspaceNotRational(MuLabError):
    """No rational eigensymbol matches the supplied Hecke data."""


class EigenspaceNotOneDimensional(MuLabError):
    """The matched eigenspace has dimension != 1."""


class DenominatorAtP(MuLabError):
    """A Mazur-Tate coefficient has p in its denominator after
    normalization."""


class NotStabilized(MuLabError):
    """No two consecutive layers produced matching Iwasawa invariants."""


class FactorizationInconclusive(MuLabError):
    """Modular-factor recombination exceeded the configured bound."""


class BadReduction(MuLabError):
    """The curve does not have good reduction at the requested prime."""


class RootLiftFailure(MuLabError):
    """A kernel-polynomial root could not be lifted to a torsion point."""


class AmbiguousPair(MuLabError):
    """Two distinct character pairs satisfy every tested trace congruence."""


class InsufficientLineData(MuLabError):
    """No stable line is available to classify."""


class PrecisionLoss(MuLabError):
    """A lattice transform would shift below working precision."""


class NotReduciblyAligned(MuLabError):
    """A lower-left entry is a unit; the transform requires c = 0 mod p."""


class SizeBound(MuLabError):
    """An exhaustive computation exceeds its configured size bound."""


class LocalTwistUnrealizable(MuLabError):
    """No global cocycle restricts to an admissible local twist at every
    labelled subgroup."""


class NoUnitSquareRoot(MuLabError):
    """psi(sigma_v) v^{-1} is not 1 mod p, so the normalized square root
    does not exist."""


class TameRelationError(MuLabError):
    """Sigma Tau Sigma^{-1} != Tau^v at the stated level."""


class ParseError(MuLabError):
    """Input file failed to parse or validate structurally."""


class InvalidModel(MuLabError):
    """Weierstrass model is singular or otherwise unusable."""


class InconsistentAp(MuLabError):
    """A supplied a_ell disagrees with a point count."""


class InvariantViolation(MuLabError):
    """An internal cross-check (isogeny invariance, mu monotonicity,
    consistency bound) failed during analysis."""
