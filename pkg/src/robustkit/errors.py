"""Exception types shared across the toolkit."""


class RobustKitError(Exception):
    """Base class for all toolkit errors."""


class LengthMismatch(RobustKitError):
    """Vector or matrix dimensions do not agree."""


class SchemaError(RobustKitError):
    """A document does not match the expected JSON schema."""


class UncoverableElement(SchemaError):
    """Some universe element appears in no set."""


class NegativeCost(SchemaError):
    """A cost entry is negative."""


class InfeasibleInput(RobustKitError):
    """A fractional point violates the relaxation beyond tolerance."""


class MaxIterationsError(RobustKitError):
    """The simplex pivot count exceeded its configured bound."""


class DimensionTooLarge(RobustKitError):
    """Problem too large for an enumeration-based routine."""


class NoFeasibleSolution(RobustKitError):
    """Exhaustive search found no feasible point."""


class UnboundedUncertainty(RobustKitError):
    """A perturbation coordinate is unconstrained, so worst cases diverge."""


class VariantMismatch(RobustKitError):
    """An operation received an uncertainty-set variant it does not support."""


class DegenerateWidth(RobustKitError):
    """A width parameter would be zero; the set should have been folded."""


class IterationLimit(RobustKitError):
    """Constraint generation hit its iteration cap before converging."""


class StalledDecomposition(RobustKitError):
    """Column generation cannot reduce the domination slack; the verifier's
    true factor exceeds the alpha it was given."""


class GridCapExceeded(RobustKitError):
    """The enumeration grid is larger than the configured cap."""


class PreconditionViolated(RobustKitError):
    """Structural precondition of a reduction does not hold."""


class MismatchedInstance(RobustKitError):
    """Solution and oracle result refer to different instances."""
