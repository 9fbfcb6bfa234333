"""Exception types shared across the package."""


class CmdnlsError(Exception):
    """Base class for all package-specific failures."""


class ChiralityError(CmdnlsError):
    """A field failed the Hardy-class (nonnegative-frequency) certification."""


class DegenerateSpectrum(CmdnlsError):
    """The lowest positive-frequency coefficients are too small to
    extrapolate the zero-frequency boundary value."""


class NotInDomain(CmdnlsError):
    """Input lies outside the discrete domain of the adjoint position
    operator (its frequency profile is not resolved enough to differentiate)."""


class SingularSystem(CmdnlsError):
    """The dense eigenfunction solve reported (near-)rank-deficiency.

    The continuum problem is uniquely solvable for every positive frequency,
    so a singular discrete system signals a discretization failure (grid too
    coarse, potential unresolved), not a mathematical obstruction.
    """


class ResolventIllConditioned(CmdnlsError):
    """A resolvent solve exceeded the condition-number guard."""


class BlowupDetected(CmdnlsError):
    """The time integrator hit the amplitude or mass-drift guard."""


class MassGuard(CmdnlsError):
    """Focusing evolution refused: mass exceeds the blow-up threshold and no
    override was given."""


class ConfigError(CmdnlsError):
    """Invalid experiment configuration; message names the offending field."""
