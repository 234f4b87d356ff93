"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to. Codes 2-6 are
part of the documented command-line contract; everything else exits 1.
"""


class ContDiagError(Exception):
    exit_code = 1


# -- parsing / configuration (exit 2) ----------------------------------------

class ConfigError(ContDiagError):
    exit_code = 2


class ExprSyntaxError(ConfigError):
    """Malformed expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset, source=None):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} (at byte {offset})")


class UnknownIdentifier(ExprSyntaxError):
    pass


# -- evaluation ----------------------------------------------------------------

class EvalError(ContDiagError):
    """Domain error while evaluating an expression (sqrt of a negative, 1/0, ...)."""


class OutOfDomain(ContDiagError):
    pass


# -- spectral core -------------------------------------------------------------

class DegeneratePoint(ContDiagError):
    pass


class NotFinitelyMany(ContDiagError):
    exit_code = 6


# -- signed norm ---------------------------------------------------------------

class UnsortedZeros(ContDiagError):
    pass


class ZeroNotOnTrack(ContDiagError):
    pass


# -- eigenvector walk ----------------------------------------------------------

class WalkError(ContDiagError):
    pass


class MaxSwitchesExceeded(WalkError):
    pass


class BothDenominatorsSmall(WalkError):
    pass


class BadInitialVector(WalkError):
    pass


class NoValidHandoff(WalkError):
    pass


# -- pipeline ------------------------------------------------------------------

class GapTooSmall(ContDiagError):
    exit_code = 3


class ObstructionDetected(ContDiagError):
    exit_code = 4


class DerivativeDiscontinuous(ContDiagError):
    exit_code = 5


class VerificationError(ContDiagError):
    """A produced track failed one of its own certificates."""
