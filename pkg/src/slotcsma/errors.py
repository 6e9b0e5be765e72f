"""Exception types shared across the package."""


class SlotCsmaError(Exception):
    """Base class for all slotcsma errors."""


class ConfigError(SlotCsmaError):
    """Bad experiment configuration (CLI maps this to exit code 2)."""


class StateSpaceTooLarge(SlotCsmaError):
    """Exhaustive enumeration requested beyond the hard node-count cap."""


class InvalidSchedule(SlotCsmaError):
    """A schedule contains two nodes joined by a conflict edge."""


class InvalidWeight(SlotCsmaError):
    """Weight below 1 (log-weight below 0) where >= 1 is required."""


class InvalidDelta(SlotCsmaError):
    """Shape parameter outside (0, 1)."""


class InvalidFeedback(SlotCsmaError):
    """Per-node carrier-sense observations are mutually inconsistent."""


class InvalidRate(SlotCsmaError):
    """Negative arrival rate."""


class NotIrreducible(SlotCsmaError):
    """Transition matrix is not irreducible."""


class InvalidAdjointBase(SlotCsmaError):
    """Distribution supplied to adjoint() is not stationary for the chain."""


class NumericalFailure(SlotCsmaError):
    """A numerical identity that must hold failed beyond tolerance."""


class ConductanceTooLarge(SlotCsmaError):
    """Conductance brute force requested on too many states."""


class TreeTooLarge(SlotCsmaError):
    """Arborescence-weight computation requested on too many states."""


class InvariantViolation(SlotCsmaError):
    """A named mathematical invariant failed.

    ``name`` identifies the inequality; ``report`` (when present) carries the
    full check report that produced the failure.
    """

    def __init__(self, name, message="", report=None):
        super().__init__(f"{name}: {message}" if message else name)
        self.name = name
        self.report = report


class NotContracting(SlotCsmaError):
    """Operator norm >= 1, no finite mixing-time bound."""


class InsufficientData(SlotCsmaError):
    """Trace too short for the requested statistic."""
