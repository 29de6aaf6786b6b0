"""Exception hierarchy shared across the toolkit.

Everything domain-level derives from :class:`BosonError` so callers (and the
CLI) can separate "bad input / infeasible request" from genuine bugs.
"""

from __future__ import annotations


class BosonError(Exception):
    """Base class for all domain errors raised by this package."""


class DimensionError(BosonError, ValueError):
    """Shapes, mode counts or photon numbers do not line up."""


class NotUnitaryError(BosonError, ValueError):
    """A matrix failed its unitarity gate."""

    def __init__(self, deviation: float, tolerance: float, context: str = ""):
        self.deviation = float(deviation)
        self.tolerance = float(tolerance)
        msg = f"matrix is not unitary: max |U†U - I| = {deviation:.3e} > {tolerance:.1e}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class StateSpaceTooLargeError(BosonError):
    """The requested Fock space exceeds the materialization guard."""


class PostselectionError(BosonError):
    """Postselection kept zero probability mass."""


class SamplingBudgetError(BosonError):
    """Rejection sampling aborted: acceptance rate too low for the budget."""

    def __init__(self, accepted: int, trials: int, requested: int):
        self.accepted = accepted
        self.trials = trials
        self.requested = requested
        rate = accepted / trials if trials else 0.0
        super().__init__(
            f"rejection sampling aborted after {trials} trials: "
            f"{accepted}/{requested} samples accepted (rate {rate:.2e})"
        )


class GadgetSynthesisError(BosonError):
    """Gadget optimization failed to reach a feasible solution.

    Carries the best attempt found so callers can inspect how close it got.
    """

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)
