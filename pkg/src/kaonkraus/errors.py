"""Exception types raised across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """A physical parameter set violates its construction invariants."""


class BoundViolationError(ValueError):
    """Decoherence rate too large: a Kraus radicand goes negative.

    Attributes:
        tau: proper time at which the radicand is smallest.
        radicand: the radicand value there.
    """

    def __init__(self, tau: float, radicand: float, message: str | None = None):
        self.tau = tau
        self.radicand = radicand
        super().__init__(
            message
            or f"λ exceeds complete-positivity bound for these parameters "
            f"(radicand {radicand:.6g} at tau={tau:.6g})"
        )


class LayoutError(ValueError):
    """Operands live on incompatible state-space layouts."""


class InvalidStateError(ValueError):
    """A matrix fails the density-operator checks (Hermitian, PSD, unit trace)."""


class SymmetryError(ValueError):
    """An observable does not commute with the particle-exchange operator."""


class OrderingError(ValueError):
    """Measurement or evolution times are out of order or negative."""
