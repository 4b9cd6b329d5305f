"""Closed-form correlation functions and joint probabilities for the singlet pair.

Each expression is kept in its expanded, term-by-term form with no algebraic
simplification, so it stays an independent oracle for the matrix evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hilbert import Flavor
from .params import PhysicalParams


@dataclass(frozen=True)
class ProperTimePair:
    tau_a: float
    tau_b: float

    def __post_init__(self) -> None:
        if self.tau_a < 0 or self.tau_b < 0:
            raise ValueError("proper times must be nonnegative")

    @property
    def delta_tau(self) -> float:
        return self.tau_b - self.tau_a


def _common(params: PhysicalParams, times: ProperTimePair):
    ta, tb = times.tau_a, times.tau_b
    rate = params.gamma_bar + params.lam
    # e^{-(Γ+λ)(τ_A+τ_B)} cos(Δm Δτ)
    interference = math.exp(-rate * (ta + tb)) * math.cos(params.delta_m * times.delta_tau)
    # e^{-Γ_S τ_A - Γ_L τ_B} + e^{-Γ_L τ_A - Γ_S τ_B}
    cross = math.exp(-params.gamma_s * ta - params.gamma_l * tb) + math.exp(-params.gamma_l * ta - params.gamma_s * tb)
    return interference, cross


def c_strangeness(params: PhysicalParams, times: ProperTimePair) -> float:
    """Strangeness-strangeness correlation."""
    dl = params.delta_l
    interference, cross = _common(params, times)
    return -1.0 / (1.0 - dl**2) * (interference - 0.5 * dl**2 * cross)


def c_dplus_dplus(params: PhysicalParams, times: ProperTimePair) -> float:
    """Correlation of two kaon detectors (``D+`` on both sides)."""
    ta, tb = times.tau_a, times.tau_b
    gs, gl, dm, dl = params.gamma_s, params.gamma_l, params.delta_m, params.delta_l
    rate = params.gamma_bar + params.lam
    interference, cross = _common(params, times)

    line1 = 1.0 - (1.0 + dl) / (1.0 - dl) * (interference - 0.5 * cross)
    line2 = -1.0 / (2.0 * (1.0 - dl)) * (math.exp(-gs * ta) + math.exp(-gs * tb) + math.exp(-gl * ta) + math.exp(-gl * tb))
    line3 = dl / (1.0 - dl) * (
        math.exp(-rate * ta) * math.cos(dm * ta) + math.exp(-rate * tb) * math.cos(dm * tb)
    )
    return line1 + line2 + line3


def c_dplus_dminus(params: PhysicalParams, times: ProperTimePair) -> float:
    """Correlation of a kaon detector (Alice) with an antikaon detector (Bob)."""
    ta, tb = times.tau_a, times.tau_b
    gs, gl, dm, dl = params.gamma_s, params.gamma_l, params.delta_m, params.delta_l
    rate = params.gamma_bar + params.lam
    interference, cross = _common(params, times)

    line1 = 1.0 + interference
    line2 = -1.0 / (2.0 * (1.0 - dl)) * (
        math.exp(-ta * gs) + math.exp(-ta * gl) - 2.0 * dl * math.exp(-ta * rate) * math.cos(dm * ta)
    )
    line3 = -1.0 / (2.0 * (1.0 + dl)) * (
        math.exp(-tb * gs) + math.exp(-tb * gl) + 2.0 * dl * math.exp(-tb * rate) * math.cos(dm * tb)
    )
    line4 = 0.5 * cross
    return line1 + line2 + line3 + line4


def joint_prob_analytic(params: PhysicalParams, times: ProperTimePair, flavors: tuple[Flavor, Flavor]) -> float:
    """Probability that Alice registers ``flavors[0]`` at τ_A and Bob ``flavors[1]`` at τ_B."""
    dl = params.delta_l
    interference, cross = _common(params, times)
    a, b = flavors
    if a is Flavor.K0 and b is Flavor.K0:
        return 1.0 / 8.0 * (1.0 + dl) / (1.0 - dl) * (cross - 2.0 * interference)
    if a is Flavor.K0BAR and b is Flavor.K0BAR:
        return 1.0 / 8.0 * (1.0 - dl) / (1.0 + dl) * (cross - 2.0 * interference)
    return 1.0 / 8.0 * (cross + 2.0 * interference)


FLAVOR_PAIRS = (
    (Flavor.K0, Flavor.K0),
    (Flavor.K0BAR, Flavor.K0BAR),
    (Flavor.K0, Flavor.K0BAR),
    (Flavor.K0BAR, Flavor.K0),
)
