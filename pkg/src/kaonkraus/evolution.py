"""Channel application, projective measurement and EPR correlations.

Two independent routes are kept for joint probabilities and correlations:
the sequential Schrödinger-picture pipeline (evolve, collapse, evolve, measure)
and the Heisenberg form that evolves the observables instead. Tests cross-check
one against the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LayoutError, OrderingError, SymmetryError
from .hilbert import (
    CompositeLayout,
    DensityOperator,
    Layout,
    Operator,
    commutator_norm,
    expectation,
    is_symmetric,
    stack,
)
from .kraus import kraus_family, proper_time
from .observables import Mode, mode_of
from .params import PhysicalParams

EIGEN_GROUP_TOL = 1e-9
MIN_PROBABILITY = 1e-14
SYMMETRY_TOL = 1e-12


def apply_channel(matrix: np.ndarray, kraus: Sequence[Operator]) -> np.ndarray:
    """``Σ E ρ E†`` on a raw matrix (need not be normalized)."""
    e = stack(kraus)
    return (e @ matrix @ e.conj().transpose(0, 2, 1)).sum(axis=0)


def heisenberg_matrix(matrix: np.ndarray, kraus: Sequence[Operator]) -> np.ndarray:
    e = stack(kraus)
    return (e.conj().transpose(0, 2, 1) @ matrix @ e).sum(axis=0)


def heisenberg_observable(obs: Operator, kraus: Sequence[Operator]) -> Operator:
    """Dual channel image ``Σ E† obs E``."""
    if kraus and kraus[0].layout != obs.layout:
        raise LayoutError("observable and Kraus operators live on different layouts")
    return Operator(obs.layout, heisenberg_matrix(obs.matrix, kraus))


def evolve(rho: Operator, params: PhysicalParams, t: float) -> DensityOperator:
    """Evolve a state by lab time ``t`` with the one- or two-particle family."""
    if t < 0:
        raise OrderingError("evolution defined for nonnegative time only")
    family = kraus_family(params, rho.layout, t)
    return DensityOperator(rho.layout, apply_channel(rho.matrix, family))


def evolve_observable(obs: Operator, params: PhysicalParams, t: float) -> Operator:
    return heisenberg_observable(obs, kraus_family(params, obs.layout, t))


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    eigenvalue: float
    probability: float
    projector: Operator
    post_state: DensityOperator | None


def spectral_projectors(obs: Operator, tol: float = EIGEN_GROUP_TOL) -> list[tuple[float, Operator]]:
    """Eigenvalue / projector pairs, eigenvalues within ``tol`` merged, ascending."""
    if not obs.is_hermitian():
        raise ValueError("observable is not Hermitian")
    values, vectors = np.linalg.eigh(obs.matrix)
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and abs(v - values[groups[-1][0]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        vecs = vectors[:, g]
        out.append((float(np.mean(values[g])), Operator(obs.layout, vecs @ vecs.conj().T)))
    return out


def _require_symmetric(layout: Layout, *ops: Operator) -> None:
    if isinstance(layout, CompositeLayout) and layout.identical:
        for op in ops:
            if not is_symmetric(op, SYMMETRY_TOL):
                raise SymmetryError("observable does not preserve exchange symmetry on an identical-particle layout")


def measure(rho: Operator, observable: Operator) -> list[MeasurementOutcome]:
    """Projective measurement: one outcome per distinct eigenvalue.

    Outcomes with probability below ``MIN_PROBABILITY`` carry no post-state.
    """
    if rho.layout != observable.layout:
        raise LayoutError("state and observable live on different layouts")
    _require_symmetric(rho.layout, observable)
    outcomes = []
    for value, proj in spectral_projectors(observable):
        collapsed = proj.matrix @ rho.matrix @ proj.matrix
        p = float(np.trace(collapsed).real)
        post = DensityOperator(rho.layout, collapsed / p) if p > MIN_PROBABILITY else None
        outcomes.append(MeasurementOutcome(value, max(p, 0.0), proj, post))
    return outcomes


def _check_times(t_a: float, t_b: float) -> None:
    if t_a < 0 or t_b < 0:
        raise OrderingError("evolution defined for nonnegative time only")
    if t_b < t_a:
        raise OrderingError("Alice measures first: need t_b >= t_a (swap arguments for the other order)")


def joint_probability(
    rho0: Operator,
    proj_a: Operator,
    proj_b: Operator,
    params: PhysicalParams,
    t_a: float,
    t_b: float,
) -> float:
    """Sequential pipeline: evolve to ``t_a``, collapse on ``proj_a``, evolve to ``t_b``, apply ``proj_b``.

    ``p_a`` times ``p_{b|a}`` collapses to the unnormalized trace, so the 1/p_a
    of the collapse cancels and zero-probability branches need no special case.
    """
    _check_times(t_a, t_b)
    layout = rho0.layout
    rho_a = apply_channel(rho0.matrix, kraus_family(params, layout, t_a))
    pa = proj_a.matrix
    branch = pa @ rho_a @ pa
    p_a = float(np.trace(branch).real)
    if p_a <= MIN_PROBABILITY:
        return max(p_a, 0.0)
    conditioned = branch / p_a
    rho_b = apply_channel(conditioned, kraus_family(params, layout, t_b - t_a))
    pb = proj_b.matrix
    p_b_given_a = float(np.trace(pb @ rho_b @ pb).real)
    return p_a * p_b_given_a


def joint_probability_heisenberg(
    rho0: Operator,
    proj_a: Operator,
    proj_b: Operator,
    params: PhysicalParams,
    t_a: float,
    t_b: float,
) -> float:
    """``Tr[ρ(0) Π_a(t_a) Π_b(t_b)]`` with each projector evolved by the dual channel."""
    if t_a < 0 or t_b < 0:
        raise OrderingError("evolution defined for nonnegative time only")
    a = evolve_observable(proj_a, params, t_a)
    b = evolve_observable(proj_b, params, t_b)
    return float(expectation(rho0, a @ b).real)


def joint_probability_factorized(
    rho0: Operator,
    pi_a: Operator,
    pi_b: Operator,
    params: PhysicalParams,
    t_a: float,
    t_b: float,
) -> float:
    """Distinguishable pair, one-particle projectors: ``Tr{ρ(0)[Π_a(τ_A) ⊗ Π_b(τ_B)]}``."""
    layout = rho0.layout
    if not isinstance(layout, CompositeLayout) or layout.identical:
        raise LayoutError("factorized form needs a distinguishable two-particle layout")
    if pi_a.layout != layout.first or pi_b.layout != layout.second:
        raise LayoutError("projectors must act on the first and second factor respectively")
    a = evolve_observable(pi_a, params, t_a).matrix
    b = evolve_observable(pi_b, params, t_b).matrix
    return float(np.real(np.sum(rho0.matrix * np.kron(a, b).T)))


@dataclass(frozen=True)
class CorrelationResult:
    t_a: float
    t_b: float
    tau_a: float
    tau_b: float
    value: float
    analytic: float | None = None

    @property
    def deviation(self) -> float | None:
        return None if self.analytic is None else abs(self.value - self.analytic)

    def with_analytic(self, analytic: float) -> "CorrelationResult":
        return CorrelationResult(self.t_a, self.t_b, self.tau_a, self.tau_b, self.value, analytic)


def observer_momenta(layout: CompositeLayout):
    """Alice's and Bob's momenta: the two factor momenta, or ``(p, q)`` of an identical layout."""
    if layout.identical:
        p, q = layout.first.momenta[:2]
    else:
        p, q = layout.first.momenta[0], layout.second.momenta[0]
    return p, q


def _check_mode(layout: Layout, mode: Mode | str) -> Mode:
    if not isinstance(layout, CompositeLayout):
        raise LayoutError("correlations need a two-particle layout")
    mode = Mode(mode)
    if mode is not mode_of(layout):
        raise LayoutError(f"mode {mode.value} does not match the layout ({mode_of(layout).value})")
    return mode


def correlation(
    rho0: Operator,
    obs_a: Operator,
    obs_b: Operator,
    params: PhysicalParams,
    t_a: float,
    t_b: float,
    mode: Mode | str,
) -> CorrelationResult:
    """``Tr[ρ(0) A(t_a) B(t_b)]`` with Heisenberg-evolved observables.

    For a distinguishable pair ``A = A1 ⊗ 1`` and ``B = 1 ⊗ B1``, so the product
    is ``A1(τ_A) ⊗ B1(τ_B)``.
    """
    layout = rho0.layout
    mode = _check_mode(layout, mode)
    if obs_a.layout != layout or obs_b.layout != layout:
        raise LayoutError("observables and state live on different layouts")
    if t_a < 0 or t_b < 0:
        raise OrderingError("evolution defined for nonnegative time only")
    if mode is Mode.IDENTICAL:
        _require_symmetric(layout, obs_a, obs_b)
        if commutator_norm(obs_a, obs_b) > SYMMETRY_TOL:
            raise SymmetryError("Alice's and Bob's observables must commute")
    a = evolve_observable(obs_a, params, t_a)
    b = evolve_observable(obs_b, params, t_b)
    value = float(expectation(rho0, a @ b).real)
    p, q = observer_momenta(layout)
    return CorrelationResult(t_a, t_b, proper_time(t_a, p), proper_time(t_b, q), value)


def correlation_grid(
    rho0: Operator,
    obs_a: Operator,
    obs_b: Operator,
    params: PhysicalParams,
    t_a: Sequence[float],
    t_b: Sequence[float],
    mode: Mode | str,
) -> list[list[CorrelationResult]]:
    """``correlation`` over the outer product of two time lists, ``t_a`` outer.

    Each observable is evolved once per time rather than once per grid point.
    """
    layout = rho0.layout
    if len(t_a) and len(t_b):
        # validates mode, layouts, symmetry and times on one corner point
        correlation(rho0, obs_a, obs_b, params, min(t_a), min(t_b), mode)
    p, q = observer_momenta(layout)
    # ρ A(t_a) B(t_b) traced as sum((ρ A)ᵀ * B)
    rho_a = [(rho0.matrix @ evolve_observable(obs_a, params, float(t)).matrix).T for t in t_a]
    evolved_b = [evolve_observable(obs_b, params, float(t)).matrix for t in t_b]
    return [
        [
            CorrelationResult(
                float(ta), float(tb), proper_time(float(ta), p), proper_time(float(tb), q), float(np.sum(ra * b).real)
            )
            for tb, b in zip(t_b, evolved_b)
        ]
        for ta, ra in zip(t_a, rho_a)
    ]


def correlation_from_probabilities(
    rho0: Operator,
    obs_a: Operator,
    obs_b: Operator,
    params: PhysicalParams,
    t_a: float,
    t_b: float,
) -> float:
    """``Σ_ab a·b·p_ab`` with sequential-pipeline probabilities.

    When ``t_b < t_a`` Bob measures first: the pipeline runs with the roles
    swapped.
    """
    total = 0.0
    spec_a = spectral_projectors(obs_a)
    spec_b = spectral_projectors(obs_b)
    for a, pa in spec_a:
        if abs(a) <= EIGEN_GROUP_TOL:
            continue
        for b, pb in spec_b:
            if abs(b) <= EIGEN_GROUP_TOL:
                continue
            if t_b >= t_a:
                p = joint_probability(rho0, pa, pb, params, t_a, t_b)
            else:
                p = joint_probability(rho0, pb, pa, params, t_b, t_a)
            total += a * b * p
    return total
