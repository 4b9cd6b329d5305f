"""Kraus operators for a decaying neutral meson, in the lab frame.

Each momentum block carries five operators acting on ``(K0, K0bar)`` or mapping
it to the vacuum; one shared vacuum projector completes the family. For scalar
particles the lab-frame matrix elements equal the rest-frame ones evaluated at
the proper time ``t / γ``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BoundViolationError, OrderingError
from .hilbert import CompositeLayout, Momentum, Operator, SpaceLayout, stack
from .params import RADICAND_TOL, PhysicalParams, cexpm1, kraus_radicand

KRAUS_TOL = 1e-12
OPS_PER_MOMENTUM = 5


def proper_time(t: float, k: Momentum) -> float:
    if t < 0:
        raise OrderingError("evolution defined for nonnegative time only")
    return t / k.gamma


def rest_frame_blocks(params: PhysicalParams, tau: float) -> np.ndarray:
    """The five non-vacuum Kraus operators at proper time ``tau``.

    Returns an array of shape ``(5, 3, 3)`` in the local basis
    ``(vacuum, K0, K0bar)``. At ``tau == 0`` the decay operators take their
    limit value 0 (their coefficients vanish like ``sqrt(tau)``).

    Raises:
        BoundViolationError: the decay radicand is below ``-RADICAND_TOL``.
    """
    if tau < 0:
        raise OrderingError("evolution defined for nonnegative time only")
    eps = params.epsilon
    dl = params.delta_l
    lam = params.lam
    ratio = (1 + eps) / (1 - eps)
    norm = math.sqrt((1 + abs(eps) ** 2) / 2)

    out = np.zeros((OPS_PER_MOMENTUM, 3, 3), dtype=complex)

    # E1: damped oscillation inside the flavor doublet
    e_s = np.exp(-tau * (lam + 2j * params.m_s + params.gamma_s) / 2)
    e_l = np.exp(-tau * (lam + 2j * params.m_l + params.gamma_l) / 2)
    plus, minus = (e_s + e_l) / 2, (e_s - e_l) / 2
    out[0, 1, 1] = out[0, 2, 2] = plus
    out[0, 1, 2] = minus * ratio
    out[0, 2, 1] = minus / ratio

    # E2, E3: decay into the vacuum
    u = -math.expm1(-tau * params.gamma_l)
    if u > 0:
        rad = float(kraus_radicand(params, tau))
        if rad < -RADICAND_TOL:
            raise BoundViolationError(tau, rad)
        amp = norm * math.sqrt(max(rad, 0.0))
        out[1, 0, 1] = amp / (1 + eps)
        out[1, 0, 2] = amp / (1 - eps)

        # (u ± δ_L w) / sqrt(u), split so nothing cancels as tau -> 0
        w = -complex(cexpm1(-tau * (params.gamma_bar + lam - 1j * params.delta_m)))
        root_u = math.sqrt(u)
        tail = dl * w / root_u
        out[2, 0, 1] = norm * (root_u + tail) / (1 + eps)
        out[2, 0, 2] = -norm * (root_u - tail) / (1 - eps)

    # E4, E5: decoherence in the mass basis
    dephase = math.sqrt(-math.expm1(-tau * lam))
    c4 = 0.5 * math.exp(-tau * params.gamma_s / 2) * dephase
    c5 = 0.5 * math.exp(-tau * params.gamma_l / 2) * dephase
    out[3, 1, 1] = out[3, 2, 2] = c4
    out[3, 1, 2] = c4 * ratio
    out[3, 2, 1] = c4 / ratio
    out[4, 1, 1] = out[4, 2, 2] = c5
    out[4, 1, 2] = -c5 * ratio
    out[4, 2, 1] = -c5 / ratio
    return out


@dataclass(frozen=True, eq=False)
class KrausSet:
    """One-particle Kraus family at a lab time.

    ``operators[0]`` is the vacuum projector; then five operators per momentum
    in layout order.
    """

    layout: SpaceLayout
    lab_time: float
    operators: tuple[Operator, ...]

    def __len__(self) -> int:
        return len(self.operators)

    def matrices(self) -> np.ndarray:
        return stack(self.operators)

    def for_momentum(self, label: str) -> tuple[Operator, ...]:
        pos = self.layout.labels.index(label)
        start = 1 + OPS_PER_MOMENTUM * pos
        return self.operators[start : start + OPS_PER_MOMENTUM]


def vacuum_projector(layout: SpaceLayout) -> Operator:
    m = np.zeros((layout.dim, layout.dim), dtype=complex)
    m[0, 0] = 1.0
    return Operator(layout, m)


def build_kraus(params: PhysicalParams, layout: SpaceLayout, t: float) -> KrausSet:
    """Lab-frame Kraus family for all momenta of ``layout`` at lab time ``t``."""
    if t < 0:
        raise OrderingError("evolution defined for nonnegative time only")
    ops = [vacuum_projector(layout)]
    n = layout.dim
    for k in layout.momenta:
        blocks = rest_frame_blocks(params, proper_time(t, k))
        idx = (0,) + layout.block(k.label)
        for block in blocks:
            m = np.zeros((n, n), dtype=complex)
            # drop the vacuum->vacuum entry: that belongs to the shared projector
            block = block.copy()
            block[0, 0] = 0.0
            m[np.ix_(idx, idx)] = block
            ops.append(Operator(layout, m))
    return KrausSet(layout, float(t), tuple(ops))


def two_particle_kraus(set_a: KrausSet, set_b: KrausSet) -> list[Operator]:
    """All products ``a ⊗ b``; ``set_a`` members vary slowest."""
    layout = CompositeLayout(set_a.layout, set_b.layout)
    a, b = set_a.matrices(), set_b.matrices()
    # batched Kronecker product: entry (a_i, b_j)[ik, jl] = a_i[i, j] * b_j[k, l]
    prods = np.einsum("xij,ykl->xyikjl", a, b).reshape(len(a) * len(b), layout.dim, layout.dim)
    return [Operator(layout, m) for m in prods]


def kraus_family(params: PhysicalParams, layout: SpaceLayout | CompositeLayout, t: float) -> list[Operator]:
    """The Kraus family appropriate to ``layout`` (one- or two-particle)."""
    if isinstance(layout, SpaceLayout):
        return list(build_kraus(params, layout, t).operators)
    first = build_kraus(params, layout.first, t)
    second = first if layout.second == layout.first else build_kraus(params, layout.second, t)
    return two_particle_kraus(first, second)


def verify_normalization(kraus: KrausSet | Sequence[Operator]) -> float:
    """``‖Σ E†E - 1‖_max``."""
    ops = kraus.operators if isinstance(kraus, KrausSet) else kraus
    e = stack(ops)
    total = np.einsum("kji,kjl->il", e.conj(), e)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))
