"""Flavor observables and the entangled initial states."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import LayoutError
from .hilbert import (
    CompositeLayout,
    DensityOperator,
    Flavor,
    Operator,
    SpaceLayout,
    identity,
    on_first,
    on_second,
    projector,
    tensor,
)


class Mode(str, enum.Enum):
    DISTINGUISHABLE = "distinguishable"
    IDENTICAL = "identical"


class Kind(str, enum.Enum):
    STRANGENESS = "S"
    DETECT_KAON = "D+"
    DETECT_ANTIKAON = "D-"


@dataclass(frozen=True)
class ObservableKind:
    kind: Kind
    momentum: str

    def __str__(self) -> str:
        return f"{self.kind.value}@{self.momentum}"


_OBS_RE = re.compile(r"^(S|D\+|D-)@(\w+)$")


def parse_observable(text: str) -> ObservableKind:
    """Parse ``"S@p"``, ``"D+@q"``, ``"D-@p"``."""
    m = _OBS_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad observable {text!r}; expected S@k, D+@k or D-@k")
    return ObservableKind(Kind(m.group(1)), m.group(2))


def mode_of(layout: CompositeLayout) -> Mode:
    return Mode.IDENTICAL if layout.identical else Mode.DISTINGUISHABLE


def flavor_projector(layout: SpaceLayout, label: str, flavor: Flavor) -> Operator:
    return projector(layout, flavor, label)


def strangeness(layout: SpaceLayout, label: str) -> Operator:
    """``|K0,k><K0,k| - |K0bar,k><K0bar,k|``."""
    return flavor_projector(layout, label, Flavor.K0) - flavor_projector(layout, label, Flavor.K0BAR)


def dichotomic(layout: SpaceLayout, label: str, sign: int) -> Operator:
    """Detector observable ``D±``: +1 for the requested flavor at ``label``, -1 otherwise.

    Other momentum blocks get -1 ("no such kaon registered"), which makes the
    operator a reflection (square = identity) on any layout.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    wanted = Flavor.K0 if sign > 0 else Flavor.K0BAR
    hit = flavor_projector(layout, label, wanted)
    return 2.0 * hit - identity(layout)


def symmetrized_strangeness(layout: CompositeLayout, label: str) -> Operator:
    """``S^k ⊗ 1 + 1 ⊗ S^k``."""
    if not layout.identical:
        raise LayoutError("symmetrized observables need an identical-particle layout")
    s = strangeness(layout.first, label)
    return on_first(s, layout) + on_second(s, layout)


def symmetrized_dichotomic(layout: CompositeLayout, label: str, sign: int) -> Operator:
    """``2(Π⊗1 + 1⊗Π) - 1⊗1 - Π⊗Π`` with ``Π`` the flavor projector at ``label``.

    Eigenvalue +2 if both particles are the requested flavor at ``label``, +1 if
    exactly one is, -1 if none.
    """
    if not layout.identical:
        raise LayoutError("symmetrized observables need an identical-particle layout")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    flavor = Flavor.K0 if sign > 0 else Flavor.K0BAR
    pi = flavor_projector(layout.first, label, flavor)
    return 2.0 * (on_first(pi, layout) + on_second(pi, layout)) - identity(layout) - tensor(pi, pi, layout)


def local_observable(layout: CompositeLayout, obs: ObservableKind, slot: int) -> Operator:
    """Two-particle observable for ``obs``.

    Distinguishable layouts: the one-particle observable placed in ``slot`` (0
    for Alice, 1 for Bob). Identical layouts: the symmetrized form, ``slot``
    ignored.
    """
    if layout.identical:
        if obs.kind is Kind.STRANGENESS:
            return symmetrized_strangeness(layout, obs.momentum)
        return symmetrized_dichotomic(layout, obs.momentum, 1 if obs.kind is Kind.DETECT_KAON else -1)
    factor = layout.first if slot == 0 else layout.second
    if obs.kind is Kind.STRANGENESS:
        one = strangeness(factor, obs.momentum)
    else:
        one = dichotomic(factor, obs.momentum, 1 if obs.kind is Kind.DETECT_KAON else -1)
    return on_first(one, layout) if slot == 0 else on_second(one, layout)


def singlet_vector(layout: CompositeLayout, mode: Mode | str) -> np.ndarray:
    """Normalized singlet amplitudes."""
    u, weight = _singlet_terms(layout, mode)
    return math.sqrt(weight) * u


def _singlet_terms(layout: CompositeLayout, mode: Mode | str) -> tuple[np.ndarray, float]:
    # unit coefficients plus the exact squared normalization, so the density
    # matrix entries come out as exact binary fractions
    mode = Mode(mode)
    if mode is Mode.DISTINGUISHABLE:
        if layout.identical or len(layout.first.momenta) != 1 or len(layout.second.momenta) != 1:
            raise LayoutError("distinguishable singlet needs single-momentum factors with different momenta")
        p, q = layout.first.labels[0], layout.second.labels[0]
        terms = [
            (1.0, (Flavor.K0, p), (Flavor.K0BAR, q)),
            (-1.0, (Flavor.K0BAR, p), (Flavor.K0, q)),
        ]
        weight = 0.5
    else:
        if not layout.identical or len(layout.first.momenta) != 2:
            raise LayoutError("identical singlet needs equal factors with two momenta")
        p, q = layout.first.labels
        terms = [
            (1.0, (Flavor.K0, p), (Flavor.K0BAR, q)),
            (1.0, (Flavor.K0BAR, q), (Flavor.K0, p)),
            (-1.0, (Flavor.K0BAR, p), (Flavor.K0, q)),
            (-1.0, (Flavor.K0, q), (Flavor.K0BAR, p)),
        ]
        weight = 0.25
    u = np.zeros(layout.dim, dtype=complex)
    for coef, a, b in terms:
        u[layout.index(layout.first.index(*a), layout.second.index(*b))] += coef
    return u, weight


def singlet_state(layout: CompositeLayout, mode: Mode | str) -> DensityOperator:
    """Flavor-antisymmetric pair state from φ(1020) decay."""
    u, weight = _singlet_terms(layout, mode)
    return DensityOperator(layout, weight * np.outer(u, u.conj()))


def detection_projector(layout: CompositeLayout, label: str, flavor: Flavor, slot: int) -> Operator:
    """Projector onto "a ``flavor`` meson with momentum ``label`` is registered".

    Distinguishable layouts: the flavor projector in ``slot``. Identical
    layouts: ``Π⊗1 + 1⊗Π - Π⊗Π`` (at least one particle found), ``slot`` ignored.
    """
    if layout.identical:
        pi = flavor_projector(layout.first, label, flavor)
        return on_first(pi, layout) + on_second(pi, layout) - tensor(pi, pi, layout)
    if slot == 0:
        return on_first(flavor_projector(layout.first, label, flavor), layout)
    return on_second(flavor_projector(layout.second, label, flavor), layout)
