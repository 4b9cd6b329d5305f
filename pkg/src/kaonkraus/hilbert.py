"""State-space layouts and a small dense operator algebra.

One-particle basis order is fixed: ``[vacuum, (K0, q1), (K0bar, q1), (K0, q2), ...]``
with momenta in insertion order. Two-particle operators live on the Kronecker
product of two one-particle layouts, left factor as the slow index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from .errors import InvalidStateError, LayoutError

STATE_TOL = 1e-12


class Flavor(enum.Enum):
    K0 = "K0"
    K0BAR = "K0bar"


FLAVORS = (Flavor.K0, Flavor.K0BAR)


@dataclass(frozen=True)
class Momentum:
    """A sharp lab-frame four-momentum, identified by its label."""

    label: str
    mass: float
    three_momentum: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        vec = tuple(float(x) for x in self.three_momentum)
        if len(vec) != 3:
            raise ValueError("three_momentum must have 3 components")
        object.__setattr__(self, "three_momentum", vec)

    @classmethod
    def along_z(cls, label: str, mass: float, magnitude: float) -> "Momentum":
        return cls(label, mass, (0.0, 0.0, float(magnitude)))

    @property
    def gamma(self) -> float:
        p2 = sum(x * x for x in self.three_momentum)
        return math.sqrt(1.0 + p2 / self.mass**2)


class BasisState(NamedTuple):
    """``flavor`` and ``momentum`` are both ``None`` for the vacuum."""

    flavor: Flavor | None
    momentum: str | None

    @property
    def is_vacuum(self) -> bool:
        return self.flavor is None

    def __str__(self) -> str:
        if self.is_vacuum:
            return "|0,0>"
        return f"|{self.flavor.value},{self.momentum}>"


VACUUM = BasisState(None, None)


@dataclass(frozen=True)
class SpaceLayout:
    """One-particle space: vacuum plus a flavor doublet for each momentum."""

    momenta: tuple[Momentum, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "momenta", tuple(self.momenta))
        labels = [k.label for k in self.momenta]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"momentum labels must be unique, got {labels}")
        if not labels:
            raise LayoutError("layout needs at least one momentum")

    @cached_property
    def basis(self) -> tuple[BasisState, ...]:
        states = [VACUUM]
        for k in self.momenta:
            states.extend(BasisState(f, k.label) for f in FLAVORS)
        return tuple(states)

    @property
    def dim(self) -> int:
        return 1 + 2 * len(self.momenta)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(k.label for k in self.momenta)

    def momentum(self, label: str) -> Momentum:
        for k in self.momenta:
            if k.label == label:
                return k
        raise LayoutError(f"unknown momentum {label!r}; layout has {self.labels}")

    def index(self, flavor: Flavor | None, label: str | None = None) -> int:
        if flavor is None:
            return 0
        pos = self.labels.index(label) if label in self.labels else None
        if pos is None:
            raise LayoutError(f"unknown momentum {label!r}; layout has {self.labels}")
        return 1 + 2 * pos + FLAVORS.index(flavor)

    def block(self, label: str) -> tuple[int, int]:
        """Indices of the (K0, K0bar) pair for one momentum."""
        return self.index(Flavor.K0, label), self.index(Flavor.K0BAR, label)


@dataclass(frozen=True)
class CompositeLayout:
    """Two-particle space ``first ⊗ second``."""

    first: SpaceLayout
    second: SpaceLayout

    @property
    def dim(self) -> int:
        return self.first.dim * self.second.dim

    @property
    def identical(self) -> bool:
        return self.first == self.second

    def index(self, i: int, j: int) -> int:
        return i * self.second.dim + j

    @cached_property
    def basis(self) -> tuple[tuple[BasisState, BasisState], ...]:
        return tuple((a, b) for a in self.first.basis for b in self.second.basis)


Layout = Union[SpaceLayout, CompositeLayout]


def distinguishable_layout(p: Momentum, q: Momentum) -> CompositeLayout:
    return CompositeLayout(SpaceLayout((p,)), SpaceLayout((q,)))


def identical_layout(p: Momentum, q: Momentum) -> CompositeLayout:
    one = SpaceLayout((p, q))
    return CompositeLayout(one, one)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tied to a layout."""

    layout: Layout
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise LayoutError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.layout.dim:
            raise LayoutError(f"matrix dimension {m.shape[0]} does not match layout dimension {self.layout.dim}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def _check(self, other: "Operator") -> None:
        if other.layout != self.layout:
            raise LayoutError("operators live on different layouts")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.layout, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.layout, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.layout, scalar * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.layout, -self.matrix)

    def adjoint(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = STATE_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def max_abs_diff(self, other: "Operator") -> float:
        self._check(other)
        return float(np.max(np.abs(self.matrix - other.matrix), initial=0.0))


class DensityOperator(Operator):
    """Operator that passed the Hermitian / PSD / unit-trace checks at ``STATE_TOL``."""

    def __post_init__(self) -> None:
        super().__post_init__()
        check_density(self.matrix, STATE_TOL)

    @classmethod
    def pure(cls, layout: Layout, vector: np.ndarray) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex)
        return cls(layout, np.outer(v, v.conj()))


def state_health(matrix: np.ndarray) -> dict[str, float]:
    """Hermiticity defect, smallest eigenvalue and trace defect of a matrix."""
    m = np.asarray(matrix)
    herm = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
    trace_err = float(abs(np.trace(m) - 1.0))
    return {"hermitian": herm, "min_eigenvalue": min_eig, "trace": trace_err}


def check_density(matrix: np.ndarray, tol: float = STATE_TOL) -> None:
    h = state_health(matrix)
    if h["hermitian"] > tol:
        raise InvalidStateError(f"not Hermitian (defect {h['hermitian']:.3g})")
    if h["min_eigenvalue"] < -tol:
        raise InvalidStateError(f"not positive semidefinite (min eigenvalue {h['min_eigenvalue']:.3g})")
    if h["trace"] > tol:
        raise InvalidStateError(f"trace differs from 1 by {h['trace']:.3g}")


def identity(layout: Layout) -> Operator:
    return Operator(layout, np.eye(layout.dim))


def basis_vector(layout: SpaceLayout, flavor: Flavor | None, label: str | None = None) -> np.ndarray:
    v = np.zeros(layout.dim, dtype=complex)
    v[layout.index(flavor, label)] = 1.0
    return v


def projector(layout: SpaceLayout, flavor: Flavor | None, label: str | None = None) -> Operator:
    m = np.zeros((layout.dim, layout.dim), dtype=complex)
    i = layout.index(flavor, label)
    m[i, i] = 1.0
    return Operator(layout, m)


def tensor(a: Operator, b: Operator, layout: CompositeLayout | None = None) -> Operator:
    """Kronecker product ``a ⊗ b`` (``a`` is the slow index)."""
    if not isinstance(a.layout, SpaceLayout) or not isinstance(b.layout, SpaceLayout):
        raise LayoutError("tensor takes one-particle operators")
    composite = CompositeLayout(a.layout, b.layout)
    if layout is not None and layout != composite:
        raise LayoutError("operand layouts do not match the declared composite layout")
    return Operator(composite, np.kron(a.matrix, b.matrix))


def on_first(op: Operator, layout: CompositeLayout) -> Operator:
    """``op ⊗ 1`` on ``layout``."""
    return tensor(op, identity(layout.second), layout)


def on_second(op: Operator, layout: CompositeLayout) -> Operator:
    """``1 ⊗ op`` on ``layout``."""
    return tensor(identity(layout.first), op, layout)


def permutation_operator(layout: CompositeLayout) -> Operator:
    """Particle exchange ``P(|a> ⊗ |b>) = |b> ⊗ |a>``; the vacuum swaps like any basis vector."""
    if not layout.identical:
        raise LayoutError("permutation defined only on identical factor spaces")
    n = layout.first.dim
    m = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            m[layout.index(j, i), layout.index(i, j)] = 1.0
    return Operator(layout, m)


def is_symmetric(op: Operator, tol: float = STATE_TOL) -> bool:
    """True iff ``‖P op P - op‖_max <= tol``."""
    perm = permutation_operator(op.layout)
    return (perm @ op @ perm).max_abs_diff(op) <= tol


def expectation(rho: Operator, op: Operator) -> complex:
    """``Tr(rho op)``."""
    if rho.layout != op.layout:
        raise LayoutError("state and observable live on different layouts")
    # Tr(AB) without forming the product
    return complex(np.sum(rho.matrix * op.matrix.T))


def commutator_norm(a: Operator, b: Operator) -> float:
    return (a @ b).max_abs_diff(b @ a)


def particle_number(layout: Layout) -> np.ndarray:
    """Number of particles in each basis state (0/1 one-particle, 0/1/2 composite)."""
    if isinstance(layout, SpaceLayout):
        return np.array([0 if s.is_vacuum else 1 for s in layout.basis])
    one = particle_number(layout.first)
    two = particle_number(layout.second)
    return (one[:, None] + two[None, :]).ravel()


def sector_coherence(matrix: np.ndarray, layout: Layout) -> float:
    """Largest matrix element between states of different particle number."""
    n = particle_number(layout)
    mask = n[:, None] != n[None, :]
    return float(np.max(np.abs(np.asarray(matrix)[mask]), initial=0.0))


def stack(ops: Iterable[Operator]) -> np.ndarray:
    return np.stack([op.matrix for op in ops])


def describe_basis(layout: Layout) -> Sequence[str]:
    if isinstance(layout, SpaceLayout):
        return [str(s) for s in layout.basis]
    return [f"{a}⊗{b}" for a, b in layout.basis]
