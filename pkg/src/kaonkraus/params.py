"""Physical parameters of a neutral-meson pair and the complete-positivity check.

All quantities are dimensionless numbers in one natural-unit system chosen by
the caller (the presets measure time in units of the short-lived lifetime).
Nothing here converts units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import BoundViolationError, ParameterError

RADICAND_TOL = 1e-12
GRID_POINTS = 100_000
# lower edge of the log grid, relative to tau_max
GRID_FLOOR = 1e-12

PARAM_KEYS = ("gamma_s", "gamma_l", "m_s", "m_l", "epsilon_re", "epsilon_im", "lambda")


@dataclass(frozen=True)
class PhysicalParams:
    """Decay widths, masses, CP-violation parameter and decoherence rate.

    ``lam`` is the decoherence rate (``lambda`` is reserved in Python; the JSON
    key is still ``"lambda"``).
    """

    gamma_s: float
    gamma_l: float
    m_s: float
    m_l: float
    epsilon: complex = 0j
    lam: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", complex(self.epsilon))
        for name in ("gamma_s", "gamma_l", "m_s", "m_l", "lam"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.gamma_s <= 0 or self.gamma_l <= 0:
            raise ParameterError("decay widths must be positive")
        if self.lam < 0:
            raise ParameterError("decoherence rate lambda must be nonnegative")
        if not abs(self.epsilon) < 1:
            raise ParameterError("|epsilon| must be < 1")

    @property
    def gamma_bar(self) -> float:
        return 0.5 * (self.gamma_s + self.gamma_l)

    @property
    def delta_m(self) -> float:
        return self.m_l - self.m_s

    @property
    def delta_l(self) -> float:
        eps = self.epsilon
        return 2.0 * eps.real / (1.0 + abs(eps) ** 2)

    def replace(self, **changes: Any) -> "PhysicalParams":
        fields = dict(
            gamma_s=self.gamma_s,
            gamma_l=self.gamma_l,
            m_s=self.m_s,
            m_l=self.m_l,
            epsilon=self.epsilon,
            lam=self.lam,
        )
        fields.update(changes)
        return PhysicalParams(**fields)

    def to_dict(self) -> dict[str, float]:
        return {
            "gamma_s": self.gamma_s,
            "gamma_l": self.gamma_l,
            "m_s": self.m_s,
            "m_l": self.m_l,
            "epsilon_re": self.epsilon.real,
            "epsilon_im": self.epsilon.imag,
            "lambda": self.lam,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PhysicalParams":
        missing = [k for k in PARAM_KEYS if k not in data]
        if missing:
            raise ParameterError(f"missing parameter keys: {', '.join(missing)}")
        try:
            return cls(
                gamma_s=float(data["gamma_s"]),
                gamma_l=float(data["gamma_l"]),
                m_s=float(data["m_s"]),
                m_l=float(data["m_l"]),
                epsilon=complex(float(data["epsilon_re"]), float(data["epsilon_im"])),
                lam=float(data["lambda"]),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"bad parameter value: {exc}") from exc


def cexpm1(z: np.ndarray | complex) -> np.ndarray:
    """``exp(z) - 1`` for complex ``z`` without cancellation near zero."""
    z = np.asarray(z, dtype=complex)
    a, b = z.real, z.imag
    real = np.expm1(a) * np.cos(b) - 2.0 * np.sin(0.5 * b) ** 2
    imag = np.exp(a) * np.sin(b)
    return real + 1j * imag


def kraus_radicand(params: PhysicalParams, tau: np.ndarray | float) -> np.ndarray:
    """Quantity under the square root of the second decay Kraus operator.

    ``1 - e^{-τΓ_S} - δ_L² |1 - e^{-τ(Γ+λ-iΔm)}|² / (1 - e^{-τΓ_L})``, evaluated with
    ``expm1`` so it stays accurate as ``τ -> 0``. The value at ``τ = 0`` is its
    limit, 0.
    """
    tau = np.asarray(tau, dtype=float)
    survive_s = -np.expm1(-tau * params.gamma_s)
    decay_l = -np.expm1(-tau * params.gamma_l)
    rate = params.gamma_bar + params.lam - 1j * params.delta_m
    w = -cexpm1(-tau * rate)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(decay_l > 0, np.abs(w) ** 2 / np.where(decay_l > 0, decay_l, 1.0), 0.0)
    return survive_s - params.delta_l**2 * ratio


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    tau_min: float
    radicand_min: float
    tau_max: float
    tol: float = RADICAND_TOL

    def raise_if_failed(self) -> None:
        if not self.passed:
            raise BoundViolationError(self.tau_min, self.radicand_min)

    def describe(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"lambda-bound {status}: min radicand {self.radicand_min:.6g} "
            f"at tau={self.tau_min:.6g} over (0, {self.tau_max:.6g}]"
        )


def validation_grid(tau_max: float, points: int = GRID_POINTS) -> np.ndarray:
    return np.geomspace(tau_max * GRID_FLOOR, tau_max, points)


def validate(params: PhysicalParams, tau_max: float, points: int = GRID_POINTS) -> ValidationReport:
    """Scan the radicand on a log grid over ``(0, tau_max]``.

    Construction invariants are enforced by :class:`PhysicalParams` itself; this
    only checks the complete-positivity condition, which the Kraus set
    needs at every proper time reached.
    """
    if not tau_max > 0:
        raise ParameterError("tau_max must be positive")
    taus = validation_grid(tau_max, points)
    values = kraus_radicand(params, taus)
    i = int(np.argmin(values))
    rmin = float(values[i])
    return ValidationReport(
        passed=rmin >= -RADICAND_TOL, tau_min=float(taus[i]), radicand_min=rmin, tau_max=tau_max
    )


@dataclass(frozen=True)
class Preset:
    """Parameter set plus the rest mass used for Lorentz factors.

    ``rest_mass`` is in MeV; CLI momenta are then in MeV/c. The masses inside
    ``params`` are offsets (``m_s = 0``): only the difference is physical, and
    absolute values of order 1e13 in lifetime units would destroy the phases
    in double precision.
    """

    params: PhysicalParams
    rest_mass: float
    source: str = field(default="", compare=False)


# External data (PDG 2024 averages), not taken from the model itself.
# Time unit: the short-lived lifetime (Γ_S = 1).
PRESETS: dict[str, Preset] = {
    "kaon-like": Preset(
        params=PhysicalParams(
            gamma_s=1.0,
            gamma_l=0.8954e-10 / 5.116e-8,
            m_s=0.0,
            m_l=0.5293e10 * 0.8954e-10,
            epsilon=complex(2.228e-3 * math.cos(math.radians(43.52)), 2.228e-3 * math.sin(math.radians(43.52))),
            lam=0.0,
        ),
        rest_mass=497.611,
        source="PDG: tau_S=0.8954e-10 s, tau_L=5.116e-8 s, dm=0.5293e10 hbar/s, |eps|=2.228e-3, phi=43.52 deg",
    ),
    "b-meson-like": Preset(
        params=PhysicalParams(
            gamma_s=1.0005,
            gamma_l=0.9995,
            m_s=0.0,
            m_l=0.769,
            epsilon=complex(-5e-4, 0.0),
            lam=0.0,
        ),
        rest_mass=5279.66,
        source="PDG/HFLAV B_d: x_d=0.769, dGamma/Gamma~1e-3, |q/p| within 1e-3 of 1",
    ),
}


def load_params(path: str | Path) -> tuple[PhysicalParams, float]:
    """Read a flat JSON parameter file.

    Returns the parameters and the rest mass (optional ``rest_mass`` key,
    default 1.0, i.e. momenta measured in units of the rest mass).
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read parameter file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError("parameter file must hold a JSON object")
    rest_mass = float(data.get("rest_mass", 1.0))
    if not rest_mass > 0:
        raise ParameterError("rest_mass must be positive")
    return PhysicalParams.from_dict(data), rest_mass
