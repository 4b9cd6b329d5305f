"""Invariant suites run by ``kaonkraus validate``.

Each suite returns a :class:`CheckResult` with the worst deviation found and
the tolerance it is held to. Every suite includes the ``t = 0`` edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import ProperTimePair, c_dplus_dminus, c_dplus_dplus, c_strangeness
from .errors import BoundViolationError
from .evolution import apply_channel, correlation
from .hilbert import (
    Momentum,
    SpaceLayout,
    distinguishable_layout,
    identical_layout,
    permutation_operator,
    sector_coherence,
    state_health,
)
from .kraus import build_kraus, kraus_family, two_particle_kraus, verify_normalization
from .observables import Kind, Mode, ObservableKind, local_observable, singlet_state
from .params import PhysicalParams, validate

NORMALIZATION_TOL = 1e-12
SEMIGROUP_TOL = 1e-10
STATE_TOL = 1e-12
ANALYTIC_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status}  {self.name:<28} max_dev={self.deviation:.3e}  tol={self.tol:.0e}{extra}"


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def default_momenta(rest_mass: float = 1.0) -> tuple[Momentum, Momentum]:
    """At rest and at |k| = 1.2 m, so the two proper-time clocks differ."""
    return Momentum.along_z("p", rest_mass, 0.0), Momentum.along_z("q", rest_mass, 1.2 * rest_mass)


def _result(name: str, deviation: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name, deviation, tol, bool(deviation <= tol), detail)


def check_normalization(params: PhysicalParams, times: np.ndarray, p: Momentum, q: Momentum) -> CheckResult:
    worst = 0.0
    single = SpaceLayout((p,))
    merged = SpaceLayout((p, q))
    for t in times:
        worst = max(worst, verify_normalization(build_kraus(params, single, t)))
        worst = max(worst, verify_normalization(build_kraus(params, merged, t)))
    for t in times[:: max(1, len(times) // 5)]:
        k = build_kraus(params, merged, t)
        worst = max(worst, verify_normalization(two_particle_kraus(k, k)))
    return _result("kraus normalization", worst, NORMALIZATION_TOL)


def check_semigroup(
    params: PhysicalParams, times: np.ndarray, p: Momentum, q: Momentum, rng: np.random.Generator, samples: int = 20
) -> CheckResult:
    layout = distinguishable_layout(p, q)
    worst = 0.0
    for n in range(samples):
        rho = random_density(layout.dim, rng)
        t1 = 0.0 if n == 0 else float(rng.choice(times))
        t2 = float(rng.choice(times))
        direct = apply_channel(rho, kraus_family(params, layout, t1 + t2))
        stepped = apply_channel(apply_channel(rho, kraus_family(params, layout, t1)), kraus_family(params, layout, t2))
        worst = max(worst, float(np.max(np.abs(direct - stepped))))
    return _result("semigroup", worst, SEMIGROUP_TOL)


def _evolved_singlets(params: PhysicalParams, times: np.ndarray, p: Momentum, q: Momentum):
    for layout, mode in ((distinguishable_layout(p, q), Mode.DISTINGUISHABLE), (identical_layout(p, q), Mode.IDENTICAL)):
        rho0 = singlet_state(layout, mode).matrix
        for t in times:
            yield layout, apply_channel(rho0, kraus_family(params, layout, t))


def check_state_health(params: PhysicalParams, times: np.ndarray, p: Momentum, q: Momentum) -> CheckResult:
    worst = 0.0
    for _, rho in _evolved_singlets(params, times, p, q):
        h = state_health(rho)
        worst = max(worst, h["hermitian"], -h["min_eigenvalue"], h["trace"])
    return _result("hermitian/psd/trace", worst, STATE_TOL)


def check_exchange_symmetry(params: PhysicalParams, times: np.ndarray, p: Momentum, q: Momentum) -> CheckResult:
    layout = identical_layout(p, q)
    perm = permutation_operator(layout).matrix
    rho0 = singlet_state(layout, Mode.IDENTICAL).matrix
    worst = 0.0
    for t in times:
        rho = apply_channel(rho0, kraus_family(params, layout, t))
        worst = max(worst, float(np.max(np.abs(perm @ rho @ perm - rho))))
    return _result("exchange symmetry", worst, STATE_TOL)


def check_superselection(params: PhysicalParams, times: np.ndarray, p: Momentum, q: Momentum) -> CheckResult:
    worst = 0.0
    for layout, rho in _evolved_singlets(params, times, p, q):
        worst = max(worst, sector_coherence(rho, layout))
    return _result("superselection", worst, STATE_TOL)


_ANALYTIC = {
    (Kind.STRANGENESS, Kind.STRANGENESS): c_strangeness,
    (Kind.DETECT_KAON, Kind.DETECT_KAON): c_dplus_dplus,
    (Kind.DETECT_KAON, Kind.DETECT_ANTIKAON): c_dplus_dminus,
}


def check_analytic(params: PhysicalParams, times: np.ndarray, p: Momentum, q: Momentum) -> CheckResult:
    worst = 0.0
    grid = times[:: max(1, len(times) // 6)]
    for layout, mode in ((distinguishable_layout(p, q), Mode.DISTINGUISHABLE), (identical_layout(p, q), Mode.IDENTICAL)):
        rho0 = singlet_state(layout, mode)
        for (ka, kb), formula in _ANALYTIC.items():
            obs_a = local_observable(layout, ObservableKind(ka, "p"), 0)
            obs_b = local_observable(layout, ObservableKind(kb, "q"), 1)
            for t_a in grid:
                for t_b in grid:
                    res = correlation(rho0, obs_a, obs_b, params, t_a, t_b, mode)
                    expected = formula(params, ProperTimePair(res.tau_a, res.tau_b))
                    worst = max(worst, abs(res.value - expected))
    return _result("closed-form agreement", worst, ANALYTIC_TOL)


def run_all(
    params: PhysicalParams, tau_max: float | None = None, rest_mass: float = 1.0, seed: int = 0, points: int = 50
) -> list[CheckResult]:
    """Run every suite; a λ-bound failure is reported and the matrix suites skipped."""
    if tau_max is None:
        tau_max = 20.0 / params.gamma_l
    report = validate(params, tau_max)
    results = [
        CheckResult(
            "lambda bound",
            max(0.0, -report.radicand_min),
            report.tol,
            report.passed,
            f"min radicand {report.radicand_min:.6g} at tau={report.tau_min:.6g}",
        )
    ]
    if not report.passed:
        return results
    p, q = default_momenta(rest_mass)
    times = np.concatenate([[0.0], np.linspace(tau_max / points, tau_max, points)])
    # semigroup in the short-time regime where both flavors are still populated
    short = np.concatenate([[0.0], np.linspace(0.05, 10.0, 20) / params.gamma_s])
    rng = np.random.default_rng(seed)
    try:
        results.append(check_normalization(params, times, p, q))
        results.append(check_semigroup(params, np.concatenate([short, times[1::10]]), p, q, rng))
        for suite in (check_state_health, check_exchange_symmetry, check_superselection):
            results.append(suite(params, np.concatenate([short, times[1::5]]), p, q))
        results.append(check_analytic(params, short, p, q))
    except BoundViolationError as exc:
        results.append(CheckResult("lambda bound (kraus)", abs(exc.radicand), report.tol, False, str(exc)))
    return results
