"""Grid sweeps behind the ``correlate`` and ``probabilities`` commands."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .analytic import FLAVOR_PAIRS, ProperTimePair, c_dplus_dminus, c_dplus_dplus, c_strangeness, joint_prob_analytic
from .evolution import correlation_grid, joint_probability
from .hilbert import CompositeLayout, Flavor, Momentum, distinguishable_layout, identical_layout
from .kraus import proper_time
from .observables import Kind, Mode, ObservableKind, detection_projector, local_observable, parse_observable, singlet_state
from .params import PhysicalParams, ValidationReport, validate

CORRELATION_HEADER = ("t_a", "t_b", "tau_a", "tau_b", "mode", "observable", "value", "analytic", "abs_diff")
PROBABILITY_HEADER = ("t_a", "t_b", "pair", "pipeline", "analytic", "abs_diff")

FLAVOR_NAMES = {Flavor.K0: "K0", Flavor.K0BAR: "K0bar"}

CLOSED_FORMS: dict[tuple[Kind, Kind], Callable[[PhysicalParams, ProperTimePair], float]] = {
    (Kind.STRANGENESS, Kind.STRANGENESS): c_strangeness,
    (Kind.DETECT_KAON, Kind.DETECT_KAON): c_dplus_dplus,
    (Kind.DETECT_KAON, Kind.DETECT_ANTIKAON): c_dplus_dminus,
}


def parse_range(text: str) -> np.ndarray:
    """``"lo:hi:n"`` -> ``n`` evenly spaced lab times (``n = 1`` gives ``[lo]``)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be lo:hi:n, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if lo < 0 or hi < lo:
        raise ValueError(f"range needs 0 <= lo <= hi, got {text!r}")
    if n < 1:
        raise ValueError("step count must be at least 1")
    if n == 1:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def parse_pair(text: str) -> tuple[ObservableKind, ObservableKind]:
    tokens = text.split()
    if len(tokens) != 2:
        raise ValueError(f"observable pair needs two tokens like 'S@p S@q', got {text!r}")
    a, b = parse_observable(tokens[0]), parse_observable(tokens[1])
    if a.momentum != "p" or b.momentum != "q":
        raise ValueError("Alice observes momentum p and Bob momentum q: use '<X>@p <Y>@q'")
    return a, b


@dataclass(frozen=True)
class SweepConfig:
    params: PhysicalParams
    rest_mass: float
    t_a: np.ndarray
    t_b: np.ndarray
    mode: Mode = Mode.DISTINGUISHABLE
    observables: tuple[ObservableKind, ObservableKind] = (
        ObservableKind(Kind.STRANGENESS, "p"),
        ObservableKind(Kind.STRANGENESS, "q"),
    )
    p_mom: float = 0.0
    q_mom: float = 0.0

    def momenta(self) -> tuple[Momentum, Momentum]:
        return (
            Momentum.along_z("p", self.rest_mass, self.p_mom),
            Momentum.along_z("q", self.rest_mass, self.q_mom),
        )

    def layout(self) -> CompositeLayout:
        p, q = self.momenta()
        return identical_layout(p, q) if self.mode is Mode.IDENTICAL else distinguishable_layout(p, q)

    def bound_check(self) -> ValidationReport | None:
        """λ-bound scan up to the largest proper time on the grid (None if the grid is all zeros)."""
        p, q = self.momenta()
        tau_max = max(proper_time(float(np.max(self.t_a)), p), proper_time(float(np.max(self.t_b)), q))
        return validate(self.params, tau_max) if tau_max > 0 else None

    @property
    def observable_label(self) -> str:
        return f"{self.observables[0]} {self.observables[1]}"


def fmt(x: float | None) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    return "" if x is None else repr(float(x))


def correlation_rows(cfg: SweepConfig) -> Iterator[tuple]:
    layout = cfg.layout()
    rho0 = singlet_state(layout, cfg.mode)
    obs_a = local_observable(layout, cfg.observables[0], 0)
    obs_b = local_observable(layout, cfg.observables[1], 1)
    closed = CLOSED_FORMS.get((cfg.observables[0].kind, cfg.observables[1].kind))
    grid = correlation_grid(rho0, obs_a, obs_b, cfg.params, cfg.t_a, cfg.t_b, cfg.mode)
    for line in grid:
        for res in line:
            if closed is not None:
                res = res.with_analytic(closed(cfg.params, ProperTimePair(res.tau_a, res.tau_b)))
            yield (
                res.t_a, res.t_b, res.tau_a, res.tau_b, cfg.mode.value, cfg.observable_label,
                res.value, res.analytic, res.deviation,
            )


def probability_rows(cfg: SweepConfig) -> Iterator[tuple]:
    layout = cfg.layout()
    rho0 = singlet_state(layout, cfg.mode)
    p, q = cfg.momenta()
    projectors = {
        pair: (detection_projector(layout, "p", pair[0], 0), detection_projector(layout, "q", pair[1], 1))
        for pair in FLAVOR_PAIRS
    }
    for t_a in cfg.t_a:
        for t_b in cfg.t_b:
            t_a, t_b = float(t_a), float(t_b)
            times = ProperTimePair(proper_time(t_a, p), proper_time(t_b, q))
            for pair in FLAVOR_PAIRS:
                pa, pb = projectors[pair]
                if t_b >= t_a:
                    value = joint_probability(rho0, pa, pb, cfg.params, t_a, t_b)
                else:
                    value = joint_probability(rho0, pb, pa, cfg.params, t_b, t_a)
                expected = joint_prob_analytic(cfg.params, times, pair)
                label = f"{FLAVOR_NAMES[pair[0]]}-{FLAVOR_NAMES[pair[1]]}"
                yield (t_a, t_b, label, value, expected, abs(value - expected))


def to_csv(header: tuple[str, ...], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) if (x is None or isinstance(x, (float, np.floating))) else x for x in row])
    return buf.getvalue()
