import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_params
from kaonkraus.analytic import FLAVOR_PAIRS, ProperTimePair, c_dplus_dplus, c_strangeness, joint_prob_analytic
from kaonkraus.errors import LayoutError, OrderingError, SymmetryError
from kaonkraus.evolution import (
    apply_channel,
    correlation,
    correlation_from_probabilities,
    correlation_grid,
    evolve,
    evolve_observable,
    heisenberg_matrix,
    joint_probability,
    joint_probability_factorized,
    joint_probability_heisenberg,
    measure,
)
from kaonkraus.hilbert import (
    DensityOperator,
    Flavor,
    Momentum,
    Operator,
    SpaceLayout,
    distinguishable_layout,
    expectation,
    identical_layout,
    identity,
    on_first,
    on_second,
    permutation_operator,
)
from kaonkraus.kraus import kraus_family, proper_time
from kaonkraus.observables import (
    Kind,
    Mode,
    ObservableKind,
    detection_projector,
    flavor_projector,
    local_observable,
    singlet_state,
    strangeness,
)

S_P = ObservableKind(Kind.STRANGENESS, "p")
S_Q = ObservableKind(Kind.STRANGENESS, "q")


def observables(layout, a=S_P, b=S_Q):
    return local_observable(layout, a, 0), local_observable(layout, b, 1)


def test_evolve_zero_is_identity(kaon, dist):
    rho = singlet_state(dist, Mode.DISTINGUISHABLE)
    assert evolve(rho, kaon, 0.0).max_abs_diff(rho) <= 1e-15


def test_identical_zero_time_drops_slot_order_coherence(kaon, ident):
    # Per-momentum Kraus operators never connect the (p, q) and (q, p) slot
    # assignments, so the product family removes that coherence even at t = 0.
    # Exchange symmetry and every momentum-local expectation survive.
    rho = singlet_state(ident, Mode.IDENTICAL)
    out = evolve(rho, kaon, 0.0)
    perm = permutation_operator(ident)
    assert (perm @ out @ perm).max_abs_diff(out) == 0.0
    assert expectation(rho, perm).real == pytest.approx(1.0)
    assert expectation(out, perm).real == pytest.approx(0.0, abs=1e-15)
    a, b = observables(ident)
    assert expectation(out, a @ b).real == pytest.approx(expectation(rho, a @ b).real, abs=1e-15)
    np.testing.assert_allclose(np.diag(out.matrix), np.diag(rho.matrix), atol=1e-15)


def test_long_time_reaches_vacuum(kaon, dist, ident):
    t = 200 / kaon.gamma_l
    for layout, mode in ((dist, Mode.DISTINGUISHABLE), (ident, Mode.IDENTICAL)):
        rho = evolve(singlet_state(layout, mode), kaon, t).matrix
        vacuum = np.zeros_like(rho)
        vacuum[0, 0] = 1.0
        assert np.abs(rho - vacuum).max() <= 1e-9


def test_evolve_rejects_negative_time(kaon, dist):
    with pytest.raises(OrderingError):
        evolve(singlet_state(dist, "distinguishable"), kaon, -1.0)


def test_identical_state_stays_symmetric(kaon, boosted):
    layout = identical_layout(*boosted)
    perm = permutation_operator(layout)
    for t in (0.3, 2.0, 40.0):
        rho = evolve(singlet_state(layout, Mode.IDENTICAL), kaon, t)
        assert (perm @ rho @ perm).max_abs_diff(rho) <= 1e-12


def test_duality(kaon, boosted, rng):
    layout = distinguishable_layout(*boosted)
    family = kraus_family(kaon, layout, 1.7)
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    a = a + a.conj().T
    rho = singlet_state(layout, Mode.DISTINGUISHABLE).matrix
    lhs = np.trace(apply_channel(rho, family) @ a)
    rhs = np.trace(rho @ heisenberg_matrix(a, family))
    assert lhs == pytest.approx(rhs, abs=1e-13)


def test_dual_channel_is_unital(kaon, ident):
    for t in (0.0, 0.5, 30.0):
        one = evolve_observable(identity(ident), kaon, t)
        assert one.max_abs_diff(identity(ident)) <= 1e-12


class TestMeasure:
    def test_singlet_strangeness(self, dist):
        rho = singlet_state(dist, Mode.DISTINGUISHABLE)
        outcomes = measure(rho, local_observable(dist, S_P, 0))
        probs = {round(o.eigenvalue): o.probability for o in outcomes}
        assert probs == pytest.approx({-1: 0.5, 0: 0.0, 1: 0.5}, abs=1e-15)
        zero = next(o for o in outcomes if round(o.eigenvalue) == 0)
        assert zero.post_state is None

    def test_collapse_fixes_partner(self, dist):
        rho = singlet_state(dist, Mode.DISTINGUISHABLE)
        plus = next(o for o in measure(rho, local_observable(dist, S_P, 0)) if o.eigenvalue > 0.5)
        bob = local_observable(dist, S_Q, 1)
        assert expectation(plus.post_state, bob).real == pytest.approx(-1.0, abs=1e-15)

    def test_probabilities_sum_to_one(self, kaon, ident):
        rho = evolve(singlet_state(ident, Mode.IDENTICAL), kaon, 1.3)
        for obs in observables(ident):
            outcomes = measure(rho, obs)
            assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)
            for o in outcomes:
                if o.post_state is not None:
                    assert o.post_state.trace() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_unsymmetric_on_identical(self, ident):
        rho = singlet_state(ident, Mode.IDENTICAL)
        with pytest.raises(SymmetryError):
            measure(rho, on_first(strangeness(ident.first, "p"), ident))

    def test_layout_mismatch(self, dist, ident):
        with pytest.raises(LayoutError):
            measure(singlet_state(dist, Mode.DISTINGUISHABLE), identity(ident))


def _flavor_projectors(layout, pair):
    return detection_projector(layout, "p", pair[0], 0), detection_projector(layout, "q", pair[1], 1)


@pytest.mark.parametrize("pair", FLAVOR_PAIRS)
@pytest.mark.parametrize("times", [(0.0, 0.0), (0.4, 0.4), (0.5, 2.5), (1.0, 7.0)])
def test_joint_probability_routes_agree(kaon, boosted, pair, times):
    t_a, t_b = times
    p, q = boosted
    layout = distinguishable_layout(p, q)
    rho0 = singlet_state(layout, Mode.DISTINGUISHABLE)
    pa, pb = _flavor_projectors(layout, pair)
    pipeline = joint_probability(rho0, pa, pb, kaon, t_a, t_b)
    heis = joint_probability_heisenberg(rho0, pa, pb, kaon, t_a, t_b)
    fact = joint_probability_factorized(
        rho0, flavor_projector(layout.first, "p", pair[0]), flavor_projector(layout.second, "q", pair[1]), kaon, t_a, t_b
    )
    closed = joint_prob_analytic(kaon, ProperTimePair(proper_time(t_a, p), proper_time(t_b, q)), pair)
    assert abs(pipeline - heis) <= 1e-12
    assert abs(pipeline - fact) <= 1e-12
    assert abs(pipeline - closed) <= 1e-9


@pytest.mark.parametrize("pair", FLAVOR_PAIRS)
def test_identical_probabilities_match_closed_form(kaon, boosted, pair):
    p, q = boosted
    layout = identical_layout(p, q)
    rho0 = singlet_state(layout, Mode.IDENTICAL)
    pa, pb = _flavor_projectors(layout, pair)
    for t_a, t_b in ((0.2, 0.2), (0.3, 4.0)):
        value = joint_probability(rho0, pa, pb, kaon, t_a, t_b)
        closed = joint_prob_analytic(kaon, ProperTimePair(proper_time(t_a, p), proper_time(t_b, q)), pair)
        assert abs(value - closed) <= 1e-9


def test_no_like_flavor_pairs_at_equal_times(clean, dist):
    rho0 = singlet_state(dist, Mode.DISTINGUISHABLE)
    for t in (0.0, 0.7, 5.0):
        for flavor in Flavor:
            pa, pb = _flavor_projectors(dist, (flavor, flavor))
            assert joint_probability(rho0, pa, pb, clean, t, t) <= 1e-12


def test_pipeline_ordering(kaon, dist):
    rho0 = singlet_state(dist, Mode.DISTINGUISHABLE)
    pa, pb = _flavor_projectors(dist, (Flavor.K0, Flavor.K0BAR))
    with pytest.raises(OrderingError, match="t_b >= t_a"):
        joint_probability(rho0, pa, pb, kaon, 2.0, 1.0)
    with pytest.raises(OrderingError):
        joint_probability_heisenberg(rho0, pa, pb, kaon, -1.0, 1.0)


def test_factorized_needs_distinguishable(kaon, ident):
    rho0 = singlet_state(ident, Mode.IDENTICAL)
    pi = flavor_projector(ident.first, "p", Flavor.K0)
    with pytest.raises(LayoutError):
        joint_probability_factorized(rho0, pi, pi, kaon, 0.0, 1.0)


class TestCorrelation:
    def test_perfect_anticorrelation_at_zero(self, kaon, dist, ident):
        for layout, mode in ((dist, Mode.DISTINGUISHABLE), (ident, Mode.IDENTICAL)):
            res = correlation(singlet_state(layout, mode), *observables(layout), kaon, 0.0, 0.0, mode)
            assert res.value == pytest.approx(-1.0, abs=1e-15)
            assert (res.tau_a, res.tau_b) == (0.0, 0.0)

    @pytest.mark.parametrize("lam", [0.0, 0.05])
    def test_reduces_to_decoherence_form_without_cp_violation(self, lam, boosted):
        params = make_params(lam=lam)
        p, q = boosted
        for layout, mode in ((distinguishable_layout(p, q), Mode.DISTINGUISHABLE), (identical_layout(p, q), Mode.IDENTICAL)):
            rho0 = singlet_state(layout, mode)
            for t_a, t_b in ((0.5, 0.5), (0.2, 3.1), (4.0, 1.0)):
                res = correlation(rho0, *observables(layout), params, t_a, t_b, mode)
                rate = params.gamma_bar + lam
                expected = -math.exp(-rate * (res.tau_a + res.tau_b)) * math.cos(params.delta_m * (res.tau_b - res.tau_a))
                assert abs(res.value - expected) <= 1e-12

    def test_identical_matches_distinguishable(self, kaon, boosted):
        p, q = boosted
        d_layout, i_layout = distinguishable_layout(p, q), identical_layout(p, q)
        d_rho, i_rho = singlet_state(d_layout, "distinguishable"), singlet_state(i_layout, "identical")
        pairs = [
            (S_P, S_Q),
            (ObservableKind(Kind.DETECT_KAON, "p"), ObservableKind(Kind.DETECT_KAON, "q")),
            (ObservableKind(Kind.DETECT_KAON, "p"), ObservableKind(Kind.DETECT_ANTIKAON, "q")),
        ]
        for a, b in pairs:
            for t_a, t_b in ((0.0, 1.0), (2.0, 0.3), (1.5, 1.5)):
                d = correlation(d_rho, *observables(d_layout, a, b), kaon, t_a, t_b, "distinguishable")
                i = correlation(i_rho, *observables(i_layout, a, b), kaon, t_a, t_b, "identical")
                assert abs(d.value - i.value) <= 1e-10

    @pytest.mark.parametrize("times", [(0.0, 0.0), (0.3, 1.9), (2.2, 0.6), (5.0, 5.0)])
    def test_probability_route_agrees(self, kaon, dist, ident, times):
        for layout, mode in ((dist, Mode.DISTINGUISHABLE), (ident, Mode.IDENTICAL)):
            rho0 = singlet_state(layout, mode)
            obs_a, obs_b = observables(layout, ObservableKind(Kind.DETECT_KAON, "p"), S_Q)
            direct = correlation(rho0, obs_a, obs_b, kaon, *times, mode).value
            summed = correlation_from_probabilities(rho0, obs_a, obs_b, kaon, *times)
            assert abs(direct - summed) <= 1e-12

    def test_dminus_dminus_is_mirror_image(self, kaon, boosted):
        # swapping K0 and K0bar detectors flips the sign of δ_L
        p, q = boosted
        layout = distinguishable_layout(p, q)
        rho0 = singlet_state(layout, Mode.DISTINGUISHABLE)
        dm = ObservableKind(Kind.DETECT_ANTIKAON, "p"), ObservableKind(Kind.DETECT_ANTIKAON, "q")
        mirrored = kaon.replace(epsilon=-kaon.epsilon)
        assert mirrored.delta_l == pytest.approx(-kaon.delta_l, rel=1e-15)
        for t_a, t_b in ((0.4, 1.1), (3.0, 0.2)):
            res = correlation(rho0, *observables(layout, *dm), kaon, t_a, t_b, "distinguishable")
            expected = c_dplus_dplus(mirrored, ProperTimePair(res.tau_a, res.tau_b))
            assert abs(res.value - expected) <= 1e-9

    def test_identical_product_order_irrelevant(self, kaon, boosted):
        layout = identical_layout(*boosted)
        rho0 = singlet_state(layout, Mode.IDENTICAL)
        obs_a, obs_b = observables(layout, ObservableKind(Kind.DETECT_KAON, "p"), ObservableKind(Kind.DETECT_KAON, "q"))
        for t_a, t_b in ((0.5, 2.0), (3.0, 0.1)):
            a = evolve_observable(obs_a, kaon, t_a)
            b = evolve_observable(obs_b, kaon, t_b)
            assert abs(expectation(rho0, a @ b) - expectation(rho0, b @ a)) <= 1e-13

    def test_grid_matches_pointwise(self, kaon, boosted):
        p, q = boosted
        for layout, mode in ((distinguishable_layout(p, q), Mode.DISTINGUISHABLE), (identical_layout(p, q), Mode.IDENTICAL)):
            rho0 = singlet_state(layout, mode)
            obs_a, obs_b = observables(layout, ObservableKind(Kind.DETECT_KAON, "p"), ObservableKind(Kind.DETECT_ANTIKAON, "q"))
            t_a, t_b = [0.0, 1.5, 4.0], [0.2, 3.0]
            grid = correlation_grid(rho0, obs_a, obs_b, kaon, t_a, t_b, mode)
            assert [[(r.t_a, r.t_b) for r in line] for line in grid] == [[(a, b) for b in t_b] for a in t_a]
            for line in grid:
                for res in line:
                    single = correlation(rho0, obs_a, obs_b, kaon, res.t_a, res.t_b, mode)
                    assert abs(res.value - single.value) <= 1e-14
                    assert (res.tau_a, res.tau_b) == (single.tau_a, single.tau_b)

    def test_grid_validates_inputs(self, kaon, ident):
        rho0 = singlet_state(ident, Mode.IDENTICAL)
        unsym = on_first(strangeness(ident.first, "p"), ident)
        with pytest.raises(SymmetryError):
            correlation_grid(rho0, unsym, unsym, kaon, [0.0], [1.0], Mode.IDENTICAL)
        with pytest.raises(OrderingError):
            correlation_grid(rho0, *observables(ident), kaon, [-1.0], [1.0], Mode.IDENTICAL)

    def test_mode_mismatch(self, kaon, dist):
        with pytest.raises(LayoutError, match="does not match"):
            correlation(singlet_state(dist, "distinguishable"), *observables(dist), kaon, 0.0, 1.0, "identical")

    def test_needs_two_particles(self, kaon):
        one = SpaceLayout((Momentum("p", 1.0),))
        rho = DensityOperator(one, np.diag([1.0, 0.0, 0.0]))
        with pytest.raises(LayoutError):
            correlation(rho, strangeness(one, "p"), strangeness(one, "p"), kaon, 0.0, 0.0, "distinguishable")

    def test_identical_rejects_unsymmetric(self, kaon, ident):
        rho0 = singlet_state(ident, Mode.IDENTICAL)
        unsym = on_first(strangeness(ident.first, "p"), ident)
        _, obs_b = observables(ident)
        with pytest.raises(SymmetryError):
            correlation(rho0, unsym, obs_b, kaon, 0.0, 1.0, Mode.IDENTICAL)

    def test_identical_rejects_noncommuting(self, kaon, ident):
        rho0 = singlet_state(ident, Mode.IDENTICAL)
        one = ident.first
        flip = np.zeros((5, 5))
        flip[one.index(Flavor.K0, "p"), one.index(Flavor.K0BAR, "p")] = 1.0
        flip = Operator(one, flip + flip.T)
        # symmetric, but a flavor flip at p does not commute with strangeness at p
        sym_flip = on_first(flip, ident) + on_second(flip, ident)
        obs_a, _ = observables(ident)
        with pytest.raises(SymmetryError, match="commute"):
            correlation(rho0, obs_a, sym_flip, kaon, 0.0, 1.0, Mode.IDENTICAL)

    def test_negative_time(self, kaon, dist):
        with pytest.raises(OrderingError):
            correlation(singlet_state(dist, "distinguishable"), *observables(dist), kaon, -0.1, 1.0, "distinguishable")

    def test_result_analytic_attachment(self, kaon, dist):
        res = correlation(singlet_state(dist, "distinguishable"), *observables(dist), kaon, 1.0, 2.0, "distinguishable")
        assert res.deviation is None
        closed = c_strangeness(kaon, ProperTimePair(res.tau_a, res.tau_b))
        assert res.with_analytic(closed).deviation <= 1e-12


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.0, 0.05),
    st.floats(0.0, 0.3),
    st.floats(0.0, 15.0),
    st.floats(0.0, 15.0),
)
def test_strangeness_correlation_bounded(delta_l, lam, t_a, t_b):
    params = make_params(delta_l=delta_l, lam=lam)
    layout = distinguishable_layout(Momentum("p", 1.0), Momentum("q", 1.0))
    res = correlation(singlet_state(layout, "distinguishable"), *observables(layout), params, t_a, t_b, "distinguishable")
    assert -1.0 - 1e-12 <= res.value <= 1.0 + 1e-12
    assert abs(res.value - c_strangeness(params, ProperTimePair(t_a, t_b))) <= 1e-9
