"""Coefficients, asymptotic laws, regimes, backfire, and the Kalman model."""

import math
import warnings

import pytest

from opinionshift import distributions as dist
from opinionshift.analysis import (
    KalmanState,
    Regime,
    RegimeWarning,
    ScaleRegime,
    asymptotic_shift,
    backfire_region,
    classify_regime,
    coefficient_approx,
    degroot_coefficient,
    kalman_steady_gain,
    kalman_steady_variance,
    kalman_step,
    ll_offset,
    local_weight,
    mixture_degroot_coefficient,
    uniform_prior_asymptotic_shift,
)
from opinionshift.errors import UnsupportedComboError, ValidationError
from opinionshift.oracle import fd_slope
from opinionshift.posterior import BeliefState, Combo, posterior_mean

G, L, C = dist.Family.GAUSSIAN, dist.Family.LAPLACE, dist.Family.CAUCHY

PAIR_COMBOS = [
    Combo.GAUSSIAN_GAUSSIAN,
    Combo.GAUSSIAN_LAPLACE,
    Combo.GAUSSIAN_CAUCHY,
    Combo.LAPLACE_GAUSSIAN,
    Combo.LAPLACE_CAUCHY,
    Combo.CAUCHY_GAUSSIAN,
    Combo.CAUCHY_LAPLACE,
    Combo.CAUCHY_CAUCHY,
]


def _shift_fn(combo, s0, se, theta0=0.0):
    pf, sf = combo.value.replace("-equal", "").replace("-unequal", "").split("-")
    prior = BeliefState(dist.Distribution(dist.Family.parse(pf), theta0, s0))
    signal = dist.SignalModel(noise=dist.Distribution(dist.Family.parse(sf), 0.0, se))
    return lambda x: posterior_mean(prior, signal, x).theta1


# ---------------------------------------------------------------------------
# exact small-signal coefficients
# ---------------------------------------------------------------------------


def test_linear_combo_coefficients_machine_exact():
    for s0, se in ((1.0, 1.0), (2.0, 0.5), (0.3, 1.7)):
        assert degroot_coefficient(Combo.GAUSSIAN_GAUSSIAN, s0, se) == s0 * s0 / (s0 * s0 + se * se)
        assert degroot_coefficient(Combo.CAUCHY_CAUCHY, s0, se) == s0 / (s0 + se)
    for s in (0.4, 1.0, 3.0):
        assert degroot_coefficient(Combo.LAPLACE_LAPLACE_EQUAL, s, s) == 0.5


def test_pinned_coefficients():
    assert abs(degroot_coefficient(Combo.GAUSSIAN_CAUCHY, 1.0, 1.0) - 0.47486472383901879091) < 1e-13
    assert abs(degroot_coefficient(Combo.GAUSSIAN_LAPLACE, 1.0, 1.0) - 0.52513527616098120909) < 1e-13
    assert abs(degroot_coefficient(Combo.LAPLACE_CAUCHY, 1.0, 1.0) - 0.4474564821264902871) < 1e-13
    assert degroot_coefficient(Combo.LAPLACE_LAPLACE_UNEQUAL, 1.0, 0.5) == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_family_pair_spelling_accepted():
    assert degroot_coefficient(("gaussian", "cauchy"), 1.0, 1.0) == degroot_coefficient(
        Combo.GAUSSIAN_CAUCHY, 1.0, 1.0
    )


@pytest.mark.parametrize("a", [0.25, 1.0, 4.0])
@pytest.mark.parametrize(
    "combo",
    [
        Combo.GAUSSIAN_CAUCHY,
        Combo.LAPLACE_CAUCHY,
        Combo.GAUSSIAN_LAPLACE,
        Combo.LAPLACE_GAUSSIAN,
        Combo.CAUCHY_GAUSSIAN,
        Combo.CAUCHY_LAPLACE,
    ],
)
def test_coefficients_match_posterior_slopes(combo, a):
    s0, se = 1.0, a
    omega = degroot_coefficient(combo, s0, se)
    slope = fd_slope(_shift_fn(combo, s0, se), 0.0, 1e-4 * s0)
    assert abs(omega - slope) <= 1e-4 * max(abs(omega), 1e-6)


@pytest.mark.parametrize("ratio", [0.25, 4.0])
def test_ll_unequal_coefficient_matches_slope(ratio):
    omega = degroot_coefficient(Combo.LAPLACE_LAPLACE_UNEQUAL, 1.0, ratio)
    slope = fd_slope(_shift_fn(Combo.LAPLACE_LAPLACE_UNEQUAL, 1.0, ratio), 0.0, 1e-4)
    assert abs(omega - slope) <= 1e-4 * abs(omega)


def test_swap_rule_coefficient_is_one_minus_base():
    for s0, se in ((1.0, 2.0), (1.5, 0.75)):
        base = degroot_coefficient(Combo.GAUSSIAN_CAUCHY, se, s0)
        assert degroot_coefficient(Combo.CAUCHY_GAUSSIAN, s0, se) == pytest.approx(
            1.0 - base, abs=1e-15
        )


def test_mixture_coefficient_matches_slope():
    prior = BeliefState(dist.gaussian(0.0, 1.0))
    signal = dist.SignalModel(
        noise=dist.gaussian(0.0, 1.0),
        mixture=(dist.MixtureComponent(0.5, 5.0, 1.0),),
        eps_weight=0.5,
    )
    omega = mixture_degroot_coefficient(prior, signal)
    from opinionshift.posterior import mixture_posterior

    slope = fd_slope(lambda x: mixture_posterior(prior, signal, x).theta1, 0.0, 1e-4)
    assert abs(omega - slope) <= 1e-4 * abs(omega)


# ---------------------------------------------------------------------------
# local_weight (quadrature definition)
# ---------------------------------------------------------------------------


def test_local_weight_gaussian_pair_exact():
    assert abs(local_weight(dist.gaussian(0, 1), dist.gaussian(0, 1)) - 0.5) < 1e-9


def test_local_weight_matches_closed_forms():
    cases = [
        (dist.gaussian(0.4, 1.0), dist.cauchy(0, 1.0), Combo.GAUSSIAN_CAUCHY),
        (dist.laplace(-0.2, 1.0), dist.cauchy(0, 2.0), Combo.LAPLACE_CAUCHY),
        (dist.gaussian(1.1, 1.0), dist.laplace(0, 0.8), Combo.GAUSSIAN_LAPLACE),
        (dist.cauchy(0.0, 1.0), dist.cauchy(0, 3.0), Combo.CAUCHY_CAUCHY),
    ]
    for prior, noise, combo in cases:
        w = local_weight(prior, noise)
        omega = degroot_coefficient(combo, prior.scale, noise.scale)
        assert abs(w - omega) <= 1e-4 * abs(omega)


def test_local_weight_rejects_bounded_uniform_noise():
    with pytest.raises(UnsupportedComboError):
        local_weight(dist.gaussian(0, 1), dist.bounded_uniform(0, 1))


def test_local_weight_bounded_uniform_prior():
    # narrow uniform prior: weight ~ delta^2/(3 sigma_eps^2) for Gaussian noise
    w = local_weight(dist.bounded_uniform(0.0, 0.1), dist.gaussian(0, 1.0))
    assert abs(w - 0.1 ** 2 / 3.0) < 2e-5


# ---------------------------------------------------------------------------
# regime approximations
# ---------------------------------------------------------------------------


def test_tabulated_approximations():
    assert coefficient_approx(Combo.GAUSSIAN_CAUCHY, ScaleRegime.LARGE_A, 1.0, 10.0) == pytest.approx(0.02)
    got = coefficient_approx(Combo.GAUSSIAN_CAUCHY, ScaleRegime.SMALL_A, 1.0, 0.05)
    assert got == pytest.approx(1.0 - math.sqrt(2.0 / math.pi) * 0.05, abs=1e-15)
    assert coefficient_approx(Combo.LAPLACE_CAUCHY, ScaleRegime.LARGE_A, 1.0, 10.0) == pytest.approx(0.04)


def test_approximations_agree_with_exact_in_regime():
    # noisy-signal regime at a = 10
    exact = degroot_coefficient(Combo.GAUSSIAN_CAUCHY, 1.0, 10.0)
    assert abs(coefficient_approx(Combo.GAUSSIAN_CAUCHY, ScaleRegime.LARGE_A, 1.0, 10.0)
               - exact) <= 0.05 * exact
    # the Laplace/Cauchy noisy approximation converges more slowly: 16% off
    # at a = 10, inside 5% from a ~ 30 (and exact in the limit)
    exact = degroot_coefficient(Combo.LAPLACE_CAUCHY, 1.0, 30.0)
    assert abs(coefficient_approx(Combo.LAPLACE_CAUCHY, ScaleRegime.LARGE_A, 1.0, 30.0)
               - exact) <= 0.05 * exact
    exact = degroot_coefficient(Combo.LAPLACE_CAUCHY, 1.0, 300.0)
    assert abs(coefficient_approx(Combo.LAPLACE_CAUCHY, ScaleRegime.LARGE_A, 1.0, 300.0)
               - exact) <= 1e-3 * exact
    # accurate-signal regime, a = 0.05
    for combo in (Combo.GAUSSIAN_CAUCHY, Combo.LAPLACE_CAUCHY):
        exact = degroot_coefficient(combo, 1.0, 0.05)
        approx = coefficient_approx(combo, ScaleRegime.SMALL_A, 1.0, 0.05)
        assert abs(approx - exact) <= 0.05 * exact
    # Gaussian prior, Laplace signal uses a = sqrt2 s0/se
    for regime, (s0, se) in ((ScaleRegime.LARGE_A, (10.0 / math.sqrt(2.0), 1.0)),
                             (ScaleRegime.SMALL_A, (0.05 / math.sqrt(2.0), 1.0))):
        exact = degroot_coefficient(Combo.GAUSSIAN_LAPLACE, s0, se)
        approx = coefficient_approx(Combo.GAUSSIAN_LAPLACE, regime, s0, se)
        assert abs(approx - exact) <= 0.05 * exact


def test_kalman_limit_approximations():
    noisy = coefficient_approx("kalman", ScaleRegime.LARGE_A, 1.0, 100.0)
    assert abs(noisy - kalman_steady_gain(1.0, 100.0)) <= 0.02 * kalman_steady_gain(1.0, 100.0)
    accurate = coefficient_approx("kalman", ScaleRegime.SMALL_A, 1.0, 0.01)
    assert abs(accurate - kalman_steady_gain(1.0, 0.01)) <= 1e-4


# ---------------------------------------------------------------------------
# asymptotic shift laws
# ---------------------------------------------------------------------------


def test_asymptotic_law_values():
    assert asymptotic_shift(Combo.GAUSSIAN_CAUCHY, 1.0, 1.0, 0.0, 100.0) == pytest.approx(0.02)
    assert asymptotic_shift(Combo.GAUSSIAN_LAPLACE, 2.0, 1.0, 0.0, 1e4) == 4.0
    assert asymptotic_shift(Combo.GAUSSIAN_LAPLACE, 2.0, 1.0, 0.0, -1e4) == -4.0


def test_asymptotic_laws_match_closed_forms():
    far = 100.0
    cases = [
        (Combo.GAUSSIAN_CAUCHY, 1.0, 0.5),
        (Combo.LAPLACE_CAUCHY, 1.0, 2.0),
        (Combo.GAUSSIAN_LAPLACE, 1.0, 1.0),
        (Combo.LAPLACE_LAPLACE_UNEQUAL, 1.0, 0.5),
        (Combo.LAPLACE_LAPLACE_UNEQUAL, 0.5, 1.0),
        (Combo.LAPLACE_GAUSSIAN, 1.0, 1.0),
        (Combo.CAUCHY_GAUSSIAN, 1.0, 2.0),
        (Combo.CAUCHY_LAPLACE, 1.0, 1.5),
    ]
    for combo, s0, se in cases:
        x = far * max(s0, se)
        law = asymptotic_shift(combo, s0, se, 0.0, x)
        actual = _shift_fn(combo, s0, se)(x)
        assert abs(law - actual) <= 0.02 * max(abs(actual), abs(law), 1e-12), combo


def test_uniform_prior_law():
    got = uniform_prior_asymptotic_shift(0.3, dist.gaussian(0, 1.0), 0.0, 2.0)
    assert got == pytest.approx(0.06, abs=1e-15)


def test_regime_warning_near_origin():
    with pytest.warns(RegimeWarning):
        asymptotic_shift(Combo.GAUSSIAN_CAUCHY, 1.0, 1.0, 0.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        asymptotic_shift(Combo.GAUSSIAN_CAUCHY, 1.0, 1.0, 0.0, 200.0)


def test_ll_offset_values():
    assert ll_offset(1.0, 0.5) == pytest.approx(2.0 / 3.0, abs=1e-15)
    with pytest.raises(ValidationError):
        ll_offset(1.0, 1.0)


# ---------------------------------------------------------------------------
# regime classification
# ---------------------------------------------------------------------------


def test_regime_table():
    assert classify_regime(G, G, 1, 1).regime is Regime.DEGROOT
    assert classify_regime(G, L, 1, 1).regime is Regime.BOUNDED_SHIFT
    assert classify_regime(G, C, 1, 1).regime is Regime.BOUNDED_CONFIDENCE
    assert classify_regime(L, G, 1, 1).regime is Regime.OVERREACTION
    assert classify_regime(L, C, 1, 1).regime is Regime.BOUNDED_CONFIDENCE
    assert classify_regime(C, G, 1, 1).regime is Regime.OVERREACTION
    assert classify_regime(C, L, 1, 1).regime is Regime.OVERREACTION
    assert classify_regime(C, C, 1, 1).regime is Regime.DEGROOT


def test_laplace_trichotomy():
    assert classify_regime(L, L, 1, 1).regime is Regime.DEGROOT
    assert classify_regime(L, L, 1, 1).omega == 0.5
    assert classify_regime(L, L, 2, 1).regime is Regime.OVERREACTION
    assert classify_regime(L, L, 1, 2).regime is Regime.BOUNDED_SHIFT


def test_bounded_shift_tau_rule():
    rep = classify_regime(G, L, 1, 1)
    fixed = 1.0  # sigma0^2 / sigma_eps
    assert rep.tau == pytest.approx(fixed / rep.omega, rel=1e-12)
    rep_ll = classify_regime(L, L, 0.5, 1.0)
    mag = 2.0 / (1.0 - 0.25) * (0.25 / 1.0)
    assert rep_ll.tau == pytest.approx(mag / rep_ll.omega, rel=1e-9)
    assert rep_ll.x_star is not None


def test_bounded_confidence_tau_is_half_shift_point():
    rep = classify_regime(G, C, 1, 1)
    assert rep.tau is not None
    fn = _shift_fn(Combo.GAUSSIAN_CAUCHY, 1.0, 1.0)
    ratio = (fn(rep.tau) - 0.0) / (rep.omega * rep.tau)
    assert abs(ratio - 0.5) < 1e-6


def test_omega_in_unit_interval_everywhere():
    for combo in PAIR_COMBOS + [Combo.LAPLACE_LAPLACE_EQUAL, Combo.LAPLACE_LAPLACE_UNEQUAL]:
        for s0, se in ((1.0, 0.5), (1.0, 1.0), (1.0, 2.0), (0.25, 1.75)):
            if combo in (Combo.LAPLACE_LAPLACE_EQUAL,) and s0 != se:
                continue
            if combo is Combo.LAPLACE_LAPLACE_UNEQUAL and s0 == se:
                continue
            omega = degroot_coefficient(combo, s0, se)
            assert 0.0 < omega < 1.0, (combo, s0, se)


def test_classification_with_bias_populates_interval():
    rep = classify_regime(G, G, 1, 1, bias=5.0)
    assert rep.regime is Regime.DEGROOT
    assert rep.has_backfire
    assert rep.backfire_interval == (0.0, 5.0)
    clean = classify_regime(G, G, 1, 1, bias=0.0)
    assert not clean.has_backfire


def test_classify_rejects_bad_input():
    with pytest.raises(ValidationError):
        classify_regime(G, G, -1.0, 1.0)
    with pytest.raises(UnsupportedComboError):
        classify_regime(dist.Family.BOUNDED_UNIFORM, G, 1.0, 1.0)


# ---------------------------------------------------------------------------
# backfire regions
# ---------------------------------------------------------------------------


def test_backfire_gaussian_exact():
    assert backfire_region(Combo.GAUSSIAN_GAUSSIAN, 5.0, 0.0, 1.0, 1.0) == (0.0, 5.0)
    assert backfire_region(Combo.GAUSSIAN_GAUSSIAN, -5.0, 0.0, 1.0, 1.0) == (-5.0, 0.0)


def test_backfire_bisection_for_heavy_tails():
    lo, hi = backfire_region(Combo.GAUSSIAN_CAUCHY, 5.0, 0.0, 1.0, 1.0)
    assert lo == 0.0
    assert abs(hi - 5.0) < 1e-8


def test_backfire_sign_law():
    prior = BeliefState(dist.gaussian(0.0, 1.0))
    signal = dist.SignalModel(noise=dist.gaussian(0.0, 1.0), bias=5.0)
    from opinionshift.posterior import biased_posterior

    lo, hi = backfire_region(Combo.GAUSSIAN_GAUSSIAN, 5.0, 0.0, 1.0, 1.0)
    for x in (0.5, 2.5, 4.9):
        assert lo < x < hi
        assert biased_posterior(prior, signal, x).shift < 0.0
    for x in (5.5, 8.0):
        assert biased_posterior(prior, signal, x).shift > 0.0


def test_backfire_requires_bias():
    with pytest.raises(ValidationError):
        backfire_region(Combo.GAUSSIAN_GAUSSIAN, 0.0, 0.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# Kalman model
# ---------------------------------------------------------------------------


def test_kalman_single_step_values():
    state = kalman_step(KalmanState(theta=0.0, v=0.0), 1.0, 1.0, 1.0)
    assert state.gain == 0.5
    assert state.theta == 0.5
    assert state.v == 0.5


def test_kalman_uninformative_signal_limit():
    state = kalman_step(KalmanState(theta=0.3, v=1.0), 100.0, 1.0, 1e9)
    assert state.gain < 1e-15
    assert abs(state.theta - 0.3) < 1e-10


def test_kalman_gain_converges_to_steady_value():
    for s0, se in ((1.0, 1.0), (1.0, 0.01), (2.5, 0.4)):
        target = kalman_steady_gain(s0, se)
        for v0 in (0.0, 10.0 * s0 * s0):
            state = KalmanState(theta=0.0, v=v0)
            steps = 0
            while steps < 200:
                state = kalman_step(state, 1.0, s0, se)
                steps += 1
                if abs(state.gain - target) <= 1e-10:
                    break
            assert abs(state.gain - target) <= 1e-10, (s0, se, v0)


def test_kalman_gain_converges_when_mixing_is_slow():
    # contraction factor is (1 - omega)^2 per step, so a very noisy signal
    # (ratio 100 -> omega ~ 0.01) needs roughly a thousand iterations
    target = kalman_steady_gain(1.0, 100.0)
    state = KalmanState(theta=0.0, v=0.0)
    for _ in range(1500):
        state = kalman_step(state, 1.0, 1.0, 100.0)
    assert abs(state.gain - target) <= 1e-10


def test_kalman_golden_ratio_case():
    assert kalman_steady_gain(1.0, 1.0) == pytest.approx((math.sqrt(5.0) - 1.0) / 2.0, abs=1e-15)


def test_kalman_variance_fixed_point():
    for s0, se in ((1.0, 1.0), (0.5, 3.0)):
        v = kalman_steady_variance(s0, se)
        state = kalman_step(KalmanState(theta=0.0, v=v), 0.7, s0, se)
        assert abs(state.v - v) < 1e-12


def test_kalman_variance_monotone_after_first_step():
    state = KalmanState(theta=0.0, v=10.0)
    prev = None
    deltas = []
    for _ in range(30):
        state = kalman_step(state, 1.0, 1.0, 1.0)
        if prev is not None:
            deltas.append(state.v - prev)
        prev = state.v
    assert all(d <= 0 for d in deltas) or all(d >= 0 for d in deltas)


def test_kalman_state_validation():
    with pytest.raises(ValidationError):
        KalmanState(theta=0.0, v=-1.0)
    with pytest.raises(ValidationError):
        KalmanState(theta=0.0, v=1.0, gain=1.5)
    with pytest.raises(ValidationError):
        kalman_step(KalmanState(theta=0.0, v=0.0), 1.0, -1.0, 1.0)
