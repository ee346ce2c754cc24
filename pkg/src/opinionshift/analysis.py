"""Derived quantities of the shift functions and the tracking-filter model.

Small-signal linear coefficients (exact and regime approximations),
large-signal shift laws, regime classification of every prior/signal pair,
sign-reversal (backfire) intervals under a biased signal, the
mixture-induced suppressed-shift interval, and the scalar Kalman filter
whose steady gain realizes a constant linear coefficient.
"""

import math
import warnings as _warnings
from dataclasses import dataclass
from enum import Enum

from .distributions import Distribution, Family, SignalModel, asymptotic_score, local_score, pdf
from .errors import UnsupportedComboError, ValidationError
from .oracle import DEFAULT_CONFIG, QuadratureConfig, integrate
from .posterior import (
    BeliefState,
    Combo,
    SWAP_BASES,
    biased_posterior,
    mixture_confidence,
    posterior_mean,
    resolve_combo,
    scales_equal,
    stable_degroot_omega,
)
from .specfun import ci as _ci, erfcx_real as _erfcxr, si as _si

_SQRT2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class Regime(str, Enum):
    DEGROOT = "degroot"
    BOUNDED_CONFIDENCE = "bounded_confidence"
    BOUNDED_SHIFT = "bounded_shift"
    OVERREACTION = "overreaction"
    BACKFIRE = "backfire"


class ScaleRegime(str, Enum):
    """Asymptotic regime of the combo's scale ratio ``a``.

    ``LARGE_A`` is the noisy-signal limit for Cauchy-signal combos
    (``a = sigma_eps/sigma0 >> 1``); for the Gaussian-prior/Laplace-signal
    combo the ratio is ``a = sqrt2 sigma0/sigma_eps``, so large ``a`` there
    means an accurate signal.
    """

    LARGE_A = "large_a"
    SMALL_A = "small_a"


class RegimeWarning(UserWarning):
    """An asymptotic law was evaluated outside its validity regime."""


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    omega: float
    tau: float | None = None
    x_star: float | None = None
    backfire_interval: tuple | None = None

    @property
    def has_backfire(self) -> bool:
        return self.backfire_interval is not None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "omega": self.omega,
            "tau": self.tau,
            "x_star": self.x_star,
            "backfire_interval": list(self.backfire_interval)
            if self.backfire_interval is not None
            else None,
        }


@dataclass(frozen=True)
class KalmanState:
    """Scalar tracking-filter state: estimate, its variance, last gain."""

    theta: float
    v: float
    gain: float | None = None

    def __post_init__(self):
        if self.v < 0.0:
            raise ValidationError(f"estimate variance must be >= 0, got {self.v!r}")
        if self.gain is not None and not 0.0 < self.gain < 1.0:
            raise ValidationError(f"gain must lie in (0, 1), got {self.gain!r}")


# ---------------------------------------------------------------------------
# Small-signal coefficient: quadrature definition and exact closed forms.
# ---------------------------------------------------------------------------


def local_weight(prior, noise: Distribution, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Small-signal slope as a reweighted-prior expectation.

    Computes ``E[theta * s_l(theta)]`` under the prior reweighted by the
    likelihood evaluated at the prior location.  Equals the derivative of
    the posterior mean at ``x = theta0`` for symmetric proper pairs.
    """
    prior = prior if isinstance(prior, BeliefState) else BeliefState(prior)
    if noise.family is Family.BOUNDED_UNIFORM:
        raise UnsupportedComboError("bounded-uniform signal noise is not supported")
    if noise.location != 0.0:
        raise ValidationError("signal noise must be located at zero")
    t0 = prior.theta0

    def weight(theta):
        return pdf(prior.prior, theta) * pdf(noise, t0 - theta)

    def num_fn(theta):
        if theta == t0:
            return 0.0  # measure-zero kink point of Laplace noise
        return theta * local_score(noise, t0, theta) * weight(theta)

    if prior.prior.family is Family.BOUNDED_UNIFORM:
        support = (t0 - prior.sigma0, t0 + prior.sigma0)
    else:
        support = (-math.inf, math.inf)
    span = 8.0 * max(prior.sigma0, noise.scale)
    bps = [t0, t0 - span, t0 + span]
    den, _, _ = integrate(weight, bps, cfg, support)
    num, _, _ = integrate(num_fn, bps, cfg, support)
    return num / den


def _gc_coefficient(a: float) -> float:
    return 1.0 + a * a - _SQRT_2_OVER_PI * a / _erfcxr(a / _SQRT2)


def _lc_coefficient(a: float) -> float:
    sia, cia = _si(a), _ci(a)
    sn, cs = math.sin(a), math.cos(a)
    num = 0.5 * math.pi * sn - cs * cia - sn * sia
    den = 0.5 * math.pi * cs - cs * sia + sn * cia
    return 1.0 - a * num / den


def _gl_coefficient(a: float) -> float:
    return 0.5 * a * (2.0 / (_SQRT_PI * _erfcxr(0.5 * a)) - a)


def degroot_coefficient(combo, sigma0: float, sigma_eps: float) -> float:
    """Exact small-signal coefficient for a Table combination.

    ``combo`` may be a :class:`Combo` or a ``(prior, signal)`` family pair;
    the Laplace/Laplace cell resolves by scale equality.
    """
    if not isinstance(combo, Combo):
        pf, sf = combo
        combo = resolve_combo(
            Distribution(Family.parse(pf), 0.0, sigma0),
            Distribution(Family.parse(sf), 0.0, sigma_eps),
        )
    if sigma0 <= 0.0 or sigma_eps <= 0.0:
        raise ValidationError("scales must be positive")
    if combo in (Combo.GAUSSIAN_GAUSSIAN, Combo.LAPLACE_LAPLACE_EQUAL, Combo.CAUCHY_CAUCHY):
        return stable_degroot_omega(combo, sigma0, sigma_eps)
    if combo is Combo.LAPLACE_LAPLACE_UNEQUAL:
        return sigma0 / (sigma0 + sigma_eps)
    if combo is Combo.GAUSSIAN_CAUCHY:
        return _gc_coefficient(sigma_eps / sigma0)
    if combo is Combo.LAPLACE_CAUCHY:
        return _lc_coefficient(sigma_eps / sigma0)
    if combo is Combo.GAUSSIAN_LAPLACE:
        return _gl_coefficient(_SQRT2 * sigma0 / sigma_eps)
    if combo in SWAP_BASES:
        # role swap: 1 - omega of the base pair with exchanged scales
        return 1.0 - degroot_coefficient(SWAP_BASES[combo], sigma_eps, sigma0)
    raise UnsupportedComboError(f"no closed-form coefficient for {combo.value}")


def mixture_degroot_coefficient(prior, signal: SignalModel) -> float:
    """Small-signal coefficient under a mixture signal.

    The mixture scales the non-mixture coefficient by the confidence weight
    at the prior location: ``omega_m = alpha(theta0 + b) * omega_nm``.
    """
    prior = prior if isinstance(prior, BeliefState) else BeliefState(prior)
    core = Distribution(signal.noise.family, 0.0, signal.noise.scale)
    omega_nm = degroot_coefficient(
        resolve_combo(prior.prior, core), prior.sigma0, signal.noise.scale
    )
    if not signal.has_mixture:
        return omega_nm
    alpha0 = mixture_confidence(prior, signal, prior.theta0 + signal.bias)
    return alpha0 * omega_nm


_KALMAN = "kalman"


def coefficient_approx(combo, regime: ScaleRegime, sigma0: float, sigma_eps: float) -> float:
    """Tabulated asymptotic approximation of the small-signal coefficient.

    ``combo`` additionally accepts ``"kalman"`` for the steady-gain limits.
    The ratio ``a`` follows each combo's own convention (see
    :class:`ScaleRegime`).
    """
    regime = ScaleRegime(regime)
    if isinstance(combo, str) and combo.lower() == _KALMAN:
        if regime is ScaleRegime.LARGE_A:  # noisy signal
            return sigma0 / (sigma0 + sigma_eps)
        return sigma0 * sigma0 / (sigma0 * sigma0 + sigma_eps * sigma_eps)
    combo = Combo(combo)
    if combo is Combo.GAUSSIAN_CAUCHY:
        a = sigma_eps / sigma0
        return 2.0 / (a * a) if regime is ScaleRegime.LARGE_A else 1.0 - _SQRT_2_OVER_PI * a
    if combo is Combo.LAPLACE_CAUCHY:
        a = sigma_eps / sigma0
        return 4.0 / (a * a) if regime is ScaleRegime.LARGE_A else 1.0 + (2.0 / math.pi) * a * math.log(a)
    if combo is Combo.GAUSSIAN_LAPLACE:
        a = _SQRT2 * sigma0 / sigma_eps
        return 1.0 - 4.0 / (a * a) if regime is ScaleRegime.LARGE_A else a / _SQRT_PI
    raise UnsupportedComboError(f"no tabulated approximation for {combo!r}")


# ---------------------------------------------------------------------------
# Large-signal laws.
# ---------------------------------------------------------------------------

_REGIME_FACTOR = 10.0


def _warn_regime(combo, dev, scale):
    if abs(dev) < _REGIME_FACTOR * scale:
        _warnings.warn(
            f"{combo.value}: |x - theta0| = {abs(dev):g} is not large against "
            f"the scales (needs >> {scale:g}); asymptotic value may be crude",
            RegimeWarning,
            stacklevel=3,
        )


def asymptotic_shift(combo, sigma0: float, sigma_eps: float, theta0: float, x: float) -> float:
    """Leading-order shift for signals far from the prior location.

    Values are pinned to the quadrature oracle: for a Laplace prior with a
    Cauchy signal the decay constant is twice the prior variance,
    ``4 sigma0^2`` (the Gaussian-prior analogue is ``2 sigma0^2``).
    Evaluating inside the small-deviation region emits RegimeWarning.
    """
    combo = Combo(combo)
    dev = float(x) - float(theta0)
    if combo in (Combo.GAUSSIAN_GAUSSIAN, Combo.LAPLACE_LAPLACE_EQUAL, Combo.CAUCHY_CAUCHY):
        return stable_degroot_omega(combo, sigma0, sigma_eps) * dev
    _warn_regime(combo, dev, max(sigma0, sigma_eps))
    if dev == 0.0:
        return 0.0
    sgn = math.copysign(1.0, dev)
    if combo is Combo.GAUSSIAN_CAUCHY:
        return 2.0 * sigma0 * sigma0 / dev
    if combo is Combo.LAPLACE_CAUCHY:
        return 4.0 * sigma0 * sigma0 / dev
    if combo is Combo.GAUSSIAN_LAPLACE:
        return sgn * sigma0 * sigma0 / sigma_eps
    if combo is Combo.LAPLACE_LAPLACE_UNEQUAL:
        x_star = ll_offset(sigma0, sigma_eps)
        if sigma0 > sigma_eps:
            return dev - sgn * x_star
        return -sgn * (sigma0 / sigma_eps) * x_star
    if combo is Combo.LAPLACE_GAUSSIAN:
        return dev - sgn * sigma_eps * sigma_eps / sigma0
    if combo in (Combo.CAUCHY_GAUSSIAN, Combo.CAUCHY_LAPLACE):
        return dev - 2.0 * sigma_eps * sigma_eps / dev
    raise UnsupportedComboError(f"no asymptotic law for {combo.value}")


def uniform_prior_asymptotic_shift(half_width: float, noise: Distribution,
                                   theta0: float, x: float) -> float:
    """Shift under a narrow bounded-uniform prior: ``(delta^2/3) s_a``."""
    if half_width <= 0.0:
        raise ValidationError("half_width must be positive")
    return (half_width * half_width / 3.0) * asymptotic_score(noise, theta0, x)


def ll_offset(sigma0: float, sigma_eps: float) -> float:
    """Offset ``x* = 2 a0 / (a_eps^2 - a0^2)`` of the unequal-scale Laplace pair."""
    if scales_equal(sigma0, sigma_eps):
        raise ValidationError("offset is undefined for equal scales")
    a0, ae = 1.0 / sigma0, 1.0 / sigma_eps
    return 2.0 * a0 / (ae * ae - a0 * a0)


# ---------------------------------------------------------------------------
# Regime classification.
# ---------------------------------------------------------------------------

_REGIME_TABLE = {
    (Family.GAUSSIAN, Family.GAUSSIAN): Regime.DEGROOT,
    (Family.GAUSSIAN, Family.LAPLACE): Regime.BOUNDED_SHIFT,
    (Family.GAUSSIAN, Family.CAUCHY): Regime.BOUNDED_CONFIDENCE,
    (Family.LAPLACE, Family.GAUSSIAN): Regime.OVERREACTION,
    (Family.LAPLACE, Family.CAUCHY): Regime.BOUNDED_CONFIDENCE,
    (Family.CAUCHY, Family.GAUSSIAN): Regime.OVERREACTION,
    (Family.CAUCHY, Family.LAPLACE): Regime.OVERREACTION,
    (Family.CAUCHY, Family.CAUCHY): Regime.DEGROOT,
}


def _bounded_confidence_tau(prior_family, signal_family, sigma0, sigma_eps, omega):
    """Operational confidence radius: |x - theta0| where the exact shift
    falls to half the linear extrapolation.  Implementation-defined; the
    model-schema parameter has no closed form."""
    prior = BeliefState(Distribution(prior_family, 0.0, sigma0))
    signal = SignalModel(noise=Distribution(signal_family, 0.0, sigma_eps))

    def excess(d):
        return posterior_mean(prior, signal, d).shift - 0.5 * omega * d

    lo = 1e-3 * sigma0
    hi = 4.0 * max(sigma0, sigma_eps)
    it = 0
    while excess(hi) > 0.0 and it < 200:
        hi *= 2.0
        it += 1
    if it >= 200:
        return None
    return _bisect(excess, lo, hi, 1e-10 * sigma0)


def _bisect(f, lo, hi, tol, max_iter=200):
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        fm = f(mid)
        if (flo <= 0.0) == (fm <= 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_regime(prior_family, signal_family, sigma0: float, sigma_eps: float,
                    bias: float = 0.0) -> RegimeReport:
    """Classify the opinion-dynamics regime of a prior/signal pair.

    The regime follows the family table (with the Laplace/Laplace cell
    resolved by the scale ratio); a nonzero perceived bias additionally
    populates the sign-reversal interval.
    """
    pf, sf = Family.parse(prior_family), Family.parse(signal_family)
    if sigma0 <= 0.0 or sigma_eps <= 0.0:
        raise ValidationError("scales must be positive")
    if pf is Family.BOUNDED_UNIFORM or sf is Family.BOUNDED_UNIFORM:
        raise UnsupportedComboError("bounded-uniform pairs are not classified")

    if pf is Family.LAPLACE and sf is Family.LAPLACE:
        if scales_equal(sigma0, sigma_eps):
            regime = Regime.DEGROOT
        elif sigma0 > sigma_eps:
            regime = Regime.OVERREACTION
        else:
            regime = Regime.BOUNDED_SHIFT
    else:
        regime = _REGIME_TABLE[(pf, sf)]

    combo = resolve_combo(
        Distribution(pf, 0.0, sigma0), Distribution(sf, 0.0, sigma_eps)
    )
    omega = degroot_coefficient(combo, sigma0, sigma_eps)

    tau = None
    x_star = None
    if combo in (Combo.LAPLACE_LAPLACE_UNEQUAL,):
        x_star = ll_offset(sigma0, sigma_eps)
    if regime is Regime.BOUNDED_SHIFT:
        fixed = abs(asymptotic_shift(combo, sigma0, sigma_eps, 0.0, 1e9))
        tau = fixed / omega
    elif regime is Regime.BOUNDED_CONFIDENCE:
        tau = _bounded_confidence_tau(pf, sf, sigma0, sigma_eps, omega)

    interval = None
    if bias != 0.0:
        interval = backfire_region(combo, bias, 0.0, sigma0, sigma_eps)
    return RegimeReport(regime=regime, omega=omega, tau=tau, x_star=x_star,
                        backfire_interval=interval)


def backfire_region(combo, bias: float, theta0: float, sigma0: float,
                    sigma_eps: float):
    """Interval of signals whose shift opposes the signal's own direction.

    Exact ``(theta0, theta0 + bias)`` for the Gaussian/Gaussian pair; for
    the other pairs the shift's sign change is bracketed and bisected on
    the biased posterior.  Returns ``None`` when no sign change exists.
    """
    combo = Combo(combo)
    if bias == 0.0:
        raise ValidationError("backfire region requires a nonzero bias")
    lo_pt, hi_pt = sorted((theta0, theta0 + bias))
    if combo is Combo.GAUSSIAN_GAUSSIAN:
        return (lo_pt, hi_pt)

    pf_name, sf_name = combo.value.replace("-equal", "").replace("-unequal", "").split("-")
    prior = BeliefState(Distribution(Family.parse(pf_name), theta0, sigma0))
    signal = SignalModel(noise=Distribution(Family.parse(sf_name), 0.0, sigma_eps), bias=bias)

    def shift_at(x):
        return biased_posterior(prior, signal, x).shift

    sgn = math.copysign(1.0, bias)
    # walk outward from theta0 until the shift agrees with the signal again
    probe = abs(bias) + 6.0 * max(sigma0, sigma_eps)
    hi = theta0 + sgn * probe
    it = 0
    while sgn * shift_at(hi) <= 0.0 and it < 60:
        probe *= 2.0
        hi = theta0 + sgn * probe
        it += 1
    if it >= 60:
        return None
    if sgn * shift_at(theta0 + sgn * 1e-9 * sigma0) > 0.0:
        return None  # no opposed-sign region at all
    zero = _bisect(lambda x: sgn * shift_at(x), theta0, hi, 1e-10 * sigma0)
    lo_pt, hi_pt = sorted((theta0, zero))
    return (lo_pt, hi_pt)


def mixture_intermediate_regime(delta: float, sigma0: float, sigma_eps: float,
                                sigma_i: float):
    """Signal interval where a fixed-bias Gaussian component suppresses the shift.

    Exists only when the component is narrower than the prior-plus-noise
    convolution (``s = sigma_i^2/(sigma0^2+sigma_eps^2) < 1``); endpoints are
    ``delta (1 -+ sqrt(s))/(1 - s)``, oriented by the sign of ``delta``.
    """
    if sigma0 <= 0.0 or sigma_eps <= 0.0 or sigma_i <= 0.0:
        raise ValidationError("scales must be positive")
    if delta == 0.0:
        return None
    s = sigma_i * sigma_i / (sigma0 * sigma0 + sigma_eps * sigma_eps)
    if s >= 1.0:
        return None
    r = math.sqrt(s)
    e1 = delta * (1.0 - r) / (1.0 - s)
    e2 = delta * (1.0 + r) / (1.0 - s)
    return (e1, e2) if e1 <= e2 else (e2, e1)


# ---------------------------------------------------------------------------
# Scalar Kalman filter (drifting truth keeps the gain from collapsing).
# ---------------------------------------------------------------------------


def kalman_step(state: KalmanState, x: float, sigma0: float, sigma_eps: float) -> KalmanState:
    """One predict/update cycle; the gain uses the pre-update variance."""
    if sigma0 <= 0.0 or sigma_eps <= 0.0:
        raise ValidationError("scales must be positive")
    predicted = state.v + sigma0 * sigma0
    gain = predicted / (predicted + sigma_eps * sigma_eps)
    theta = state.theta + gain * (float(x) - state.theta)
    v = (1.0 - gain) * predicted
    return KalmanState(theta=theta, v=v, gain=gain)


def kalman_steady_gain(sigma0: float, sigma_eps: float) -> float:
    """Fixed point of the gain recursion."""
    if sigma0 <= 0.0 or sigma_eps <= 0.0:
        raise ValidationError("scales must be positive")
    r2 = (sigma_eps / sigma0) ** 2
    root = math.sqrt(1.0 + 4.0 * r2)
    return (1.0 + root) / (1.0 + root + 2.0 * r2)


def kalman_steady_variance(sigma0: float, sigma_eps: float) -> float:
    """Fixed point of the estimate-variance recursion."""
    if sigma0 <= 0.0 or sigma_eps <= 0.0:
        raise ValidationError("scales must be positive")
    r2 = (sigma_eps / sigma0) ** 2
    return 0.5 * sigma0 * sigma0 * (math.sqrt(1.0 + 4.0 * r2) - 1.0)
