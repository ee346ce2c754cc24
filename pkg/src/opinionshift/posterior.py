"""Closed-form posterior means for every prior/signal combination.

Each supported pair gets an exact shift function evaluated in scaled
special-function arithmetic (no raw ``erfc``/``Ei`` with explicit
exponential prefactors, which overflow for signals tens of prior scales
out).  Negative deviations are served by odd reflection of the positive
branch; a constant signal bias ``b`` is folded in via ``x <- x - b``.

Heavy-tailed overreaction pairs (Laplace/Gaussian, Cauchy/Gaussian,
Cauchy/Laplace) are evaluated by exchanging the roles of prior and signal
in the matching base formula.  Unsupported pairs (e.g. bounded-uniform
priors) route to the quadrature oracle rather than silently approximating.
"""

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from ._backend import njit
from .distributions import (
    Distribution,
    Family,
    MixtureComponent,
    SignalModel,
    logpdf,
)
from .errors import (
    DegenerateMixtureError,
    DispatchError,
    DomainError,
    RedirectError,
    UnsupportedComboError,
    ValidationError,
)
from .specfun import _e1x, _eix, _erfcx, _erfcx_real

_SQRT2 = math.sqrt(2.0)
_SCALE_EQ_TOL = 1e-12


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


class Combo(str, Enum):
    GAUSSIAN_GAUSSIAN = "gaussian-gaussian"
    GAUSSIAN_LAPLACE = "gaussian-laplace"
    GAUSSIAN_CAUCHY = "gaussian-cauchy"
    LAPLACE_GAUSSIAN = "laplace-gaussian"
    LAPLACE_LAPLACE_EQUAL = "laplace-laplace-equal"
    LAPLACE_LAPLACE_UNEQUAL = "laplace-laplace-unequal"
    LAPLACE_CAUCHY = "laplace-cauchy"
    CAUCHY_GAUSSIAN = "cauchy-gaussian"
    CAUCHY_LAPLACE = "cauchy-laplace"
    CAUCHY_CAUCHY = "cauchy-cauchy"
    MIXTURE = "mixture"
    BIASED = "biased"


#: Table-2 pairs that reduce to a constant-coefficient linear update.
STABLE_COMBOS = (
    Combo.GAUSSIAN_GAUSSIAN,
    Combo.LAPLACE_LAPLACE_EQUAL,
    Combo.CAUCHY_CAUCHY,
)

#: Overreaction pairs served by role-swapping, mapped to their base combo.
SWAP_BASES = {
    Combo.LAPLACE_GAUSSIAN: Combo.GAUSSIAN_LAPLACE,
    Combo.CAUCHY_GAUSSIAN: Combo.GAUSSIAN_CAUCHY,
    Combo.CAUCHY_LAPLACE: Combo.LAPLACE_CAUCHY,
}


@dataclass(frozen=True)
class BeliefState:
    """Receiver's prior belief; location is the current opinion."""

    prior: Distribution

    @property
    def theta0(self) -> float:
        return self.prior.location

    @property
    def sigma0(self) -> float:
        return self.prior.scale


@dataclass(frozen=True)
class PosteriorResult:
    theta1: float
    shift: float
    method: Method
    combo: Combo
    warnings: tuple = ()
    error_estimate: float | None = None

    @classmethod
    def from_shift(cls, theta0, shift, method, combo, warnings=(), error_estimate=None):
        # theta1 is derived so that shift == theta1 - theta0 exactly
        shift = float(shift)
        return cls(float(theta0) + shift, shift, method, combo, tuple(warnings), error_estimate)


def scales_equal(s0: float, s1: float) -> bool:
    return abs(s0 - s1) <= _SCALE_EQ_TOL * max(1.0, s0, s1)


def resolve_combo(prior, signal) -> Combo:
    """Map (prior, signal) onto the combination enum; mixtures win."""
    prior_dist = prior.prior if isinstance(prior, BeliefState) else prior
    noise = signal.noise if isinstance(signal, SignalModel) else signal
    if isinstance(signal, SignalModel) and signal.has_mixture:
        return Combo.MIXTURE
    pf, sf = prior_dist.family, noise.family
    if pf is Family.BOUNDED_UNIFORM:
        raise UnsupportedComboError(
            "bounded-uniform priors have no closed form; use the quadrature oracle"
        )
    if pf is Family.LAPLACE and sf is Family.LAPLACE:
        if scales_equal(prior_dist.scale, noise.scale):
            return Combo.LAPLACE_LAPLACE_EQUAL
        return Combo.LAPLACE_LAPLACE_UNEQUAL
    table = {
        (Family.GAUSSIAN, Family.GAUSSIAN): Combo.GAUSSIAN_GAUSSIAN,
        (Family.GAUSSIAN, Family.LAPLACE): Combo.GAUSSIAN_LAPLACE,
        (Family.GAUSSIAN, Family.CAUCHY): Combo.GAUSSIAN_CAUCHY,
        (Family.LAPLACE, Family.GAUSSIAN): Combo.LAPLACE_GAUSSIAN,
        (Family.LAPLACE, Family.CAUCHY): Combo.LAPLACE_CAUCHY,
        (Family.CAUCHY, Family.GAUSSIAN): Combo.CAUCHY_GAUSSIAN,
        (Family.CAUCHY, Family.LAPLACE): Combo.CAUCHY_LAPLACE,
        (Family.CAUCHY, Family.CAUCHY): Combo.CAUCHY_CAUCHY,
    }
    try:
        return table[(pf, sf)]
    except KeyError:
        raise UnsupportedComboError(f"unsupported pair ({pf.value}, {sf.value})") from None


# ---------------------------------------------------------------------------
# Scalar shift kernels (prior-scale units unless noted).  All take the
# deviation for x >= theta0 and reflect oddly for the negative branch.
# ---------------------------------------------------------------------------


@njit
def _gc_shift(x0, a):
    # Gaussian prior, Cauchy signal; x0=(x-theta0)/sigma0, a=sigma_eps/sigma0;
    # returns shift/sigma0.  Single-expression numerator avoids the large-x
    # cancellation of forming theta1 = x + ... directly.
    if x0 == 0.0:
        return 0.0  # odd symmetry, exact
    s = 1.0 if x0 >= 0.0 else -1.0
    v = abs(x0)
    e = _erfcx(complex(a, v) / _SQRT2)
    return s * (a * e.imag + v * e.real) / e.real


@njit
def _lc_g(x0, a):
    # Laplace prior, Cauchy signal: the scaled combination
    # i*pi*e^{-z} - e^{z}E1(z) - e^{-z}Ei(z) at z = x0 + i a (x0 >= 0); the
    # exponentially growing pieces of the raw formula cancel analytically.
    z = complex(x0, a)
    return 1j * math.pi * cmath.exp(-z) - _e1x(z) - _eix(z)


@njit
def _lc_shift(x0, a):
    if x0 == 0.0:
        return 0.0  # odd symmetry, exact
    s = 1.0 if x0 >= 0.0 else -1.0
    v = abs(x0)
    g = _lc_g(v, a)
    return s * (complex(v, a) * g).imag / g.imag


@njit
def _lc_marginal(x0, a):
    # int e^{-|u|} / ((u-x0)^2 + a^2) du, closed form (branch gate quantity)
    g = _lc_g(abs(x0), a)
    return g.imag / a


@njit
def _gl_ratio(x0n, a):
    # Gaussian prior, Laplace signal; x0n=(x-theta0)/(sqrt2 sigma0),
    # a=sqrt2 sigma0/sigma_eps; returns R in (-1, 1) with
    # shift = (sigma0^2/sigma_eps) * R.  The two scaled halves share the
    # factor exp(-(x0n - a/2)^2), so the reflected form stays finite for
    # x0n up to overflow-free 1e4 and beyond.
    if x0n == 0.0:
        return 0.0  # odd symmetry, exact
    s = 1.0 if x0n >= 0.0 else -1.0
    v = abs(x0n)
    half = 0.5 * a
    if v <= half:
        p = _erfcx_real(half - v)
        q = _erfcx_real(half + v)
        return s * (p - q) / (p + q)
    t = math.exp(-(v - half) * (v - half))
    p = _erfcx_real(v - half)
    q = _erfcx_real(v + half)
    return s * (2.0 - t * (p + q)) / (2.0 - t * (p - q))


@njit
def _ll_unequal_shift(x0, a0, ae):
    # Laplace prior and signal, unequal inverse scales a0=1/sigma0,
    # ae=1/sigma_eps; x0 = x - theta0 (raw units).  Scaled so neither
    # branch exponentiates a positive quantity.
    if x0 == 0.0:
        return 0.0  # odd symmetry, exact
    xs = 2.0 * a0 / (ae * ae - a0 * a0)
    s = 1.0 if x0 >= 0.0 else -1.0
    v = abs(x0)
    d = (ae - a0) * v
    if d >= 0.0:
        ed = math.exp(-d)
        return s * ae * ((v - xs) + xs * ed) / (ae - a0 * ed)
    ed = math.exp(d)
    return s * ae * ((v - xs) * ed + xs) / (ae * ed - a0)


@njit
def _gc_shift_grid(x0s, a):
    out = np.empty(x0s.size)
    for i in range(x0s.size):
        out[i] = _gc_shift(x0s[i], a)
    return out


@njit
def _lc_shift_grid(x0s, a):
    out = np.empty(x0s.size)
    for i in range(x0s.size):
        out[i] = _lc_shift(x0s[i], a)
    return out


@njit
def _gl_ratio_grid(x0ns, a):
    out = np.empty(x0ns.size)
    for i in range(x0ns.size):
        out[i] = _gl_ratio(x0ns[i], a)
    return out


@njit
def _ll_unequal_shift_grid(x0s, a0, ae):
    out = np.empty(x0s.size)
    for i in range(x0s.size):
        out[i] = _ll_unequal_shift(x0s[i], a0, ae)
    return out


# ---------------------------------------------------------------------------
# Public operations.
# ---------------------------------------------------------------------------


def _as_belief(prior) -> BeliefState:
    if isinstance(prior, BeliefState):
        return prior
    if isinstance(prior, Distribution):
        return BeliefState(prior)
    raise ValidationError(f"expected BeliefState or Distribution, got {type(prior)!r}")


def _as_signal(signal) -> SignalModel:
    if isinstance(signal, SignalModel):
        return signal
    if isinstance(signal, Distribution):
        return SignalModel(noise=signal)
    raise ValidationError(f"expected SignalModel or Distribution, got {type(signal)!r}")


def _check_x(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite signal value {x!r}")
    return x


def stable_degroot_omega(combo: Combo, sigma0: float, sigma_eps: float) -> float:
    if combo is Combo.GAUSSIAN_GAUSSIAN:
        return sigma0 * sigma0 / (sigma0 * sigma0 + sigma_eps * sigma_eps)
    if combo is Combo.LAPLACE_LAPLACE_EQUAL:
        return 0.5
    if combo is Combo.CAUCHY_CAUCHY:
        return sigma0 / (sigma0 + sigma_eps)
    raise DispatchError(f"{combo.value} is not a constant-coefficient combo")


def stable_posterior(prior, signal, x: float) -> PosteriorResult:
    """Linear update for the matched-family pairs.

    Covers Gaussian/Gaussian, equal-scale Laplace/Laplace, and
    Cauchy/Cauchy: ``theta1 = theta0 + omega (x - b - theta0)``.
    """
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    combo = resolve_combo(prior, signal)
    if combo is Combo.LAPLACE_LAPLACE_UNEQUAL:
        raise RedirectError(
            "Laplace prior and signal with unequal scales is not a linear update",
            target="ll_unequal_posterior",
        )
    if combo not in STABLE_COMBOS:
        raise DispatchError(f"stable_posterior does not handle {combo.value}")
    omega = stable_degroot_omega(combo, prior.sigma0, signal.noise.scale)
    shift = omega * (x - signal.bias - prior.theta0)
    return PosteriorResult.from_shift(prior.theta0, shift, Method.CLOSED_FORM, combo)


_TINY_DENOMINATOR = 1e-300


def gc_posterior(prior, signal, x: float) -> PosteriorResult:
    """Gaussian prior, Cauchy signal (vanishing-for-extreme-signals shift)."""
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    combo = resolve_combo(prior, signal)
    if combo is not Combo.GAUSSIAN_CAUCHY:
        raise DispatchError(f"gc_posterior does not handle {combo.value}")
    s0 = prior.sigma0
    a = signal.noise.scale / s0
    x0 = (x - signal.bias - prior.theta0) / s0
    e = _erfcx(complex(a, abs(x0)) / _SQRT2)
    if abs(e.real) < _TINY_DENOMINATOR:
        return _quadrature_fallback(prior, signal, x, "erfcx real part vanished")
    shift = s0 * _gc_shift(x0, a)
    return PosteriorResult.from_shift(prior.theta0, shift, Method.CLOSED_FORM, combo)


def lc_posterior(prior, signal, x: float) -> PosteriorResult:
    """Laplace prior, Cauchy signal (vanishing-for-extreme-signals shift)."""
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    combo = resolve_combo(prior, signal)
    if combo is not Combo.LAPLACE_CAUCHY:
        raise DispatchError(f"lc_posterior does not handle {combo.value}")
    s0 = prior.sigma0
    a = signal.noise.scale / s0
    x0 = (x - signal.bias - prior.theta0) / s0
    g = _lc_g(abs(x0), a)
    if abs(g.imag) < _TINY_DENOMINATOR:
        return _quadrature_fallback(prior, signal, x, "scaled-Ei denominator vanished")
    shift = s0 * _lc_shift(x0, a)
    return PosteriorResult.from_shift(prior.theta0, shift, Method.CLOSED_FORM, combo)


def ll_unequal_posterior(prior, signal, x: float) -> PosteriorResult:
    """Laplace prior and signal with distinct scales (offset-dominated)."""
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    combo = resolve_combo(prior, signal)
    if combo is Combo.LAPLACE_LAPLACE_EQUAL:
        raise RedirectError(
            "equal scales reduce to the linear update",
            target="stable_posterior",
        )
    if combo is not Combo.LAPLACE_LAPLACE_UNEQUAL:
        raise DispatchError(f"ll_unequal_posterior does not handle {combo.value}")
    x0 = x - signal.bias - prior.theta0
    shift = _ll_unequal_shift(x0, 1.0 / prior.sigma0, 1.0 / signal.noise.scale)
    return PosteriorResult.from_shift(prior.theta0, shift, Method.CLOSED_FORM, combo)


def gl_posterior(prior, signal, x: float) -> PosteriorResult:
    """Gaussian prior, Laplace signal (saturating shift)."""
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    combo = resolve_combo(prior, signal)
    if combo is not Combo.GAUSSIAN_LAPLACE:
        raise DispatchError(f"gl_posterior does not handle {combo.value}")
    s0, se = prior.sigma0, signal.noise.scale
    a = _SQRT2 * s0 / se
    x0n = (x - signal.bias - prior.theta0) / (_SQRT2 * s0)
    shift = (s0 * s0 / se) * _gl_ratio(x0n, a)
    return PosteriorResult.from_shift(prior.theta0, shift, Method.CLOSED_FORM, combo)


_BASE_OPS = {}  # filled after definitions


def swap_posterior(base: Combo, prior, signal, x: float) -> PosteriorResult:
    """Overreaction update: the base formula with prior and signal exchanged.

    ``theta1 = theta1_base(prior at x with the signal's scale, observing
    theta0 with the prior's scale)``; valid whenever the exchanged
    arguments form a legal instance of the base combination.
    """
    base = Combo(base)
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    if signal.has_mixture:
        raise DispatchError("swap_posterior does not handle mixtures")
    try:
        base_op = _BASE_OPS[base]
    except KeyError:
        raise DispatchError(f"{base.value} is not a swap base") from None

    combo = resolve_combo(prior, signal)
    expected = SWAP_BASES.get(combo)
    if base is Combo.LAPLACE_LAPLACE_UNEQUAL:
        if combo is not Combo.LAPLACE_LAPLACE_UNEQUAL:
            raise DispatchError(
                f"swap of {base.value} requires an unequal-scale Laplace pair"
            )
    elif expected is not base:
        raise DispatchError(
            f"swap of {base.value} does not produce {combo.value}"
        )

    y = x - signal.bias
    swapped_prior = BeliefState(
        Distribution(signal.noise.family, location=y, scale=signal.noise.scale)
    )
    swapped_signal = SignalModel(
        noise=Distribution(prior.prior.family, location=0.0, scale=prior.sigma0)
    )
    base_res = base_op(swapped_prior, swapped_signal, prior.theta0)
    shift = base_res.theta1 - prior.theta0
    return PosteriorResult.from_shift(
        prior.theta0, shift, Method.CLOSED_FORM, combo, base_res.warnings
    )


def _quadrature_fallback(prior, signal, x, reason):
    from .oracle import quad_posterior_mean

    res = quad_posterior_mean(prior, signal, x)
    return replace(res, warnings=res.warnings + (f"closed form abandoned: {reason}",))


def posterior_mean(prior, signal, x: float) -> PosteriorResult:
    """Dispatch to the right closed form, or to quadrature when none exists."""
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    if signal.has_mixture:
        return mixture_posterior(prior, signal, x)
    if prior.prior.family is Family.BOUNDED_UNIFORM:
        return _quadrature_fallback(prior, signal, x, "no closed form for this pair")
    combo = resolve_combo(prior, signal)
    if combo in STABLE_COMBOS:
        return stable_posterior(prior, signal, x)
    if combo is Combo.GAUSSIAN_CAUCHY:
        return gc_posterior(prior, signal, x)
    if combo is Combo.LAPLACE_CAUCHY:
        return lc_posterior(prior, signal, x)
    if combo is Combo.GAUSSIAN_LAPLACE:
        return gl_posterior(prior, signal, x)
    if combo is Combo.LAPLACE_LAPLACE_UNEQUAL:
        return ll_unequal_posterior(prior, signal, x)
    return swap_posterior(SWAP_BASES[combo], prior, signal, x)


def biased_posterior(prior, signal, x: float) -> PosteriorResult:
    """Posterior under a perceived constant signal bias.

    Evaluates the unbiased posterior-mean map at ``x - bias`` (a pure
    horizontal translation of the shift function).
    """
    prior, signal, x = _as_belief(prior), _as_signal(signal), _check_x(x)
    unbiased = replace(signal, bias=0.0)
    inner = posterior_mean(prior, unbiased, x - signal.bias)
    return PosteriorResult.from_shift(
        prior.theta0, inner.shift, inner.method, Combo.BIASED,
        inner.warnings, inner.error_estimate,
    )


# ---------------------------------------------------------------------------
# Mixture signals.
# ---------------------------------------------------------------------------


def _log_marginal_j0(prior: BeliefState, noise: Distribution, y: float) -> tuple:
    """(log J0(y), closed_form?) for the state-centered component."""
    if prior.prior.family is Family.GAUSSIAN and noise.family is Family.GAUSSIAN:
        var = prior.sigma0 ** 2 + noise.scale ** 2
        marginal = Distribution(Family.GAUSSIAN, prior.theta0, math.sqrt(var))
        return logpdf(marginal, y), True
    from .oracle import quad_log_marginal

    return quad_log_marginal(prior.prior, noise, y), False


def mixture_confidence(prior, signal: SignalModel, x: float) -> float:
    """Convex weight ``alpha(x)`` on the state-centered posterior mean.

    ``alpha`` is the posterior probability that the signal came from the
    state-centered component rather than any fixed-bias component.
    """
    prior, x = _as_belief(prior), _check_x(x)
    if not signal.has_mixture:
        return 1.0
    if signal.eps_weight <= 0.0:
        raise DegenerateMixtureError(
            "mixture confidence is undefined with zero weight on the state component"
        )
    y = x - signal.bias
    log_j0, _ = _log_marginal_j0(prior, signal.noise, y)
    log_eps = math.log(signal.eps_weight)
    terms = [
        math.log(c.weight) + c.log_density(x) - log_eps - log_j0
        for c in signal.mixture
        if c.weight > 0.0
    ]
    if not terms:
        return 1.0
    m = max(terms)
    if m > 700.0:
        # sum dominates 1 by an astronomic factor; alpha underflows cleanly
        return math.exp(-m) / sum(math.exp(t - m) for t in terms)
    return 1.0 / (1.0 + sum(math.exp(t) for t in terms))


def mixture_posterior(prior, signal: SignalModel, x: float) -> PosteriorResult:
    """Posterior mean under a mixture signal.

    Convex combination ``theta1 = alpha(x) theta1_nm + (1 - alpha(x)) theta0``
    of the non-mixture posterior mean and the prior mean.
    """
    prior, x = _as_belief(prior), _check_x(x)
    if not isinstance(signal, SignalModel) or not signal.has_mixture:
        raise DispatchError("mixture_posterior requires a SignalModel with components")
    if signal.eps_weight <= 0.0:
        raise DegenerateMixtureError(
            "posterior mean is undefined with zero weight on the state component"
        )
    alpha = mixture_confidence(prior, signal, x)
    core = replace(signal, mixture=(), eps_weight=1.0)
    nm = posterior_mean(prior, core, x)
    shift = alpha * nm.shift
    method = nm.method
    _, j0_closed = _log_marginal_j0(prior, signal.noise, x - signal.bias)
    if not j0_closed:
        method = Method.QUADRATURE
    return PosteriorResult.from_shift(
        prior.theta0, shift, method, Combo.MIXTURE, nm.warnings
    )


@dataclass(frozen=True)
class UncertainComponent:
    """Bias component with a Gaussian-uncertain center.

    ``delta`` and ``tau`` are the center's mean and spread, ``sigma`` the
    component's own noise scale.  Marginalizing the center yields a
    Gaussian component at ``delta`` with variance ``tau^2 + sigma^2``.
    """

    delta: float
    tau: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.tau) and math.isfinite(self.sigma)):
            raise ValidationError("uncertain component parameters must be finite")
        if self.tau < 0.0:
            raise ValidationError(f"tau must be >= 0, got {self.tau!r}")
        if self.sigma <= 0.0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma!r}")


def dirichlet_mixture_posterior(prior, components, alpha_eps: float, alphas,
                                sigma_eps: float, x: float) -> PosteriorResult:
    """Mixture posterior with uncertain bias centers and Dirichlet weights.

    Each component's center uncertainty widens it to variance
    ``tau_i^2 + sigma_i^2``; the Dirichlet weight vector enters through its
    mean.  The result delegates to :func:`mixture_posterior`, which keeps
    the same convex form.
    """
    prior = _as_belief(prior)
    if prior.prior.family is not Family.GAUSSIAN:
        raise DispatchError("dirichlet_mixture_posterior requires a Gaussian prior")
    components = tuple(components)
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != len(components):
        raise ValidationError("need one Dirichlet parameter per component")
    if alpha_eps <= 0.0 or any(a <= 0.0 for a in alphas):
        raise ValidationError("Dirichlet parameters must be positive")
    total = alpha_eps + sum(alphas)
    mixture = tuple(
        MixtureComponent(
            weight=a / total,
            bias_point=c.delta,
            scale=math.sqrt(c.tau * c.tau + c.sigma * c.sigma),
            family=Family.GAUSSIAN,
        )
        for a, c in zip(alphas, components)
    )
    signal = SignalModel(
        noise=Distribution(Family.GAUSSIAN, 0.0, float(sigma_eps)),
        mixture=mixture,
        eps_weight=alpha_eps / total,
    )
    return mixture_posterior(prior, signal, x)


_BASE_OPS.update(
    {
        Combo.GAUSSIAN_LAPLACE: gl_posterior,
        Combo.GAUSSIAN_CAUCHY: gc_posterior,
        Combo.LAPLACE_CAUCHY: lc_posterior,
        Combo.LAPLACE_LAPLACE_UNEQUAL: ll_unequal_posterior,
    }
)
