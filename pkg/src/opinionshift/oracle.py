"""Independent ground truth for everything the closed forms claim.

``quad_posterior_mean`` evaluates the defining ratio of integrals

    theta1 = int theta f(theta) l(x - b - theta) dtheta / int f(theta) l(...) dtheta

by adaptive Gauss-Kronrod panels with explicit pre-splitting at kinks and
peaks and a rational map for the infinite tails (mandatory for Cauchy-Cauchy
products, whose integrand decays only algebraically).  The integrand is
rescaled by its maximum log so that widely separated peaks (e.g. a signal
fifty prior scales away) do not underflow.

``reference_specfun`` provides slow high-precision special-function values
(mpmath) used to validate the production kernels in ``specfun``.  Closed
forms are tuned to agree with this module, never the other way around.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import quad as _scipy_quad

from .distributions import Distribution, Family, SignalModel, logpdf
from .errors import ConvergenceError, DomainError, PoleError, ValidationError


class TailTransform(str, Enum):
    NONE = "none"
    RATIONAL_MAP = "rational_map"


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_transform: TailTransform = TailTransform.RATIONAL_MAP

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise ValidationError("quadrature tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValidationError("max_subdivisions must be at least 10")


DEFAULT_CONFIG = QuadratureConfig()


def _panel(f, lo, hi, cfg):
    val, err, info, *msg = _scipy_quad(
        f, lo, hi,
        epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions, full_output=True,
    )
    converged = not msg
    return val, err, converged


def _right_tail(f, start, cfg):
    # u = start + t/(1-t) maps [0, 1) onto [start, inf)
    def g(t):
        if t >= 1.0:
            return 0.0
        om = 1.0 - t
        return f(start + t / om) / (om * om)

    return _panel(g, 0.0, 1.0, cfg)


def _left_tail(f, end, cfg):
    def g(t):
        if t >= 1.0:
            return 0.0
        om = 1.0 - t
        return f(end - t / om) / (om * om)

    return _panel(g, 0.0, 1.0, cfg)


def integrate(f, breakpoints, cfg=DEFAULT_CONFIG, support=(-math.inf, math.inf)):
    """Integrate ``f`` over ``support`` with pre-splitting at ``breakpoints``.

    Returns ``(value, error_estimate, converged)``.  Infinite tails are
    handled per ``cfg.tail_transform``.
    """
    lo, hi = support
    pts = sorted({float(b) for b in breakpoints if lo < b < hi})
    total = 0.0
    err = 0.0
    ok = True

    left = lo
    for right in pts + [hi]:
        if not (math.isinf(left) or math.isinf(right)):
            v, e, conv = _panel(f, left, right, cfg)
            total += v
            err += e
            ok = ok and conv
        left = right

    if math.isinf(lo):
        anchor = pts[0] if pts else (hi if not math.isinf(hi) else 0.0)
        if cfg.tail_transform is TailTransform.RATIONAL_MAP:
            v, e, conv = _left_tail(f, anchor, cfg)
        else:
            v, e, conv = _panel(f, -np.inf, anchor, cfg)
        total += v
        err += e
        ok = ok and conv
    if math.isinf(hi):
        anchor = pts[-1] if pts else (lo if not math.isinf(lo) else 0.0)
        if cfg.tail_transform is TailTransform.RATIONAL_MAP:
            v, e, conv = _right_tail(f, anchor, cfg)
        else:
            v, e, conv = _panel(f, anchor, np.inf, cfg)
        total += v
        err += e
        ok = ok and conv
    return total, err, ok


def _prior_support(prior: Distribution):
    if prior.family is Family.BOUNDED_UNIFORM:
        return prior.location - prior.scale, prior.location + prior.scale
    return -math.inf, math.inf


def _log_weight_fn(prior: Distribution, signal: SignalModel, x: float):
    """log of the unnormalized posterior density, plus its breakpoints."""
    y = x - signal.bias
    breakpoints = [prior.location, y]
    if signal.has_mixture:
        log_eps = math.log(signal.eps_weight) if signal.eps_weight > 0.0 else -math.inf
        terms = [
            math.log(c.weight) + c.log_density(x)
            for c in signal.mixture
            if c.weight > 0.0
        ]
        log_const = max(terms) + math.log(
            sum(math.exp(t - max(terms)) for t in terms)
        ) if terms else -math.inf

        def logw(theta):
            a = log_eps + logpdf(signal.noise, y - theta)
            m = a if a > log_const else log_const
            if m == -math.inf:
                return -math.inf
            return logpdf(prior, theta) + m + math.log(
                math.exp(a - m) + math.exp(log_const - m)
            )

    else:

        def logw(theta):
            return logpdf(prior, theta) + logpdf(signal.noise, y - theta)

    return logw, breakpoints


def _log_scale(logw, breakpoints, support, width):
    """Rescaling constant and peak location of the integrand.

    Probes a grid spanning the breakpoints (densely in between, where the
    product of two separated peaks attains its maximum) and returns
    ``(max log, argmax)``; the argmax becomes an extra panel split so the
    adaptive rule cannot overlook a narrow interior peak.
    """
    lo, hi = support
    pad = 8.0 * width
    a = max(lo, min(breakpoints) - pad)
    b = min(hi, max(breakpoints) + pad)
    probes = np.concatenate(
        [
            np.linspace(a, b, 257),
            np.linspace(min(breakpoints), max(breakpoints), 257),
            np.asarray(breakpoints, dtype=float),
        ]
    )
    best = -math.inf
    best_t = float(breakpoints[0])
    for t in probes:
        if lo <= t <= hi:
            v = logw(float(t))
            if v > best:
                best = v
                best_t = float(t)
    if not math.isfinite(best):
        raise ConvergenceError("posterior integrand underflows everywhere")
    return best, best_t


def quad_posterior_mean(prior, signal: SignalModel, x: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Posterior mean by adaptive quadrature of the defining integrals.

    ``prior`` may be a ``Distribution`` or a ``posterior.BeliefState``.
    Returns a ``posterior.PosteriorResult`` with ``method=QUADRATURE``.
    """
    from .posterior import BeliefState, Combo, Method, PosteriorResult, resolve_combo

    if isinstance(prior, BeliefState):
        prior_dist = prior.prior
    else:
        prior_dist = prior
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite signal {x!r}")

    logw, bps = _log_weight_fn(prior_dist, signal, x)
    support = _prior_support(prior_dist)
    width = max(prior_dist.scale, signal.noise.scale)
    m, peak = _log_scale(logw, bps, support, width)
    bps = bps + [peak]

    def den_fn(theta):
        v = logw(theta) - m
        return math.exp(v) if v > -745.0 else 0.0

    def num_fn(theta):
        v = logw(theta) - m
        return theta * math.exp(v) if v > -745.0 else 0.0

    den, den_err, den_ok = integrate(den_fn, bps, cfg, support)
    num, num_err, num_ok = integrate(num_fn, bps, cfg, support)

    if not (math.isfinite(den) and math.isfinite(num)) or den <= 0.0:
        raise ConvergenceError("posterior-mean quadrature produced a degenerate denominator")

    theta1 = num / den
    ratio_err = (num_err + abs(theta1) * den_err) / den
    gate = 1e3 * max(cfg.abs_tol, cfg.rel_tol * (1.0 + abs(theta1)))
    warnings = []
    if not (den_ok and num_ok):
        if ratio_err > gate:
            raise ConvergenceError(
                f"quadrature did not converge (estimated error {ratio_err:.3e})",
                achieved=ratio_err,
            )
        warnings.append("quadrature reported limited accuracy; estimate within gate")
    elif ratio_err > gate:
        raise ConvergenceError(
            f"quadrature error estimate {ratio_err:.3e} exceeds gate {gate:.3e}",
            achieved=ratio_err,
        )

    shift = theta1 - prior_dist.location
    try:
        combo = resolve_combo(prior_dist, signal)
    except ValidationError:
        combo = Combo.MIXTURE if signal.has_mixture else Combo.BIASED
    return PosteriorResult.from_shift(
        prior_dist.location,
        shift,
        Method.QUADRATURE,
        combo,
        warnings=tuple(warnings),
        error_estimate=ratio_err,
    )


def quad_log_marginal(prior: Distribution, noise: Distribution, x: float,
                      bias: float = 0.0, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """log of the non-mixture marginal ``int f(theta) l(x - b - theta) dtheta``."""
    signal = SignalModel(noise=noise, bias=bias)
    logw, bps = _log_weight_fn(prior, signal, float(x))
    support = _prior_support(prior)
    width = max(prior.scale, noise.scale)
    m, peak = _log_scale(logw, bps, support, width)
    bps = bps + [peak]

    def fn(theta):
        v = logw(theta) - m
        return math.exp(v) if v > -745.0 else 0.0

    val, err, ok = integrate(fn, bps, cfg, support)
    if not ok and err > 1e3 * cfg.rel_tol * max(val, cfg.abs_tol):
        raise ConvergenceError("marginal-likelihood quadrature did not converge", achieved=err)
    if val <= 0.0:
        raise ConvergenceError("marginal likelihood underflowed to zero")
    return m + math.log(val)


def fd_slope(f, x0: float, h: float) -> float:
    """Central finite difference ``(f(x0+h) - f(x0-h)) / (2h)``."""
    if not (h > 0.0 and math.isfinite(h)):
        raise ValidationError(f"step must be positive and finite, got {h!r}")
    hi = f(x0 + h)
    lo = f(x0 - h)
    if not (math.isfinite(hi) and math.isfinite(lo)):
        raise DomainError("function evaluations in fd_slope are not finite")
    return (hi - lo) / (2.0 * h)


_REFERENCE_DPS = 30


def reference_specfun(kind: str, z):
    """High-precision reference values (slow; for validation only).

    ``kind`` is one of ``erfcx``, ``eix``, ``si``, ``ci``.  Complex kinds
    return ``complex``, real kinds ``float``; accuracy is far beyond 1e-14.
    """
    import mpmath as mp

    kind = str(kind).lower()
    with mp.workdps(_REFERENCE_DPS):
        if kind == "erfcx":
            w = mp.mpc(complex(z))
            return complex(mp.exp(w * w) * mp.erfc(w))
        if kind == "eix":
            zc = complex(z)
            if zc == 0:
                raise PoleError("eix reference has a pole at 0")
            if zc.imag == 0.0:
                w = mp.mpf(zc.real)
                return complex(mp.exp(-w) * mp.ei(w))
            w = mp.mpc(zc)
            return complex(mp.exp(-w) * mp.ei(w))
        if kind == "si":
            return float(mp.si(mp.mpf(float(z))))
        if kind == "ci":
            a = float(z)
            if a <= 0.0:
                raise PoleError("ci reference requires a > 0")
            return float(mp.ci(mp.mpf(a)))
    raise ValidationError(f"unknown reference kind {kind!r}")
