"""Bayesian posterior-mean opinion dynamics.

Closed-form opinion-shift functions for symmetric location-scale
prior/signal pairs, their small-signal coefficients and large-signal laws,
mixture and biased-signal constructions, a scalar Kalman tracking model,
and an independent quadrature oracle that verifies every closed form.
"""

from ._backend import NUMBA_ENABLED, backend_name
from .analysis import (
    KalmanState,
    Regime,
    RegimeReport,
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
    mixture_intermediate_regime,
    uniform_prior_asymptotic_shift,
)
from .distributions import (
    Distribution,
    Family,
    MixtureComponent,
    SignalModel,
    asymptotic_score,
    bounded_uniform,
    cauchy,
    gaussian,
    laplace,
    local_score,
    logpdf,
    pdf,
)
from .errors import (
    ConvergenceError,
    DegenerateMixtureError,
    DispatchError,
    DomainError,
    NonDifferentiableError,
    OpinionShiftError,
    PoleError,
    RedirectError,
    UnsupportedComboError,
    ValidationError,
)
from .oracle import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    TailTransform,
    fd_slope,
    quad_log_marginal,
    quad_posterior_mean,
    reference_specfun,
)
from .posterior import (
    BeliefState,
    Combo,
    Method,
    PosteriorResult,
    UncertainComponent,
    biased_posterior,
    dirichlet_mixture_posterior,
    gc_posterior,
    gl_posterior,
    lc_posterior,
    ll_unequal_posterior,
    mixture_confidence,
    mixture_posterior,
    posterior_mean,
    stable_posterior,
    swap_posterior,
)
from .specfun import ci, e1x, eix, erfc, erfcx, erfcx_real, si

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
