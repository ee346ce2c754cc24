"""Closed-form-versus-quadrature equivalence grid.

Runs every supported prior/signal pair over a grid of scale ratios and
signal deviations and reports the worst normalized deviation between the
closed-form posterior mean and the quadrature oracle.  Used by the CLI
``verify`` verb and by the acceptance suite.
"""

import math
from dataclasses import dataclass

from .distributions import Distribution, Family, SignalModel
from .oracle import DEFAULT_CONFIG, quad_posterior_mean
from .posterior import BeliefState, posterior_mean

#: (prior family, signal family) for all nine catalog cells.
ALL_PAIRS = (
    (Family.GAUSSIAN, Family.GAUSSIAN),
    (Family.GAUSSIAN, Family.LAPLACE),
    (Family.GAUSSIAN, Family.CAUCHY),
    (Family.LAPLACE, Family.GAUSSIAN),
    (Family.LAPLACE, Family.LAPLACE),
    (Family.LAPLACE, Family.CAUCHY),
    (Family.CAUCHY, Family.GAUSSIAN),
    (Family.CAUCHY, Family.LAPLACE),
    (Family.CAUCHY, Family.CAUCHY),
)

DEFAULT_RATIOS = (0.5, 1.0, 2.0)
DEFAULT_DEVIATIONS = (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0,
                      10.0, -10.0, 50.0, -50.0)
EQUIVALENCE_TOL = 1e-6


@dataclass(frozen=True)
class GridEntry:
    prior_family: str
    signal_family: str
    ratio: float
    deviation: float
    theta1_closed: float
    theta1_quad: float
    normalized_error: float

    @property
    def passed(self) -> bool:
        return self.normalized_error <= EQUIVALENCE_TOL


def run_equivalence_grid(theta0: float = 0.7, sigma0: float = 1.0,
                         ratios=DEFAULT_RATIOS, deviations=DEFAULT_DEVIATIONS,
                         cfg=DEFAULT_CONFIG):
    """Evaluate the grid; yields one :class:`GridEntry` per point.

    Deviations are in prior-scale units; ``ratio`` is sigma_eps/sigma0.
    The normalized error is ``|closed - quad| / (1 + |theta1|)``.
    """
    entries = []
    for pf, sf in ALL_PAIRS:
        for ratio in ratios:
            prior = BeliefState(Distribution(pf, theta0, sigma0))
            signal = SignalModel(noise=Distribution(sf, 0.0, ratio * sigma0))
            for dev in deviations:
                x = theta0 + dev * sigma0
                closed = posterior_mean(prior, signal, x)
                quad = quad_posterior_mean(prior, signal, x, cfg)
                err = abs(closed.theta1 - quad.theta1) / (1.0 + abs(quad.theta1))
                entries.append(
                    GridEntry(pf.value, sf.value, ratio, dev,
                              closed.theta1, quad.theta1, err)
                )
    return entries


def summarize_by_pair(entries):
    """Worst normalized error per (prior, signal) pair, insertion-ordered."""
    worst: dict = {}
    for e in entries:
        key = (e.prior_family, e.signal_family)
        if key not in worst or e.normalized_error > worst[key].normalized_error:
            worst[key] = e
    return worst


def grid_passed(entries) -> bool:
    return all(e.passed for e in entries) and all(
        math.isfinite(e.theta1_closed) for e in entries
    )
