"""Location-scale distribution catalog and the two signal scores.

The catalog covers the four symmetric families used as priors or signal
noise.  ``local_score`` differentiates the log-likelihood in the signal at
the prior location (small-signal linearization); ``asymptotic_score``
differentiates in the state (large-signal behavior).
"""

import math
from dataclasses import dataclass
from enum import Enum

from .errors import NonDifferentiableError, UnsupportedComboError, ValidationError

_LOG_2PI = math.log(2.0 * math.pi)


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    CAUCHY = "cauchy"
    BOUNDED_UNIFORM = "bounded_uniform"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, Family):
            return name
        try:
            return cls(str(name).strip().lower().replace("-", "_"))
        except ValueError:
            raise ValidationError(
                f"unknown family {name!r}; expected one of "
                f"{[f.value for f in cls]}"
            ) from None


@dataclass(frozen=True)
class Distribution:
    """A symmetric location-scale law.

    ``scale`` is the classical scale parameter of each family (standard
    deviation for Gaussian, diversity for Laplace, half-width-at-half-max
    for Cauchy, half-width of the support for the bounded uniform).
    """

    family: Family
    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "scale", float(self.scale))
        if not math.isfinite(self.location):
            raise ValidationError(f"non-finite location {self.location!r}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValidationError(f"scale must be positive and finite, got {self.scale!r}")


def pdf(d: Distribution, t: float) -> float:
    """Density of ``d`` at ``t``."""
    u = (float(t) - d.location) / d.scale
    if d.family is Family.GAUSSIAN:
        return math.exp(-0.5 * u * u) / (d.scale * math.sqrt(2.0 * math.pi))
    if d.family is Family.LAPLACE:
        return math.exp(-abs(u)) / (2.0 * d.scale)
    if d.family is Family.CAUCHY:
        return 1.0 / (math.pi * d.scale * (1.0 + u * u))
    # bounded uniform on [location - scale, location + scale]
    return 1.0 / (2.0 * d.scale) if abs(u) <= 1.0 else 0.0


def logpdf(d: Distribution, t: float) -> float:
    """Log-density of ``d`` at ``t`` (``-inf`` outside uniform support)."""
    u = (float(t) - d.location) / d.scale
    if d.family is Family.GAUSSIAN:
        return -0.5 * u * u - math.log(d.scale) - 0.5 * _LOG_2PI
    if d.family is Family.LAPLACE:
        return -abs(u) - math.log(2.0 * d.scale)
    if d.family is Family.CAUCHY:
        return -math.log(math.pi * d.scale) - math.log1p(u * u)
    return -math.log(2.0 * d.scale) if abs(u) <= 1.0 else -math.inf


def _require_noise_family(noise: Distribution, op: str) -> None:
    if noise.family is Family.BOUNDED_UNIFORM:
        raise UnsupportedComboError(
            f"{op}: bounded-uniform is supported as a prior only, not as signal noise"
        )


def local_score(noise: Distribution, theta0: float, theta: float) -> float:
    """Signal-derivative of the noise log-likelihood at the prior location.

    Returns ``d/dx log l(x - theta)`` evaluated at ``x = theta0``.  For
    Laplace noise the point ``theta = theta0`` sits on the kink and raises;
    integration across it is the caller's job.
    """
    _require_noise_family(noise, "local_score")
    u = float(theta0) - float(theta)
    s = noise.scale
    if noise.family is Family.GAUSSIAN:
        return -u / (s * s)
    if noise.family is Family.LAPLACE:
        if u == 0.0:
            raise NonDifferentiableError(
                "Laplace log-likelihood is not differentiable at theta = theta0"
            )
        return -math.copysign(1.0, u) / s
    return -2.0 * u / (u * u + s * s)


def asymptotic_score(noise: Distribution, theta0: float, x: float) -> float:
    """State-derivative of the noise log-likelihood at the prior location.

    Returns ``d/dtheta log l(x - theta)`` at ``theta = theta0``: the
    per-family large-signal score (linear for Gaussian, saturating for
    Laplace, decaying for Cauchy).
    """
    _require_noise_family(noise, "asymptotic_score")
    u = float(x) - float(theta0)
    s = noise.scale
    if noise.family is Family.GAUSSIAN:
        return u / (s * s)
    if noise.family is Family.LAPLACE:
        if u == 0.0:
            raise NonDifferentiableError(
                "Laplace log-likelihood is not differentiable at x = theta0"
            )
        return math.copysign(1.0, u) / s
    return 2.0 * u / (u * u + s * s)


@dataclass(frozen=True)
class MixtureComponent:
    """A state-independent signal component centered at ``bias_point``."""

    weight: float
    bias_point: float
    scale: float
    family: Family = Family.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "bias_point", float(self.bias_point))
        object.__setattr__(self, "scale", float(self.scale))
        if not 0.0 <= self.weight <= 1.0:
            raise ValidationError(f"component weight {self.weight!r} outside [0, 1]")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValidationError(f"component scale must be positive, got {self.scale!r}")
        if not math.isfinite(self.bias_point):
            raise ValidationError(f"non-finite bias point {self.bias_point!r}")

    def density(self, x: float) -> float:
        return pdf(Distribution(self.family, self.bias_point, self.scale), x)

    def log_density(self, x: float) -> float:
        return logpdf(Distribution(self.family, self.bias_point, self.scale), x)


_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class SignalModel:
    """Perceived signal: zero-located noise, constant bias, optional mixture.

    With a mixture, ``eps_weight`` is the weight of the state-centered noise
    component and the component weights plus ``eps_weight`` must sum to one.
    """

    noise: Distribution
    bias: float = 0.0
    mixture: tuple = ()
    eps_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "mixture", tuple(self.mixture))
        object.__setattr__(self, "eps_weight", float(self.eps_weight))
        if self.noise.location != 0.0:
            raise ValidationError("signal noise must have location 0")
        if self.noise.family is Family.BOUNDED_UNIFORM:
            raise UnsupportedComboError(
                "bounded-uniform is supported as a prior only, not as signal noise"
            )
        if not math.isfinite(self.bias):
            raise ValidationError(f"non-finite bias {self.bias!r}")
        if not 0.0 <= self.eps_weight <= 1.0:
            raise ValidationError(f"eps_weight {self.eps_weight!r} outside [0, 1]")
        if self.mixture:
            total = self.eps_weight + sum(c.weight for c in self.mixture)
            if abs(total - 1.0) > _WEIGHT_TOL:
                raise ValidationError(
                    f"mixture weights must sum to 1 (got {total!r})"
                )
        elif self.eps_weight != 1.0:
            raise ValidationError("eps_weight must be 1 when there is no mixture")

    @property
    def has_mixture(self) -> bool:
        return bool(self.mixture)

    def likelihood(self, x: float, theta: float) -> float:
        """Full signal likelihood ``l(x | theta)`` including bias and mixture."""
        core = pdf(self.noise, float(x) - self.bias - float(theta))
        if not self.mixture:
            return core
        acc = self.eps_weight * core
        for c in self.mixture:
            acc += c.weight * c.density(float(x))
        return acc


def gaussian(location: float = 0.0, scale: float = 1.0) -> Distribution:
    return Distribution(Family.GAUSSIAN, location, scale)


def laplace(location: float = 0.0, scale: float = 1.0) -> Distribution:
    return Distribution(Family.LAPLACE, location, scale)


def cauchy(location: float = 0.0, scale: float = 1.0) -> Distribution:
    return Distribution(Family.CAUCHY, location, scale)


def bounded_uniform(location: float = 0.0, half_width: float = 1.0) -> Distribution:
    return Distribution(Family.BOUNDED_UNIFORM, location, half_width)
