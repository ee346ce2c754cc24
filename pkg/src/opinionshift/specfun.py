"""Scaled special-function kernels for the closed-form posterior means.

Everything is computed in scaled form -- ``erfcx(z) = exp(z^2) erfc(z)`` and
``eix(z) = exp(-z) Ei(z)`` -- because the posterior ratios only ever need the
scaled quantities and the unscaled factors overflow for extreme signals.

Each function picks an algorithm by region:

* ``erfcx``: Weideman rational series for moderate arguments, Laplace
  continued fraction for large ones.
* ``eix`` / scaled ``E1``: power series, continued fraction, or truncated
  asymptotic series depending on modulus and distance from the imaginary
  axis (where the series loses accuracy to cancellation).
* ``si``/``ci``: Maclaurin series up to the crossover, then the scaled
  ``E1`` continued fraction evaluated on the imaginary axis.

Branch convention for ``eix``: principal branch with the cut on the
negative real axis, i.e. the continuation of ``gamma + log z + sum z^k/(k k!)``.
Under it ``eix(conj z) = conj(eix(z))`` away from the cut, and the posterior
assembled from it matches the quadrature oracle (enforced in tests).

Kernels are scalar and numba-jitted when the numba backend is active; see
``_backend``.  Accuracy is validated against the high-precision references
in ``oracle.reference_specfun``.
"""

import cmath
import math

import numpy as np

from ._backend import njit
from .errors import DomainError, PoleError

EULER_GAMMA = 0.5772156649015328606065120900824024

_SQRT_PI = 1.7724538509055160272981674833411452
_INV_SQRT_PI = 1.0 / _SQRT_PI

# ---------------------------------------------------------------------------
# Faddeeva function w(z) for Im(z) >= 0; erfcx(z) = w(iz).
# ---------------------------------------------------------------------------


def _weideman_coefficients(n: int):
    """Chebyshev-like coefficients of the rational series for w(z)."""
    m = 2 * n
    k = np.arange(-m + 1, m)
    big_l = math.sqrt(n / math.sqrt(2.0))
    theta = k * np.pi / m
    t = big_l * np.tan(theta / 2.0)
    f = np.zeros(t.size + 1)
    f[1:] = np.exp(-t * t) * (big_l * big_l + t * t)
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / (2 * m)
    a = np.flipud(a[1 : n + 1])
    return big_l, np.ascontiguousarray(a[::-1])  # ascending powers


_WEIDEMAN_N = 48
_WEIDEMAN_L, _WEIDEMAN_A = _weideman_coefficients(_WEIDEMAN_N)

# Continued fraction takes over where the rational series degrades.
_WOFZ_CF_RADIUS_SQ = 64.0
_WOFZ_CF_DEPTH = 32


@njit
def _wofz_rational(z):
    # Weideman's rational series; Im(z) >= 0, moderate |z|.
    iz = 1j * z
    d = _WEIDEMAN_L - iz
    big_z = (_WEIDEMAN_L + iz) / d
    p = 0.0 + 0.0j
    zp = 1.0 + 0.0j
    for c in _WEIDEMAN_A:
        p += c * zp
        zp *= big_z
    return 2.0 * p / (d * d) + _INV_SQRT_PI / d


@njit
def _wofz_cf(z):
    # Laplace continued fraction by backward recurrence; Im(z) >= 0, |z| >= 8.
    t = 0.0 + 0.0j
    for n in range(_WOFZ_CF_DEPTH, 0, -1):
        t = (0.5 * n) / (z - t)
    return 1j * _INV_SQRT_PI / (z - t)


@njit
def _wofz(z):
    if z.real * z.real + z.imag * z.imag >= _WOFZ_CF_RADIUS_SQ:
        return _wofz_cf(z)
    return _wofz_rational(z)


@njit
def _erfcx(z):
    # exp(z^2) erfc(z); accurate for Re(z) >= 0, reflected otherwise.
    if z.real >= 0.0:
        return _wofz(1j * z)
    # reflection erfcx(-z) = 2 exp(z^2) - erfcx(z); overflows for |z| large
    return 2.0 * cmath.exp(z * z) - _wofz(-1j * z)


@njit
def _erfcx_real(x):
    if x >= 0.0:
        return _wofz(complex(0.0, x)).real
    return 2.0 * math.exp(x * x) - _wofz(complex(0.0, -x)).real


# ---------------------------------------------------------------------------
# Exponential integrals: series, continued fraction, asymptotics.
# ---------------------------------------------------------------------------


@njit
def _ei_series(z):
    # gamma + log z + sum_k z^k/(k k!); relative accuracy degrades like
    # exp(|z| - Re z), so callers keep |z| - Re(z) small.
    s = 0.0 + 0.0j
    term = 1.0 + 0.0j
    for k in range(1, 400):
        term *= z / k
        s += term / k
        if abs(term) < 1e-18 * (1.0 + abs(s)) * k:
            break
    return EULER_GAMMA + cmath.log(z) + s


@njit
def _e1_series(z):
    # -gamma - log z - sum_k (-z)^k/(k k!); for |z| <= 4 only (cancellation).
    s = 0.0 + 0.0j
    term = 1.0 + 0.0j
    for k in range(1, 120):
        term *= -z / k
        s -= term / k
        if abs(term) < 1e-18 * (1.0 + abs(s)) * k:
            break
    return -EULER_GAMMA - cmath.log(z) + s


@njit
def _e1x_cf(z):
    # exp(z) E1(z) via modified Lentz on the even continued fraction
    # 1/(z+1- 1/(z+3- 4/(z+5- 9/(z+7- ...)))); |arg z| < pi.
    tiny = 1e-300
    b = z + 1.0
    if b == 0.0:
        b = complex(tiny, 0.0)
    c = complex(1e300, 0.0)
    d = 1.0 / b
    h = d
    for n in range(1, 4000):
        an = -1.0 * n * n
        b = b + 2.0
        d = an * d + b
        if d == 0.0:
            d = complex(tiny, 0.0)
        c = b + an / c
        if c == 0.0:
            c = complex(tiny, 0.0)
        d = 1.0 / d
        delta = c * d
        h = h * delta
        if abs(delta - 1.0) < 1e-15:
            return h
    return complex(math.nan, math.nan)


@njit
def _e1x(z):
    # exp(z) E1(z); any z off the negative real axis.
    if abs(z) <= 4.0:
        return cmath.exp(z) * _e1_series(z)
    return _e1x_cf(z)


@njit
def _eix_asymptotic(z):
    # eix(z) = sgn(Im z) i pi e^{-z} + (1/z) sum_k k!/z^k, truncated at the
    # smallest term; for |z| >= 34 the floor is below 1e-12 relative.
    s = 1.0 + 0.0j
    term = 1.0 + 0.0j
    kmax = int(abs(z)) + 10
    if kmax > 80:
        kmax = 80
    for k in range(1, kmax):
        nt = term * k / z
        if abs(nt) >= abs(term):
            break
        term = nt
        s += term
        if abs(term) < 1e-18 * abs(s):
            break
    if z.imag > 0.0:
        return 1j * math.pi * cmath.exp(-z) + s / z
    if z.imag < 0.0:
        return -1j * math.pi * cmath.exp(-z) + s / z
    return s / z


@njit
def _eix(z):
    # exp(-z) Ei(z), principal branch; z != 0 (validated by the wrapper).
    if z.imag < 0.0:
        return _eix(z.conjugate()).conjugate()
    if z.imag == 0.0:
        x = z.real
        if x > 0.0:
            if x <= 34.0:
                return cmath.exp(-z) * _ei_series(z)
            return _eix_asymptotic(z)
        # principal-value limit on the cut: Ei(x) = -E1(-x), real
        return -_e1x(-z)
    r = abs(z)
    if z.real < 0.0:
        # Ei(z) = i pi - E1(-z) with -z in the right half plane
        if r <= 4.0:
            return cmath.exp(-z) * _ei_series(z)
        return 1j * math.pi * cmath.exp(-z) - _e1x(-z)
    if r <= 14.0 or (r < 34.0 and r - z.real <= 10.0):
        return cmath.exp(-z) * _ei_series(z)
    if r >= 34.0:
        return _eix_asymptotic(z)
    # pocket near the imaginary axis: continued fraction route
    return 1j * math.pi * cmath.exp(-z) - _e1x(-z)


# ---------------------------------------------------------------------------
# Sine and cosine integrals.
# ---------------------------------------------------------------------------

_SICI_SERIES_MAX = 12.0


@njit
def _si_kernel(a):
    if a <= _SICI_SERIES_MAX:
        s = 0.0
        term = a
        k = 0
        while True:
            s += term / (2 * k + 1)
            k += 1
            term *= -a * a / ((2.0 * k) * (2.0 * k + 1.0))
            if abs(term) < 1e-18 * (1.0 + abs(s)):
                break
        return s
    e1 = cmath.exp(complex(0.0, -a)) * _e1x_cf(complex(0.0, a))
    return 0.5 * math.pi + e1.imag


@njit
def _ci_kernel(a):
    if a <= _SICI_SERIES_MAX:
        # Ci(a) = gamma + log a - Cin(a)
        cin = 0.0
        term = 0.5 * a * a
        k = 1
        while True:
            cin += term / (2.0 * k)
            k += 1
            term *= -a * a / ((2.0 * k - 1.0) * (2.0 * k))
            if abs(term) < 1e-18 * (1.0 + abs(cin)):
                break
        return EULER_GAMMA + math.log(a) - cin
    e1 = cmath.exp(complex(0.0, -a)) * _e1x_cf(complex(0.0, a))
    return -e1.real


# ---------------------------------------------------------------------------
# Public wrappers: validate, then call kernels.
# ---------------------------------------------------------------------------


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    return z


def erfcx(z) -> complex:
    """Scaled complementary error function ``exp(z^2) erfc(z)``.

    Accurate (<= 1e-12 relative) for ``Re(z) >= 0``; no overflow there for
    ``|Im(z)|`` up to 1e4.  ``Re(z) < 0`` is served by the reflection
    formula and may overflow -- no framework call site needs it.
    """
    return complex(_erfcx(_as_complex(z)))


def erfcx_real(x: float) -> float:
    """``exp(x^2) erfc(x)`` for real ``x``; positive and decreasing."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite argument {x!r}")
    return float(_erfcx_real(x))


def erfc(x: float) -> float:
    """Real complementary error function (stdlib kernel)."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite argument {x!r}")
    return math.erfc(x)


def eix(z) -> complex:
    """Scaled exponential integral ``exp(-z) Ei(z)``.

    Principal branch, cut on the negative real axis (where the real
    principal value is returned).  Relative accuracy <= 1e-10 for
    ``|Re z| <= 20``, ``|Im z| <= 10``, and degrading gracefully outside.
    """
    z = _as_complex(z)
    if z == 0:
        raise PoleError("eix has a logarithmic pole at z = 0")
    return complex(_eix(z))


def e1x(z) -> complex:
    """Scaled exponential integral ``exp(z) E1(z)`` (cut on negative reals)."""
    z = _as_complex(z)
    if z == 0:
        raise PoleError("e1x has a logarithmic pole at z = 0")
    if z.imag == 0.0 and z.real < 0.0:
        raise DomainError("e1x is not defined on the negative real axis")
    return complex(_e1x(z))


def si(a: float) -> float:
    """Sine integral ``Si(a) = int_0^a sin(t)/t dt`` for ``a >= 0``."""
    a = float(a)
    if not math.isfinite(a):
        raise DomainError(f"non-finite argument {a!r}")
    if a < 0.0:
        raise DomainError("si is defined here for a >= 0")
    return float(_si_kernel(a))


def ci(a: float) -> float:
    """Cosine integral ``Ci(a)`` for ``a > 0``; logarithmic pole at 0."""
    a = float(a)
    if not math.isfinite(a):
        raise DomainError(f"non-finite argument {a!r}")
    if a <= 0.0:
        raise PoleError("ci has a logarithmic singularity at a = 0")
    return float(_ci_kernel(a))
