"""Closed-form and quadrature densities used as oracles.

All functions accept scalars or arrays.  Densities on (0, 1) raise
``DomainError`` at or beyond the boundary.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, special

from ..errors import DomainError, ParameterError
from .samplers import BROWNIAN, StableParams


def _open_unit(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(~(arr < 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1)")
    return arr


def _positive(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"{name} must be positive")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")


def beta_density(u, a, b):
    u = _open_unit(u, "u")
    logc = special.gammaln(a + b) - special.gammaln(a) - special.gammaln(b)
    return _out(np.exp(logc + special.xlogy(a - 1, u) + special.xlog1py(b - 1, -u)))


def gamma_density(x, s):
    x = _positive(x)
    return _out(np.exp(special.xlogy(s - 1, x) - x - special.gammaln(s)))


def levy_density(ell, x):
    """Density of tau_ell for Brownian motion: ell/sqrt(2 pi) x^(-3/2) exp(-ell^2/(2x))."""
    x = _positive(x)
    ell = np.asarray(ell, dtype=float)
    return _out(ell / math.sqrt(2 * math.pi) * x ** -1.5 * np.exp(-0.5 * ell ** 2 / x))


def _kanter_A(phi, alpha):
    a1 = 1.0 - alpha
    return (np.sin(alpha * phi) ** (alpha / a1) * np.sin(a1 * phi)
            / np.sin(phi) ** (1.0 / a1))


def _standard_stable_density_scalar(x, alpha):
    if x <= 0:
        return 0.0
    a1 = 1.0 - alpha
    z = x ** (-alpha / a1)

    def integrand(phi):
        A = _kanter_A(phi, alpha)
        e = A * z
        return A * math.exp(-e) if e < 700.0 else 0.0

    with warnings.catch_warnings():
        # far in the tails the integrand is a spike whose mass is negligible
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, math.pi, limit=400, epsabs=1e-300, epsrel=1e-10)
    return alpha / a1 * x ** (-1.0 / a1) * val / math.pi


def standard_stable_density(x, alpha):
    """Density of S with E exp(-s S) = exp(-s^alpha), by Kanter's integral."""
    _check_alpha(alpha)
    arr = np.asarray(x, dtype=float)
    if alpha == 0.5:
        # S = 1/(4 G) with G ~ gamma(1/2): density (4 pi)^(-1/2) x^(-3/2) exp(-1/(4x))
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(arr > 0, np.exp(-0.25 / arr) / (2 * math.sqrt(math.pi))
                           * np.abs(arr) ** -1.5, 0.0)
        return _out(val)
    vec = np.vectorize(lambda t: _standard_stable_density_scalar(t, alpha), otypes=[float])
    return _out(vec(arr))


def stable_density(x, level=1.0, p: StableParams = BROWNIAN):
    """Density f_level(x) of tau_level, where E exp(-xi tau_l) = exp(-l c xi^alpha)."""
    scale = (np.asarray(level, dtype=float) * p.c) ** (1.0 / p.alpha)
    return _out(np.asarray(standard_stable_density(np.asarray(x) / scale, p.alpha)) / scale)


def density_L1_bridge(ell, p: StableParams = BROWNIAN):
    """Density of the bridge local time at 0 over [0, 1]: c Gamma(alpha) f_ell(1)."""
    ell = _positive(ell, "ell")
    return _out(p.c * math.gamma(p.alpha) * np.asarray(stable_density(1.0, ell, p)))


def rayleigh_cdf(ell):
    ell = np.asarray(ell, dtype=float)
    return _out(np.where(ell > 0, -np.expm1(-0.5 * np.maximum(ell, 0.0) ** 2), 0.0))


def density_tau_br(u, x, alpha=0.5):
    """Density of the time at which the bridge local time reaches the fraction u."""
    u = float(_open_unit(u, "u"))
    x = _open_unit(x)
    _check_alpha(alpha)
    ub = 1.0 - u
    if alpha == 0.5:
        return _out(u * ub / (2.0 * ((1.0 - x) * u * u + x * ub * ub) ** 1.5))
    # the value does not depend on c, so work with c = 1
    p = StableParams(alpha, 1.0)

    def one(xv):
        def integrand(ell):
            return (float(stable_density(xv, u * ell, p))
                    * float(stable_density(1.0 - xv, ub * ell, p)))

        val, _ = integrate.quad(integrand, 0.0, np.inf, limit=200, epsrel=1e-8)
        return p.c * math.gamma(alpha) * val

    return _out(np.vectorize(one, otypes=[float])(x))


def cdf_tau_br(u, x):
    """Brownian-case distribution function of the local-time fraction hitting time."""
    u = float(_open_unit(u, "u"))
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    ub = 1.0 - u
    B = ub * ub - u * u
    if abs(B) < 1e-12:
        return _out(x)
    return _out(u * ub / B * (1.0 / u - 1.0 / np.sqrt(u * u + x * B)))


def _h(x):
    # x^(-1/2) + log(x^(-1/2) - 1), with the log written as log1p(-sqrt x) - log(x)/2
    return x ** -0.5 + np.log1p(-np.sqrt(x)) - 0.5 * np.log(x)


def density_T1(x):
    """Density of the first T-cut of the Brownian bridge: (h(x) + h(1-x))/2."""
    x = _open_unit(x)
    return _out(0.5 * (_h(x) + _h(1.0 - x)))


def _H(x):
    # antiderivative of h vanishing at 0: sqrt x + (x-1) log(1 - sqrt x) - x log(x)/2
    s = np.sqrt(x)
    inner = np.where(x < 1.0, (x - 1.0) * np.log1p(-np.where(x < 1.0, s, 0.0)), 0.0)
    return s + inner - 0.5 * special.xlogy(x, x)


def cdf_T1(x):
    """Distribution function of the first T-cut, in closed form."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return _out(0.5 * (_H(x) + 1.0 - _H(1.0 - x)))


def intensity_T_lengths(x, alpha=0.5):
    """Mean density of the T-interval lengths: alpha x^(-1) (1-x)^(alpha-1)."""
    x = _open_unit(x)
    _check_alpha(alpha)
    return _out(alpha / x * (1.0 - x) ** (alpha - 1.0))


def split_integral(a, b):
    """I(a, b) = int_0^1 (x(1-x))^(-1/2) / (a sqrt x + b sqrt(1-x)) dx, in closed form."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = np.hypot(a, b)
    return _out((np.log((r + a) / (r - a)) + np.log((r + b) / (r - b))) / r)


def joint_density_split(a, b):
    """Brownian-case joint density of the local times on either side of the first T-cut."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("a and b must be positive")
    return _out(a * b / math.sqrt(2 * math.pi) * np.asarray(split_integral(a, b))
                * np.exp(-0.5 * a * a - 0.5 * b * b))


def joint_density_T1_split(x, h, k):
    """Brownian-case joint density of (T_1, L at T_1, L_1 - L at T_1).

    hk/sqrt(2 pi) (x(1-x))^(-3/2) / (h+k) exp(-h^2/(2x) - k^2/(2(1-x))).
    """
    x = _open_unit(x)
    h = _positive(h, "h")
    k = _positive(k, "k")
    xb = 1.0 - x
    return _out(h * k / math.sqrt(2 * math.pi) * (x * xb) ** -1.5 / (h + k)
                * np.exp(-0.5 * h * h / x - 0.5 * k * k / xb))
