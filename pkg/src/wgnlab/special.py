"""Closed-form constants and kernels.

Contents: a Lanczos complex Gamma, the Riesz constant ``c_{alpha,d}``, the
Gamma-modulus identities, the constants ``alpha_d(tau)``, ``beta_d(tau)`` of
the imaginary-power kernel with their polynomial bounds, ``A(z)``, the Bessel
kernels ``G_alpha`` and ``G_{i tau}`` by subordination quadrature, the
Hölder quotient scan and regularised lattice sums used by the singular
quadrature rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)

QUAD_RTOL = 1e-8


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    z = z - 1
    acc = np.full(z.shape, _LANCZOS_P[0], dtype=complex)
    for k in range(1, len(_LANCZOS_P)):
        acc = acc + _LANCZOS_P[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    # log sin(pi z) without overflow for large |Im z|
    upper = z.imag >= 0
    w = np.where(upper, z, np.conj(z))
    val = -1j * math.pi * w + np.log(np.exp(2j * math.pi * w) - 1) - np.log(2j)
    return np.where(upper, val, np.conj(val))


def loggamma(z) -> np.ndarray:
    """Complex log-Gamma (some branch) by the Lanczos approximation."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = _loggamma_right(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = math.log(math.pi) - _log_sin_pi(zl) - _loggamma_right(1 - zl)
    return out[0] if scalar else out


def gamma(z) -> np.ndarray:
    """Complex Gamma function, ``exp(loggamma(z))``."""
    return np.exp(loggamma(z))


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def riesz_constant(alpha: complex, d: int) -> complex:
    """``c_{alpha,d} = pi^(alpha-d/2) Gamma((d-alpha)/2) / Gamma(alpha/2)``."""
    if not 0 < complex(alpha).real < d:
        raise ValueError(f"Re(alpha) must lie in ]0, {d}[, got {alpha}")
    val = np.exp((alpha - d / 2) * math.log(math.pi) + loggamma((d - alpha) / 2) - loggamma(alpha / 2))
    val = complex(val)
    return val.real if complex(alpha).imag == 0 else val


GAMMA_KINDS = ("pure_imaginary", "integer_shift", "half_integer_shift")


def gamma_modulus_sq(kind: str, y: float, m: int = 1) -> float:
    """Closed-form ``|Gamma(s + i y)|**2`` for ``s = 0``, ``m`` or ``m - 1/2``."""
    if y == 0:
        raise ValueError("y must be nonzero")
    if kind == "pure_imaginary":
        return math.pi / (y * math.sinh(math.pi * y))
    if m < 1:
        raise ValueError("shift m must be a positive integer")
    if kind == "integer_shift":
        prod = math.prod(k * k + y * y for k in range(1, m))
        return math.pi * y / math.sinh(math.pi * y) * prod
    if kind == "half_integer_shift":
        prod = math.prod((k - 0.5) ** 2 + y * y for k in range(1, m))
        return math.pi / math.cosh(math.pi * y) * prod
    raise ValueError(f"unknown kind {kind!r}; expected one of {GAMMA_KINDS}")


def polynomial_bound(t: float, d: int) -> float:
    """Displayed product bound on ``|Gamma((d+i tau)/2)| / |Gamma(-i tau/2)|``.

    For ``d = 2m``: ``(t/2)(1+t/2)...(m-1+t/2)``; for ``d = 2m-1``:
    ``sqrt(pi)(t/2) prod_{k<m}(k-1/2+t/2)``, with ``t = |tau|``. Since
    ``|alpha_d(tau)|`` carries an extra factor ``pi^(-d/2) < 1`` it is
    bounded by the same value.
    """
    t = abs(t)
    m = (d + 1) // 2
    if d % 2 == 0:
        return t / 2 * math.prod(k + t / 2 for k in range(1, m))
    return math.sqrt(math.pi) * t / 2 * math.prod(k - 0.5 + t / 2 for k in range(1, m))


def weak_type_polynomial(t: float, d: int) -> float:
    """Growth polynomial of degree ``ceil(d/2)+1`` for imaginary powers.

    ``1 + (1+t) P_d(t) + 2 d |B_1| P_d(t)/t``, the sum of the bounds on
    ``|alpha_d|``, ``t|alpha_d|`` and ``2|beta_d|``; ``P_d(t)/t`` is taken as a
    polynomial so the value at ``t = 0`` is finite.
    """
    t = abs(t)
    m = (d + 1) // 2
    if d % 2 == 0:
        quotient = 0.5 * math.prod(k + t / 2 for k in range(1, m))
    else:
        quotient = 0.5 * math.sqrt(math.pi) * math.prod(k - 0.5 + t / 2 for k in range(1, m))
    return 1 + (1 + t) * quotient * t + 2 * d * unit_ball_volume(d) * quotient


@dataclass(frozen=True)
class MultiplierConstants:
    tau: float
    dim: int
    alpha: complex
    beta: complex
    p_bound: float

    @property
    def gamma_ratio(self) -> float:
        """``|Gamma((d+i tau)/2)| / |Gamma(-i tau/2)| = pi^(d/2) |alpha_d|``."""
        return math.pi ** (self.dim / 2) * abs(self.alpha)


def multiplier_constants(tau: float, d: int) -> MultiplierConstants:
    """``alpha_d(tau)``, ``beta_d(tau)`` and the polynomial bound ``P_d(|tau|)``."""
    if tau == 0:
        raise ValueError("tau must be nonzero")
    log_a = ((-d / 2 - 1j * tau) * math.log(math.pi)
             + loggamma((d + 1j * tau) / 2) - loggamma(-1j * tau / 2))
    a = complex(np.exp(log_a))
    b = 1j * d * unit_ball_volume(d) / tau * a
    return MultiplierConstants(float(tau), d, a, b, polynomial_bound(tau, d))


def a_function(z) -> np.ndarray:
    """``A(z) = (2^z - 2^-z) Gamma(z)``."""
    z = np.asarray(z, dtype=complex)
    return (2.0**z - 2.0 ** (-z)) * gamma(z)


def a_function_zero(k: int) -> complex:
    """The zero ``2 pi i k / log 4`` of :func:`a_function` (``k != 0``)."""
    if k == 0:
        raise ValueError("k must be nonzero")
    return 2j * math.pi * k / math.log(4)


# subordination kernels --------------------------------------------------

def _subordination_integral(a: complex, r: float) -> tuple[complex, float]:
    """``int_0^inf s^(a-1) exp(-s - pi^2 r^2 / s) ds`` and an error estimate.

    Integrated in ``u = log s`` with a split at ``s = max(1, pi r)``.
    """
    b = (math.pi * r) ** 2
    u0 = math.log(max(1.0, math.pi * r))
    ar, ai = a.real, a.imag

    def log_mod(u):
        if u > 700 or (b > 0 and -u > 700):
            return -math.inf
        return ar * u - math.exp(u) - (b * math.exp(-u) if b > 0 else 0.0)

    def re(u):
        return math.exp(log_mod(u)) * math.cos(ai * u)

    def im(u):
        return math.exp(log_mod(u)) * math.sin(ai * u)

    parts = [re] if ai == 0 else [re, im]
    vals, errs = [], []
    for fn in parts:
        v1, e1 = integrate.quad(fn, -np.inf, u0, epsabs=0, epsrel=QUAD_RTOL, limit=400)
        v2, e2 = integrate.quad(fn, u0, np.inf, epsabs=0, epsrel=QUAD_RTOL, limit=400)
        vals.append(v1 + v2)
        errs.append(e1 + e2)
    val = complex(vals[0], vals[1] if len(vals) > 1 else 0.0)
    return val, float(math.hypot(*errs)) if len(errs) > 1 else float(errs[0])


@dataclass(frozen=True)
class KernelEval:
    """Bessel-type kernel evaluated by subordination quadrature.

    ``kind`` is ``bessel_real`` (order ``alpha > 0``) or ``bessel_imaginary``
    (order ``i tau``).
    """

    kind: str
    order: float
    dim: int

    def value(self, r: float) -> tuple[complex, float]:
        d = self.dim
        if self.kind == "bessel_real":
            alpha = self.order
            if alpha <= 0:
                raise ValueError("alpha must be positive")
            if r < 0:
                raise ValueError("radius must be nonnegative")
            if r == 0 and alpha <= d:
                raise ValueError("kernel singular at origin")
            pref = math.pi ** (d / 2) / math.gamma(alpha / 2)
            v, e = _subordination_integral(complex(alpha / 2 - d / 2), r)
            return pref * v.real, pref * e
        if self.kind == "bessel_imaginary":
            tau = self.order
            if tau == 0:
                raise ValueError("tau must be nonzero")
            if r <= 0:
                raise ValueError("kernel singular at origin")
            pref = math.pi ** (d / 2) / complex(gamma(-1j * tau / 2))
            v, e = _subordination_integral(complex(-d / 2, -tau / 2), r)
            return pref * v, abs(pref) * e
        raise ValueError(f"unknown kernel kind {self.kind!r}")


def bessel_kernel(alpha: float, r: float, d: int) -> float:
    """``G_alpha(r)``, the kernel of ``J^(-alpha)``, by subordination quadrature."""
    return float(KernelEval("bessel_real", alpha, d).value(r)[0].real)


def bessel_normalization(alpha: float, d: int) -> float:
    """``int G_alpha`` over ``R^d`` by radial quadrature.

    The piece near the origin behaves like ``r^(alpha-1)`` and is handled by
    the algebraic-weight rule of QUADPACK.
    """
    area = sphere_area(d)
    r1 = 1 / math.pi

    if alpha < d:
        limit0 = math.pi ** (alpha - d / 2) * math.gamma((d - alpha) / 2) / math.gamma(alpha / 2)

        def smooth(r):
            if r == 0:
                return limit0
            return r ** (d - alpha) * bessel_kernel(alpha, r, d)
        near, _ = integrate.quad(smooth, 0, r1, weight="alg", wvar=(alpha - 1, 0),
                                 epsabs=0, epsrel=1e-9, limit=200)
    else:
        near, _ = integrate.quad(lambda r: r ** (d - 1) * bessel_kernel(alpha, r, d), 0, r1,
                                 epsabs=0, epsrel=1e-9, limit=200)
    far, _ = integrate.quad(lambda r: r ** (d - 1) * bessel_kernel(alpha, r, d), r1, np.inf,
                            epsabs=0, epsrel=1e-9, limit=200)
    return area * (near + far)


def bessel_decay_constant(alpha: float, d: int, radii: Sequence[float]) -> float:
    """Smallest ``C`` with ``G_alpha(r) <= C exp(-pi r)`` on the given radii."""
    return max(bessel_kernel(alpha, r, d) * math.exp(math.pi * r) for r in radii)


def oscillatory_bessel_kernel(tau: float, r: float, d: int) -> complex:
    """``G_{i tau}(r)``, the kernel of the imaginary Bessel power."""
    return complex(KernelEval("bessel_imaginary", tau, d).value(r)[0])


# Hölder quotients ---------------------------------------------------------

def holder_function(gamma_index: Sequence[int], delta: float, xi: np.ndarray) -> np.ndarray:
    """``xi^gamma |xi|^(delta - |gamma|)``, extended by 0 at the origin."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    g = np.asarray(gamma_index, dtype=int)
    r = np.linalg.norm(xi, axis=-1)
    mono = np.prod(xi**g, axis=-1)
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = mono[nz] * r[nz] ** (delta - g.sum())
    return out


def holder_quotient_scan(gamma_index: Sequence[int], delta: float, samples) -> float:
    """Max of ``|f(xi)-f(eta)| / |xi-eta|^delta`` over sample pairs."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in ]0, 1]")
    pairs = list(samples)
    if not pairs:
        raise ValueError("empty sample list")
    xi = np.array([np.atleast_1d(p[0]) for p in pairs], dtype=float)
    eta = np.array([np.atleast_1d(p[1]) for p in pairs], dtype=float)
    dist = np.linalg.norm(xi - eta, axis=-1)
    keep = dist > 0
    diff = np.abs(holder_function(gamma_index, delta, xi) - holder_function(gamma_index, delta, eta))
    return float(np.max(diff[keep] / dist[keep] ** delta))


# regularised lattice sums -------------------------------------------------

def _angular_moment(mono: tuple[int, ...]) -> float:
    d = len(mono)
    deg = sum(mono)
    num = math.prod(math.gamma((b + 1) / 2) for b in mono)
    return num * math.gamma(d / 2) / (math.gamma((deg + d) / 2) * math.pi ** (d / 2))


@lru_cache(maxsize=256)
def _lattice_constant_cached(e: float, mono: tuple[int, ...]) -> float:
    d = len(mono)
    deg = sum(mono)
    area = sphere_area(d)
    ang = _angular_moment(mono)
    sigmas = np.arange(3.0, 11.0)
    vals = []
    for s in sigmas:
        R = int(math.ceil(3.6 * s)) + 1
        ax = np.arange(-R, R + 1, dtype=float)
        g = np.meshgrid(*([ax] * d), indexing="ij")
        r2 = sum(a**2 for a in g)
        mask = r2 > 0
        mon = np.ones_like(r2)
        for a, b in zip(g, mono):
            if b:
                mon = mon * a**b
        lattice = np.sum(r2[mask] ** (e / 2) * mon[mask] * np.exp(-math.pi * r2[mask] / s**2))
        exact = ang * area * 0.5 * (s**2 / math.pi) ** ((e + deg + d) / 2) * math.gamma((e + deg + d) / 2)
        vals.append(exact - lattice)
    # remainder is a power series in s^-2
    M = np.vstack([sigmas ** (-2 * k) for k in range(len(sigmas))]).T
    return float(np.linalg.solve(M, np.array(vals))[0])


def lattice_constant(e: float, mono: Sequence[int]) -> float:
    """Regularised ``-sum_{j != 0} |j|^e j^mono`` over ``Z^d``, ``d = len(mono)``.

    This is the origin weight that makes the punctured trapezoidal rule
    ``h^d sum_{j != 0} |jh|^e (jh)^mono g(jh)`` consistent for smooth ``g``;
    computed by calibrating against Gaussians of growing width and
    extrapolating in the width. Requires ``e + |mono| > -d``. In one
    dimension it equals ``-2 zeta(-e - |mono|)`` for even monomials.
    """
    mono = tuple(int(b) for b in mono)
    if e + sum(mono) <= -len(mono):
        raise ValueError("lattice sum diverges at the origin")
    return _lattice_constant_cached(round(float(e), 13), mono)
