"""Weights, closed-form Muckenhoupt verdicts and a numerical A_{p,q}^alpha estimator.

The two-weight quantity estimated here is

    [v, w] = sup_B |B|^(alpha/d - 1) (int_B v^(-p'/p))^(1/p') (int_B w)^(1/q)

taken over balls. Power weights ``|x|^g`` and bracket weights ``<x>^g``
are radial, so every ball integral reduces to a one-dimensional quadrature
against the area of the sphere of radius ``rho`` that lies inside the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .grid import GridFunction
from .special import sphere_area, unit_ball_volume

EQ_TOL = 1e-12
WEIGHT_KINDS = ("power_law", "bracket", "table")
DIVERGENCE_FACTOR = 2.0


@dataclass(frozen=True)
class Weight:
    """Weight descriptor with exact pointwise evaluation.

    ``power_law`` is ``|x|^gamma``, ``bracket`` is ``(1+|x|^2)^(gamma/2)`` and
    ``table`` holds positive samples on a grid (nearest-sample lookup).
    """

    kind: str
    gamma: float = 0.0
    table: GridFunction | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}; expected one of {WEIGHT_KINDS}")
        if self.kind == "table":
            if self.table is None:
                raise ValueError("table weight needs a GridFunction")
            vals = np.asarray(self.table.values)
            if np.any(np.abs(vals.imag) > 0) or np.any(vals.real <= 0) or not np.all(np.isfinite(vals)):
                raise ValueError("table weight must be finite and strictly positive")

    @property
    def radial(self) -> bool:
        return self.kind in ("power_law", "bracket")

    def check_integrable(self, d: int) -> None:
        if self.radial and not self.gamma > -d:
            raise ValueError(f"weight exponent must exceed -d = {-d}, got {self.gamma}")

    def profile(self, rho: np.ndarray) -> np.ndarray:
        """Radial profile ``w_0(rho)``."""
        rho = np.asarray(rho, dtype=float)
        if self.kind == "power_law":
            with np.errstate(divide="ignore"):
                return rho**self.gamma
        if self.kind == "bracket":
            return (1 + rho**2) ** (self.gamma / 2)
        raise ValueError("tabulated weights have no radial profile")

    def scalar_profile(self):
        """Plain-float version of :meth:`profile` for quadrature integrands."""
        g = self.gamma
        if self.kind == "power_law":
            return lambda r: r**g
        if self.kind == "bracket":
            return lambda r: (1.0 + r * r) ** (g / 2)
        raise ValueError("tabulated weights have no radial profile")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.radial:
            return self.profile(np.linalg.norm(x, axis=-1))
        g = self.table.grid
        idx = np.rint((x + g.extent / 2) / g.spacing).astype(int) % g.points_per_axis
        return self.table.values.real[tuple(np.moveaxis(idx, -1, 0))]

    def power(self, e: float) -> "Weight":
        """``w**e`` for radial weights."""
        if not self.radial:
            raise ValueError("powers only supported for radial weights")
        return Weight(self.kind, self.gamma * e)


def power_law(gamma: float) -> Weight:
    return Weight("power_law", float(gamma))


def bracket(gamma: float) -> Weight:
    return Weight("bracket", float(gamma))


@dataclass(frozen=True)
class Condition:
    name: str
    satisfied: bool
    slack: float


def _ge(name: str, lhs: float, rhs: float) -> Condition:
    return Condition(name, lhs >= rhs - EQ_TOL, lhs - rhs)


def _gt(name: str, lhs: float, rhs: float) -> Condition:
    return Condition(name, lhs > rhs, lhs - rhs)


def _eq(name: str, lhs: float, rhs: float) -> Condition:
    return Condition(name, abs(lhs - rhs) <= EQ_TOL, -abs(lhs - rhs))


@dataclass(frozen=True)
class ApqVerdict:
    in_class: bool
    failed_conditions: list[str]
    margin: float
    conditions: list[Condition]


def verdict(conds: list[Condition]) -> ApqVerdict:
    failed = [c.name for c in conds if not c.satisfied]
    ok = [max(c.slack, 0.0) for c in conds if c.satisfied]
    return ApqVerdict(not failed, failed, min(ok) if ok else math.nan, conds)


def power_apq_check(a: float, b: float, p: float, q: float, alpha: float, d: int) -> ApqVerdict:
    """Closed-form ``(|x|^a, |x|^b) in A_{p,q}^alpha`` verdict."""
    return verdict([
        _ge("alpha >= d/p - d/q", alpha, d / p - d / q),
        _eq("alpha - d/p + d/q = a/p - b/q", alpha - d / p + d / q, a / p - b / q),
        _gt("a < d(p-1)", d * (p - 1), a),
        _gt("b > -d", b, -d),
    ])


def bracket_apq_check(a: float, b: float, p: float, q: float, alpha: float, d: int) -> ApqVerdict:
    """Closed-form ``(<x>^a, <x>^b) in A_{p,q}^alpha`` verdict (comparisons as typeset)."""
    return verdict([
        _gt("a < d(p-1)", d * (p - 1), a),
        _gt("b > -d", b, -d),
        _ge("alpha >= d/p - d/q", alpha, d / p - d / q),
        _ge("alpha - d/p + d/q <= a/p - b/q", a / p - b / q, alpha - d / p + d / q),
        _ge("alpha <= d", d, alpha),
        _ge("b/q <= d/q' - alpha", d * (1 - 1 / q) - alpha, b / q),
        _ge("a/p >= alpha - d/p", a / p, alpha - d / p),
    ])


def apq_check(kind: str, a: float, b: float, p: float, q: float, alpha: float, d: int) -> ApqVerdict:
    if kind == "power_law":
        return power_apq_check(a, b, p, q, alpha, d)
    if kind == "bracket":
        return bracket_apq_check(a, b, p, q, alpha, d)
    raise ValueError(f"no closed-form verdict for weight kind {kind!r}")


def ap_range(kind: str, p: float, d: int) -> tuple[float, float]:
    """Open interval of exponents ``g`` with ``|x|^g`` (or ``<x>^g``) in ``A_p``."""
    if kind not in ("power_law", "bracket"):
        raise ValueError(f"no closed-form A_p range for weight kind {kind!r}")
    return (-float(d), d * (p - 1.0))


def in_ap(kind: str, gamma: float, p: float, d: int) -> bool:
    lo, hi = ap_range(kind, p, d)
    return lo < gamma < hi


def a_infinity_exponent(w: Weight, d: int, p_max: float = 64.0) -> float | None:
    """Smallest ``p`` on a coarse grid up to ``p_max`` with ``w in A_p``, else None.

    Tabulated weights return None ("A_infinity not verified").
    """
    if not w.radial:
        return None
    for p in np.concatenate([np.linspace(1.05, 2, 20), np.arange(2.5, p_max + 0.5, 0.5)]):
        if in_ap(w.kind, w.gamma, float(p), d):
            return float(p)
    return None


def cone_mass_check(w: Weight, R: float, d: int) -> bool:
    """Whether ``int_R^inf w_0(rho) rho^(d-1) d rho`` diverges (decided in closed form)."""
    if not w.radial:
        raise ValueError("cone mass undecidable for tabulated weights")
    if not R > 0:
        raise ValueError("R must be positive")
    # both profiles behave like rho^gamma at infinity
    return w.gamma >= -d


# ball integrals ---------------------------------------------------------

def _cap_area(u: float, c: float, R: float, d: int) -> float:
    """Area of the sphere ``|x| = c + R - u`` inside ``B(c e_1, R)``, ``0 <= u <= 2 min(c, R)``.

    Written in ``u = R - t`` so that ``1 - cos(theta) = u (2R - u) / (2 rho c)``
    has no cancellation for thin shells far from the origin.
    """
    if d == 1:
        return 1.0
    rho = c + R - u
    if rho <= 0:
        return 0.0
    omc = min(max(u * (2 * R - u) / (2 * rho * c), 0.0), 2.0)
    if d == 2:
        return 4 * rho * math.asin(math.sqrt(omc / 2))
    return 2 * math.pi * rho**2 * omc


def _radial_piece(fn, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    if lo > 0 and hi / lo > 50:
        val, _ = integrate.quad(lambda u: fn(math.exp(u)) * math.exp(u), math.log(lo), math.log(hi),
                                epsabs=0, epsrel=1e-10, limit=200)
        return val
    val, _ = integrate.quad(fn, lo, hi, epsabs=0, epsrel=1e-10, limit=200)
    return val


def ball_integral(w: Weight, c: float, R: float, d: int) -> float:
    """``int_{B(c e_1, R)} w(x) dx`` for a radial weight; ``inf`` if not integrable."""
    if d not in (1, 2, 3):
        raise ValueError("ball integrals are implemented for d in {1, 2, 3}")
    g = w.gamma
    area = sphere_area(d) if d > 1 else 2.0
    total = 0.0
    inner = max(R - c, 0.0)
    if inner > 0:
        if w.kind == "power_law":
            if g <= -d:
                return math.inf
            total += area * inner ** (d + g) / (d + g)
        else:
            prof = lambda r: (1 + r * r) ** (g / 2) * r ** (d - 1)
            total += area * (_radial_piece(prof, 0.0, min(inner, 1.0)) + _radial_piece(prof, min(inner, 1.0), inner))
    lo, hi = abs(R - c), R + c
    if c > 0:
        if w.kind == "power_law" and lo == 0 and g <= -d:
            return math.inf
        prof = w.scalar_profile()
        fn = lambda u: prof(c + R - u) * _cap_area(u, c, R, d)
        if lo == 0 and w.kind == "power_law":
            # ball through the origin: quad's algebraic weight carries the singularity at r = 0
            # the sphere area grows like r^(d-1); the quotient tends to the half-sphere area at r = 0
            half = (1.0, math.pi, 2 * math.pi)[d - 1]
            val, _ = integrate.quad(lambda r: _cap_area(c + R - r, c, R, d) / r ** (d - 1) if r > 0 else half,
                                    0.0, hi, weight="alg", wvar=(g + d - 1, 0.0),
                                    epsabs=0, epsrel=1e-10, limit=200)
            total += val
        elif lo > 0 and hi / lo > 50:
            total += _radial_piece(lambda r: fn(c + R - r), lo, hi)
        else:
            # u = U (1 - cos phi) / 2 smooths the square-root behaviour at both ends
            U = 2 * min(c, R)
            sub = lambda phi: fn(U * (1 - math.cos(phi)) / 2) * U * math.sin(phi) / 2
            val, _ = integrate.quad(sub, 0.0, math.pi, epsabs=0, epsrel=1e-10, limit=200)
            total += val
    return total


@dataclass(frozen=True)
class ApqEstimate:
    value: float
    diverged: bool
    history: list[tuple[int, float]]
    threshold: float = DIVERGENCE_FACTOR


def _ball_quantity(iv: float, iw: float, R: float, p: float, q: float, alpha: float, d: int) -> float:
    if not (math.isfinite(iv) and math.isfinite(iw)):
        return math.inf
    vol = unit_ball_volume(d) * R**d
    pp = p / (p - 1)
    return vol ** (alpha / d - 1) * iv ** (1 / pp) * iw ** (1 / q)


def estimate_apq_constant(v: Weight, w: Weight, p: float, q: float, alpha: float, d: int,
                          decades: int = 4, per_decade: int = 1) -> ApqEstimate:
    """Lower bound for ``[v, w]_{A_{p,q}^alpha}`` over a growing family of balls.

    Stage ``k`` uses radii and center distances on the geometric grid
    ``10^(j/per_decade)``, ``|j| <= k per_decade``, plus balls centered at the
    origin. The divergence flag is raised when the running maximum grows by
    more than ``DIVERGENCE_FACTOR`` from stage ``decades-1`` to ``decades``,
    or when some ball integral is infinite.
    """
    if not (v.radial and w.radial):
        raise NotImplementedError("ball search is implemented for radial weights")
    pp = p / (p - 1)
    vdual = v.power(-pp / p)
    exps = np.arange(-decades * per_decade, decades * per_decade + 1)
    grid = 10.0 ** (exps / per_decade)
    stage_of = np.abs(exps) // per_decade + (np.abs(exps) % per_decade > 0)
    homogeneous = v.kind == "power_law" and w.kind == "power_law"
    cache: dict[float, tuple[float, float]] = {}
    best = np.zeros(decades + 1)
    for i, R in enumerate(grid):
        for j in range(-1, len(grid)):
            c = 0.0 if j < 0 else grid[j]
            stage = max(stage_of[i], 0 if j < 0 else stage_of[j])
            if homogeneous:
                ratio = round(c / R, 12)
                if ratio not in cache:
                    cache[ratio] = (ball_integral(vdual, ratio, 1.0, d), ball_integral(w, ratio, 1.0, d))
                iv, iw = cache[ratio]
                iv *= R ** (d + vdual.gamma)
                iw *= R ** (d + w.gamma)
            else:
                iv, iw = ball_integral(vdual, c, R, d), ball_integral(w, c, R, d)
            val = _ball_quantity(iv, iw, R, p, q, alpha, d)
            best[stage] = max(best[stage], val)
    running = np.maximum.accumulate(best)
    history = [(k, float(running[k])) for k in range(decades + 1)]
    diverged = (not math.isfinite(running[-1])) or running[-1] > DIVERGENCE_FACTOR * running[-2]
    return ApqEstimate(float(running[-1]), bool(diverged), history)
