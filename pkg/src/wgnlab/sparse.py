"""Shifted dyadic lattices, sparse families and the maximal operators built on them.

Everything is indexed in cell units: grid sample ``j`` owns the cell
``[j, j+1)`` along each axis, whose center ``j + 1/2`` decides membership.
A cube of side ``l`` cells (``l`` a power of two) in the lattice with shift
``t in {0, 1/3, 2/3}^d`` starts at ``l (m + (-1)^k t)``, ``l = 2^k``. Since
``l t`` is never a half integer, no cell center lies on a cube face, each
level tiles the box exactly and every cube is the disjoint union of its
``2^d`` children. The input vanishes outside the box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridFunction, build_grid
from .norms import weighted_norm
from .spectral import MultiplierSymbol, riesz_potential_direct
from .special import weak_type_polynomial
from .weights import power_law

DILATION = 5.0  # Q* has side 5 sqrt(d) times the side of Q


def _pow2_at_least(n: float) -> int:
    return 1 << max(0, math.ceil(math.log2(n)))


@dataclass(frozen=True)
class Cube:
    """Lattice cube: side ``side`` cells, multi-index ``index``, lattice shift numerators ``shift`` (thirds)."""

    side: int
    index: tuple[int, ...]
    shift: tuple[int, ...]

    @property
    def start(self) -> np.ndarray:
        """Lower corner in cell units."""
        sign = -1 if int(math.log2(self.side)) % 2 else 1
        return self.side * (np.array(self.index) + sign * np.array(self.shift) / 3.0)

    @property
    def center(self) -> np.ndarray:
        return self.start + self.side / 2

    def volume(self, grid: Grid) -> float:
        return (self.side * grid.spacing) ** grid.dim

    def physical_bounds(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        lo = -grid.extent / 2 + (self.start - 0.5) * grid.spacing
        return lo, lo + self.side * grid.spacing


@dataclass
class DyadicLattice:
    """One of the ``3^d`` shifted dyadic lattices, restricted to a grid box."""

    grid: Grid
    shift: tuple[int, ...]
    sides: tuple[int, ...]
    _labels: dict = field(default_factory=dict, repr=False, compare=False)

    def sign(self, side: int) -> int:
        return -1 if int(math.log2(side)) % 2 else 1

    def labels(self, side: int) -> np.ndarray:
        """Integer multi-index of the cube containing each cell, shape ``grid.shape + (d,)``."""
        if side not in self._labels:
            n, d = self.grid.points_per_axis, self.grid.dim
            y = np.arange(n) + 0.5
            t = np.array(self.shift) / 3.0
            per_axis = [np.floor(y / side - self.sign(side) * t[i]).astype(np.int64) for i in range(d)]
            lab = np.stack(np.meshgrid(*per_axis, indexing="ij"), axis=-1)
            self._labels[side] = lab
        return self._labels[side]

    def flat_labels(self, side: int) -> np.ndarray:
        """Labels packed into one nonnegative integer per cell (flattened cell order)."""
        lab = self.labels(side).reshape(-1, self.grid.dim)
        lo = lab.min(axis=0)
        dims = lab.max(axis=0) - lo + 1
        return np.ravel_multi_index(tuple((lab - lo).T), tuple(dims))

    def cube_of(self, side: int, cell: tuple[int, ...]) -> Cube:
        return Cube(side, tuple(int(v) for v in self.labels(side)[cell]), self.shift)

    def cube_cells(self, cube: Cube) -> np.ndarray:
        """Flat indices of the box cells inside ``cube``."""
        lab = self.labels(cube.side).reshape(-1, self.grid.dim)
        return np.flatnonzero(np.all(lab == np.array(cube.index), axis=1))

    def cube_averages(self, values: np.ndarray, side: int) -> np.ndarray:
        """Per-cell average of ``values`` over the containing cube (zero outside the box)."""
        ids = self.flat_labels(side)
        sums = np.bincount(ids, weights=np.asarray(values, dtype=float).reshape(-1))
        return (sums[ids] / side**self.grid.dim).reshape(self.grid.shape)

    def top_cubes(self) -> list[Cube]:
        side = self.sides[-1]
        lab = np.unique(self.labels(side).reshape(-1, self.grid.dim), axis=0)
        return [Cube(side, tuple(int(v) for v in m), self.shift) for m in lab]


def build_lattices(d: int, box: Grid, min_side: int = 4, coarse_factor: int = 4) -> list[DyadicLattice]:
    """The ``3^d`` one-third-shifted lattices on ``box``.

    Levels run from ``min_side`` cells up to the first power of two that is
    at least ``coarse_factor`` times the box, so every cell sits in a cube
    that also contains the whole support of any box function.
    """
    if d != box.dim:
        raise ValueError("dimension mismatch between d and box")
    if d > 3:
        raise ValueError("lattices are built for d <= 3")
    if min_side < 1 or min_side & (min_side - 1):
        raise ValueError("min_side must be a power of two")
    top = _pow2_at_least(coarse_factor * box.points_per_axis)
    sides = tuple(1 << k for k in range(int(math.log2(min_side)), int(math.log2(top)) + 1))
    return [DyadicLattice(box, shift, sides) for shift in itertools.product(range(3), repeat=d)]


# sparse families -------------------------------------------------------

@dataclass(frozen=True)
class SparseMember:
    cube: Cube
    cells: np.ndarray
    e_cells: np.ndarray
    e_volume: int  # |E(Q)| in cell units, including the part outside the box


@dataclass(frozen=True)
class SparseFamily:
    members: list[SparseMember]
    eta: float
    lattice: DyadicLattice | None = None
    ratio: float = 2.0


def build_sparse_family(f: GridFunction, lattice: DyadicLattice, ratio: float = 2.0) -> SparseFamily:
    """Stopping-time family: top cubes, then maximal descendants with average above ``ratio`` times the parent's."""
    if not ratio > 1:
        raise ValueError("ratio must exceed 1")
    vals = np.asarray(f.values)
    if np.any(np.abs(vals.imag) > 0) or np.any(vals.real < 0):
        raise ValueError("build_sparse_family needs a nonnegative input; pass |f|")
    fv = vals.real.reshape(-1)
    d = lattice.grid.dim
    flat = {s: lattice.flat_labels(s) for s in lattice.sides}
    members: list[SparseMember] = []
    stack = lattice.top_cubes()
    while stack:
        P = stack.pop()
        cells = lattice.cube_cells(P)
        avg = fv[cells].sum() / P.side**d
        covered = np.zeros(cells.size, dtype=bool)
        children: list[Cube] = []
        child_volume = 0
        for side in reversed([s for s in lattice.sides if s < P.side]):
            free = ~covered
            if not free.any():
                break
            ids, inv = np.unique(flat[side][cells[free]], return_inverse=True)
            sums = np.bincount(inv, weights=fv[cells[free]])
            hit = sums / side**d > ratio * avg
            if not hit.any():
                continue
            sel = hit[inv]
            idx = np.flatnonzero(free)[sel]
            covered[idx] = True
            lab = lattice.labels(side).reshape(-1, d)
            for k in np.flatnonzero(hit):
                first = cells[np.flatnonzero(free)[inv == k][0]]
                children.append(Cube(side, tuple(int(v) for v in lab[first]), lattice.shift))
                child_volume += side**d
        members.append(SparseMember(P, cells, cells[~covered], P.side**d - child_volume))
        stack.extend(children)
    return SparseFamily(members, 1 - 1 / ratio, lattice, ratio)


@dataclass(frozen=True)
class SparsityCheck:
    passed: bool
    worst_fraction: float
    disjoint: bool


def check_sparsity(S: SparseFamily, eta: float | None = None) -> SparsityCheck:
    """Exact check of ``|E(Q)| >= eta |Q|`` and pairwise disjointness of the ``E(Q)``."""
    eta = S.eta if eta is None else eta
    if not S.members:
        return SparsityCheck(True, 1.0, True)
    d = S.lattice.grid.dim if S.lattice is not None else len(S.members[0].cube.index)
    fracs = [m.e_volume / m.cube.side**d for m in S.members]
    size = S.lattice.grid.size if S.lattice is not None else 1 + max(int(m.e_cells.max(initial=0)) for m in S.members)
    count = np.zeros(size, dtype=np.int64)
    for m in S.members:
        np.add.at(count, m.e_cells, 1)
    disjoint = bool(count.max() <= 1)
    worst = float(min(fracs))
    return SparsityCheck(disjoint and worst >= eta, worst, disjoint)


def sparse_operator(S: SparseFamily, f: GridFunction, r: float = 1.0, alpha: float = 0.0) -> np.ndarray:
    """``sum_Q chi_Q |Q|^(alpha/d) (avg_Q |f|^r)^(1/r)`` on every grid point."""
    g = f.grid
    fr = np.abs(f.values).reshape(-1) ** r
    out = np.zeros(g.size)
    for m in S.members:
        avg = fr[m.cells].sum() / m.cube.side**g.dim
        out[m.cells] += (m.cube.side * g.spacing) ** alpha * avg ** (1 / r)
    return out.reshape(g.shape)


def apply_sparse(S: SparseFamily, f: GridFunction, r: float = 1.0, alpha: float = 0.0,
                 x: tuple[int, ...] | None = None):
    """Sparse operator at grid index ``x`` (or everywhere when ``x`` is None)."""
    if r < 1 or alpha < 0:
        raise ValueError("need r >= 1 and alpha >= 0")
    if x is None:
        return sparse_operator(S, f, r, alpha)
    g = f.grid
    flat = int(np.ravel_multi_index(tuple(x), g.shape))
    fr = np.abs(f.values).reshape(-1) ** r
    total = 0.0
    for m in S.members:
        if np.any(m.cells == flat):
            total += (m.cube.side * g.spacing) ** alpha * (fr[m.cells].sum() / m.cube.side**g.dim) ** (1 / r)
    return total


def dyadic_operator(f: GridFunction, lattice: DyadicLattice, alpha: float) -> np.ndarray:
    """``sum_{Q in D} chi_Q |Q|^(alpha/d) avg_Q |f|`` over all levels of one lattice."""
    a = np.abs(f.values)
    return sum((s * f.grid.spacing) ** alpha * lattice.cube_averages(a, s) for s in lattice.sides)


def maximal_operator(f: GridFunction, lattices: list[DyadicLattice] | None = None) -> np.ndarray:
    """Max of cube averages of ``|f|`` over all searched cubes containing each point."""
    if lattices is None:
        lattices = build_lattices(f.grid.dim, f.grid, min_side=1)
    a = np.abs(f.values)
    out = np.zeros(f.grid.shape)
    for lat in lattices:
        for s in lat.sides:
            np.maximum(out, lat.cube_averages(a, s), out=out)
    return out


def maximal_function(f: GridFunction, x: tuple[int, ...]) -> float:
    return float(maximal_operator(f)[tuple(x)])


# grand maximal operator --------------------------------------------------

def _padded(f: GridFunction) -> tuple[Grid, np.ndarray]:
    g = f.grid
    n = g.points_per_axis
    if n % 2:
        raise ValueError("padding needs an even number of points per axis")
    big = build_grid(g.dim, 2 * g.extent, 2 * n)
    vals = np.zeros(big.shape, dtype=complex)
    vals[tuple(slice(n // 2, n // 2 + n) for _ in range(g.dim))] = f.values
    return big, vals


def _sample_cells(cube: Cube, n: int) -> list[tuple[int, ...]]:
    """Box cells at the corners and the center of ``cube`` (clipped to the box)."""
    start = np.ceil(cube.start - 0.5).astype(int)
    lo = np.clip(start, 0, n - 1)
    hi = np.clip(start + cube.side - 1, 0, n - 1)
    ctr = np.clip(np.floor(cube.center - 0.5).astype(int), 0, n - 1)
    pts = {tuple(int(c) for c in corner) for corner in itertools.product(*zip(lo, hi))}
    pts.add(tuple(int(c) for c in ctr))
    return sorted(pts)


def _oscillation(vals: np.ndarray) -> float:
    v = np.asarray(vals)
    return float(np.max(np.abs(v[:, None] - v[None, :])))


def grand_maximal_operator(f: GridFunction, taus, points, family: str = "riesz",
                           min_side: int = 4, lattices: list[DyadicLattice] | None = None) -> np.ndarray:
    """``M_tau f`` at the given grid indices for each ``tau``; shape ``(len(points), len(taus))``.

    For every searched cube ``Q`` containing a point, ``T = D^(i tau)`` or
    ``J^(i tau)`` is applied to ``f`` masked outside ``Q*`` on a zero-padded
    grid, and the oscillation is taken over the corner and center cells of ``Q``.
    """
    g = f.grid
    n, d = g.points_per_axis, g.dim
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if lattices is None:
        lattices = build_lattices(d, g, min_side=min_side)
    big, base = _padded(f)
    off = n // 2
    rad = big.freq_radius()
    symbols = [MultiplierSymbol(family, 1j * t).values(rad) for t in taus]
    centers = np.stack(np.meshgrid(*([np.arange(n) + 0.5] * d), indexing="ij"), axis=-1)
    cache: dict[Cube, np.ndarray] = {}
    out = np.zeros((len(points), len(taus)))
    for pi, x in enumerate(points):
        x = tuple(int(v) for v in x)
        for lat in lattices:
            for side in lat.sides:
                if side > n:
                    break
                Q = lat.cube_of(side, x)
                if Q not in cache:
                    half = DILATION * math.sqrt(d) * side / 2
                    outside = np.any(np.abs(centers - Q.center) >= half, axis=-1)
                    vals = np.zeros_like(base)
                    inner = tuple(slice(off, off + n) for _ in range(d))
                    vals[inner] = np.where(outside, f.values, 0)
                    if not np.any(vals):
                        cache[Q] = np.zeros(len(taus))
                        continue
                    spec = big.forward(vals)
                    cells = [tuple(c + off for c in s) for s in _sample_cells(Q, n)]
                    idx = tuple(np.array(cells).T)
                    cache[Q] = np.array([_oscillation(big.inverse(spec * sym)[idx]) for sym in symbols])
                out[pi] = np.maximum(out[pi], cache[Q])
    return out


def grand_maximal_tau(f: GridFunction, tau: float, x: tuple[int, ...], family: str = "riesz") -> float:
    return float(grand_maximal_operator(f, [tau], [x], family)[0, 0])


@dataclass(frozen=True)
class MaximalBoundFit:
    taus: np.ndarray
    constants: np.ndarray  # per tau: max_x M_tau f / ((1+tau) M f)
    constant: float


def fit_maximal_bound(fs: list[GridFunction], taus, n_points: int = 100, family: str = "riesz",
                      seed: int = 0) -> MaximalBoundFit:
    """Fit ``C`` in ``M_tau f <= C (1+|tau|) M f`` over random sample points of each input."""
    rng = np.random.default_rng(seed)
    taus = np.asarray(taus, dtype=float)
    per_tau = np.zeros(len(taus))
    for f in fs:
        g = f.grid
        pts = [tuple(rng.integers(0, g.points_per_axis, g.dim)) for _ in range(n_points)]
        mt = grand_maximal_operator(f, taus, pts, family)
        mf = maximal_operator(f)[tuple(np.array(pts).T)]
        ratio = mt / ((1 + np.abs(taus))[None, :] * mf[:, None])
        per_tau = np.maximum(per_tau, ratio.max(axis=0))
    return MaximalBoundFit(taus, per_tau, float(per_tau.max()))


# domination of the Riesz potential ----------------------------------------

@dataclass(frozen=True)
class DominationReport:
    potential: np.ndarray
    dyadic: list[np.ndarray]
    dyadic_sum: np.ndarray
    sparse_sum: np.ndarray
    lower_constant: float   # max_j max_x A_{D^j} f / I_alpha f
    upper_constant: float   # max_x I_alpha f / sum_j A_{D^j} f
    sparse_constant: float  # max_x sum_j A_{D^j} f / sum_j A_{S^j} f
    worst_point: tuple[int, ...]


def _max_ratio(num: np.ndarray, den: np.ndarray) -> tuple[float, tuple[int, ...]]:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if not np.any(num > 0):
        return 0.0, (0,) * num.ndim
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(num > 0, num / den, 0.0)
    k = np.unravel_index(int(np.argmax(r)), r.shape)
    return float(r[k]), tuple(int(v) for v in k)


def domination_report(f: GridFunction, alpha: float, ratio: float = 2.0,
                      lattices: list[DyadicLattice] | None = None) -> DominationReport:
    """Compare ``I_alpha f`` with the dyadic and sparse fractional operators at every grid point."""
    g = f.grid
    vals = np.asarray(f.values)
    if np.any(np.abs(vals.imag) > 0) or np.any(vals.real < 0):
        raise ValueError("domination_report needs a nonnegative input")
    if lattices is None:
        lattices = build_lattices(g.dim, g)
    pot = riesz_potential_direct(f, alpha, origin="lattice").values.real
    dyad = [dyadic_operator(f, lat, alpha) for lat in lattices]
    dsum = sum(dyad)
    ssum = sum(sparse_operator(build_sparse_family(f, lat, ratio), f, 1.0, alpha) for lat in lattices)
    lower = 0.0
    for a in dyad:
        lower = max(lower, _max_ratio(a, pot)[0])
    upper, worst = _max_ratio(pot, dsum)
    sparse_c, _ = _max_ratio(dsum, ssum)
    return DominationReport(pot, dyad, dsum, ssum, lower, upper, sparse_c, worst)


def indicator_ball(grid: Grid, center, radius: float) -> GridFunction:
    """Indicator of a closed ball sampled on ``grid``."""
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    r = np.linalg.norm(grid.points() - c, axis=-1)
    return GridFunction(grid, (r <= radius).astype(float), f"1_B({radius:g})")


# weighted imaginary powers -----------------------------------------------

@dataclass(frozen=True)
class GrowthScan:
    taus: np.ndarray
    ratios: np.ndarray       # ||D^(i tau) f||_{L^p(w)} / ||f||_{L^p(w)}
    normalized: np.ndarray   # ratios / polynomial(tau)
    fitted_slope: float      # least-squares slope of log(normalized) against log(1+tau)


def imaginary_power_growth(f: GridFunction, a: float, taus, p: float = 2.0,
                           polynomial=weak_type_polynomial) -> GrowthScan:
    """Ratio of ``D^(i tau) f`` and ``f`` in ``L^p(|x|^a)`` along ``taus``, normalized by ``polynomial(tau, d)``."""
    from .spectral import apply_multiplier, riesz

    w = power_law(a)
    taus = np.asarray(taus, dtype=float)
    base = weighted_norm(f, w, p)
    ratios = np.array([weighted_norm(apply_multiplier(f, riesz(1j * t)), w, p) / base for t in taus])
    poly = np.array([polynomial(t, f.grid.dim) for t in taus])
    norm = ratios / poly
    slope = float(np.polyfit(np.log1p(taus), np.log(norm), 1)[0])
    return GrowthScan(taus, ratios, norm, slope)
