"""Periodic box grids, grid functions and the analytic test-function corpus.

All transforms use the convention ``f^(xi) = int exp(-2 pi i x.xi) f(x) dx``.
The discrete forward transform is scaled by ``h**d`` so that it approximates
this integral, and the inverse by ``(1/L)**d``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from numpy.polynomial import hermite as _herm

PRESETS = ("smoke", "standard", "zero-moment", "dilation-family")


class ResolutionWarning(UserWarning):
    """A test function is under-resolved or not contained in the box."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box ``[-L/2, L/2)**d``.

    Sample ``j`` along an axis sits at ``x_j = -L/2 + j*h``; the origin is
    therefore the sample with index ``N/2``.
    """

    dim: int
    extent: float
    points_per_axis: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if not self.extent > 0:
            raise ValueError(f"extent must be positive, got {self.extent}")
        n = self.points_per_axis
        if int(n) != n or n % 2 != 0:
            raise ValueError(f"points per axis must be an even integer, got {n}")
        if n < 8:
            raise ValueError(f"points per axis must be at least 8, got {n}")

    @property
    def spacing(self) -> float:
        return self.extent / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def origin_index(self) -> tuple[int, ...]:
        return (self.points_per_axis // 2,) * self.dim

    def axis(self) -> np.ndarray:
        n = self.points_per_axis
        return -self.extent / 2 + self.spacing * np.arange(n)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return tuple(np.meshgrid(*([self.axis()] * self.dim), indexing="ij"))

    def points(self) -> np.ndarray:
        """Sample points as an array of shape ``self.shape + (d,)``."""
        return np.stack(self.coordinates(), axis=-1)

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coordinates()))

    def freq_axis(self) -> np.ndarray:
        """Frequencies ``k/L`` in FFT order, ``k`` in ``[-N/2, N/2)``."""
        return np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    def freq(self, k: Sequence[int] | int) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        half = self.points_per_axis // 2
        if np.any(k < -half) or np.any(k >= half):
            raise ValueError("frequency index outside [-N/2, N/2)")
        return k / self.extent

    def frequencies(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.freq_axis()] * self.dim), indexing="ij"))

    def freq_radius(self) -> np.ndarray:
        return np.sqrt(sum(k**2 for k in self.frequencies()))

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Discrete Fourier transform approximating the integral, FFT order."""
        return self.cell_volume * np.fft.fftn(np.fft.ifftshift(values))

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`forward`, returning samples in natural order."""
        scale = (self.points_per_axis / self.extent) ** self.dim
        return np.fft.fftshift(np.fft.ifftn(spectrum)) * scale

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.dim, self.extent, self.points_per_axis * factor)


@dataclass(frozen=True)
class GridFunction:
    """Complex samples of a function on a :class:`Grid`.

    ``info`` carries diagnostics (zero-mode treatment, resolution flags) and
    does not take part in equality.
    """

    grid: Grid
    values: np.ndarray
    label: str = ""
    source: Any = field(default=None, compare=False)
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def transform(self) -> np.ndarray:
        return self.grid.forward(self.values)

    def with_values(self, values: np.ndarray, label: str | None = None, **info) -> "GridFunction":
        return GridFunction(self.grid, values, self.label if label is None else label,
                            self.source, info)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values + other.values)

    def __mul__(self, c: complex) -> "GridFunction":
        return self.with_values(c * self.values)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))


def _vec(v, d: int) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if a.size == 1:
        return np.full(d, float(a[0]))
    if a.size != d:
        raise ValueError(f"vector of length {a.size} does not match dimension {d}")
    return a


def _hermite_fn(n: int, x: np.ndarray) -> np.ndarray:
    c = np.zeros(n + 1)
    c[n] = 1.0
    return _herm.hermval(math.sqrt(2 * math.pi) * x, c) * np.exp(-math.pi * x**2)


@dataclass(frozen=True)
class TestFunction:
    """Closed-form test function together with its closed-form transform.

    Kinds: ``gaussian`` (center, width), ``hermite`` (order, width, center),
    ``modulated_gaussian`` (center, width, frequency) and ``dilated``
    (base, lam), meaning ``x -> base(lam*x)``.
    """

    __test__ = False  # not a pytest class

    kind: str
    params: tuple

    # constructors ------------------------------------------------------
    @staticmethod
    def gaussian(center=0.0, width: float = 1.0) -> "TestFunction":
        return TestFunction("gaussian", (tuple(np.atleast_1d(center).tolist()), float(width)))

    @staticmethod
    def hermite(order, width: float = 1.0, center=0.0) -> "TestFunction":
        return TestFunction("hermite", (tuple(int(n) for n in np.atleast_1d(order)), float(width),
                                        tuple(np.atleast_1d(center).tolist())))

    @staticmethod
    def modulated_gaussian(center=0.0, width: float = 1.0, frequency=0.0) -> "TestFunction":
        return TestFunction("modulated_gaussian", (tuple(np.atleast_1d(center).tolist()), float(width),
                                                   tuple(np.atleast_1d(frequency).tolist())))

    @staticmethod
    def dilated(base: "TestFunction", lam: float) -> "TestFunction":
        if not lam > 0:
            raise ValueError("dilation factor must be positive")
        return TestFunction("dilated", (base, float(lam)))

    # evaluation --------------------------------------------------------
    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        if self.kind == "gaussian":
            c, w = self.params
            r2 = np.sum((x - _vec(c, d)) ** 2, axis=-1)
            return np.exp(-math.pi * r2 / w**2).astype(complex)
        if self.kind == "hermite":
            order, w, c = self.params
            order = tuple(order) if len(order) == d else tuple(order) + (0,) * (d - len(order))
            y = (x - _vec(c, d)) / w
            out = np.ones(x.shape[:-1], dtype=complex)
            for i, n in enumerate(order):
                out = out * _hermite_fn(n, y[..., i])
            return out
        if self.kind == "modulated_gaussian":
            c, w, k0 = self.params
            r2 = np.sum((x - _vec(c, d)) ** 2, axis=-1)
            phase = np.exp(2j * math.pi * (x @ _vec(k0, d)))
            return np.exp(-math.pi * r2 / w**2) * phase
        if self.kind == "dilated":
            base, lam = self.params
            return base(lam * x)
        raise ValueError(f"unknown test function kind {self.kind!r}")

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        """Closed-form Fourier transform at frequencies of shape ``(..., d)``."""
        xi = np.asarray(xi, dtype=float)
        d = xi.shape[-1]
        if self.kind == "gaussian":
            c, w = self.params
            k2 = np.sum(xi**2, axis=-1)
            return w**d * np.exp(-math.pi * w**2 * k2) * np.exp(-2j * math.pi * (xi @ _vec(c, d)))
        if self.kind == "hermite":
            order, w, c = self.params
            order = tuple(order) if len(order) == d else tuple(order) + (0,) * (d - len(order))
            out = np.exp(-2j * math.pi * (xi @ _vec(c, d)))
            for i, n in enumerate(order):
                out = out * w * (-1j) ** n * _hermite_fn(n, w * xi[..., i])
            return out
        if self.kind == "modulated_gaussian":
            c, w, k0 = self.params
            shifted = xi - _vec(k0, d)
            k2 = np.sum(shifted**2, axis=-1)
            return w**d * np.exp(-math.pi * w**2 * k2) * np.exp(-2j * math.pi * (shifted @ _vec(c, d)))
        if self.kind == "dilated":
            base, lam = self.params
            return lam ** (-d) * base.fourier(xi / lam)
        raise ValueError(f"unknown test function kind {self.kind!r}")

    # descriptors -------------------------------------------------------
    @property
    def width(self) -> float:
        """Effective spatial width used by the resolution precondition."""
        if self.kind == "dilated":
            base, lam = self.params
            return base.width / lam
        w = self.params[1]
        if self.kind == "hermite":
            return w / math.sqrt(1 + max(self.params[0]))
        return w

    @property
    def label(self) -> str:
        if self.kind == "dilated":
            base, lam = self.params
            return f"dilated({base.label},lam={lam:g})"
        if self.kind == "gaussian":
            c, w = self.params
            return f"gaussian(c={_fmt(c)},w={w:g})"
        if self.kind == "hermite":
            n, w, c = self.params
            return f"hermite(n={_fmt(n)},w={w:g},c={_fmt(c)})"
        c, w, k0 = self.params
        return f"modulated_gaussian(c={_fmt(c)},w={w:g},k0={_fmt(k0)})"


def _fmt(v: Iterable) -> str:
    return "(" + ",".join(f"{x:g}" for x in v) + ")"


def build_grid(d: int, L: float, N: int) -> Grid:
    """Build a :class:`Grid`; rejects odd ``N``, ``N < 8`` and ``d`` outside 1..3."""
    return Grid(int(d), float(L), int(N))


def resolution_flags(tf: TestFunction, g: Grid, values: np.ndarray | None = None) -> list[str]:
    """Names of violated sampling preconditions (empty when all hold)."""
    flags = []
    if tf.width < 4 * g.spacing:
        flags.append("under-resolved")
    if values is None:
        values = tf(g.points())
    peak = np.max(np.abs(values))
    if peak > 0:
        edge = 0.0
        for ax in range(g.dim):
            edge = max(edge, float(np.max(np.abs(np.take(values, 0, axis=ax)))))
        if edge > 1e-8 * peak:
            flags.append("not contained in box")
    return flags


def sample(tf: TestFunction, g: Grid, warn: bool = True) -> GridFunction:
    """Pointwise samples of ``tf``; violated preconditions are flagged, not fatal."""
    values = tf(g.points())
    flags = resolution_flags(tf, g, values)
    if flags and warn:
        warnings.warn(f"{tf.label}: {', '.join(flags)}", ResolutionWarning, stacklevel=2)
    return GridFunction(g, values, tf.label, tf, {"flags": tuple(flags)})


def sampled_transform(tf: TestFunction, g: Grid) -> np.ndarray:
    """Closed-form transform sampled on the grid frequencies (FFT order)."""
    return tf.fourier(np.stack(g.frequencies(), axis=-1))


def zero_moment_width(g: Grid) -> float:
    return g.extent / 5


def dilation_base_width(g: Grid) -> float:
    return g.extent / 20


def corpus_functions(g: Grid, preset: str) -> list[TestFunction]:
    """Deterministic test-function lists behind :func:`corpus`."""
    d = g.dim
    e1 = np.zeros(d)
    e1[0] = 1.0
    if preset == "smoke":
        return [TestFunction.gaussian(0.0, 1.0),
                TestFunction.hermite((1,) + (0,) * (d - 1), 1.0),
                TestFunction.modulated_gaussian(0.0, 1.0, 4.0 * e1)]
    if preset == "standard":
        out = []
        for w in (0.5, 1.0, 2.0):
            for c in (0.0, g.extent / 8):
                out.append(TestFunction.gaussian(c * e1, w))
        for n in (1, 2):
            for w in (0.5, 1.0, 2.0):
                out.append(TestFunction.hermite((n,) + (0,) * (d - 1), w))
        return out
    if preset == "zero-moment":
        w = zero_moment_width(g)
        return [TestFunction.modulated_gaussian(0.0, w, (m / w) * e1) for m in (4, 6, 8)]
    if preset == "dilation-family":
        base = TestFunction.gaussian(0.0, dilation_base_width(g))
        return [TestFunction.dilated(base, lam) for lam in (0.25, 0.5, 1.0, 2.0, 4.0)]
    raise ValueError(f"unknown corpus preset {preset!r}; expected one of {PRESETS}")


def corpus(g: Grid, preset: str, warn: bool = False) -> list[GridFunction]:
    """Sample a named corpus preset on ``g``."""
    return [sample(tf, g, warn=warn) for tf in corpus_functions(g, preset)]


def zero_mode_fraction(gf: GridFunction) -> float:
    """Fourier magnitude at frequency zero relative to the spectral peak."""
    spec = np.abs(gf.transform())
    return float(spec.flat[0] / np.max(spec))


# plain-text interfaces -------------------------------------------------

def _parse_vector(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def load_corpus_config(path: str) -> dict[str, list[TestFunction]]:
    """Read corpus presets from a plain-text file.

    One function per line: ``<preset> <kind> key=value ...``. Vectors are
    comma separated, ``#`` starts a comment. ``dilated`` lines wrap a
    gaussian: ``name dilated width=1 center=0 lam=2``.
    """
    presets: dict[str, list[TestFunction]] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected '<preset> <kind> key=value ...'")
            name, kind, rest = parts[0], parts[1], parts[2:]
            kv = {}
            for item in rest:
                if "=" not in item:
                    raise ValueError(f"{path}:{lineno}: malformed parameter {item!r}")
                k, v = item.split("=", 1)
                kv[k] = v
            center = _parse_vector(kv.get("center", "0"))
            width = float(kv.get("width", "1"))
            if kind == "gaussian":
                tf = TestFunction.gaussian(center, width)
            elif kind == "hermite":
                tf = TestFunction.hermite(tuple(int(float(x)) for x in kv.get("order", "0").split(",")),
                                          width, center)
            elif kind == "modulated_gaussian":
                tf = TestFunction.modulated_gaussian(center, width, _parse_vector(kv.get("frequency", "0")))
            elif kind == "dilated":
                tf = TestFunction.dilated(TestFunction.gaussian(center, width), float(kv.get("lam", "1")))
            else:
                raise ValueError(f"{path}:{lineno}: unknown kind {kind!r}")
            presets.setdefault(name, []).append(tf)
    return presets


def export_csv(gf: GridFunction, path: str) -> None:
    """Write ``index, x (one column per axis), Re, Im`` rows."""
    pts = gf.grid.points().reshape(-1, gf.grid.dim)
    vals = gf.flat
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index"] + [f"x{i}" for i in range(gf.grid.dim)] + ["re", "im"])
        for i, (p, v) in enumerate(zip(pts, vals)):
            w.writerow([i] + [f"{c:.12g}" for c in p] + [f"{v.real:.12g}", f"{v.imag:.12g}"])
