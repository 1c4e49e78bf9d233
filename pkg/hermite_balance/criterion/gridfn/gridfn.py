# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Shared numerical substrate.

Lattice functions with product-trapezoid quadrature, finite differences,
cubic resampling, rate fitting, smooth cutoffs and counter-based random
streams. Every other criterion unit builds on these.
"""

import hashlib
import logging
import multiprocessing
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from hermite_balance.exceptions import GridTooCoarse, InvalidGrid, NonPositiveData

logger = logging.getLogger(__name__)

# points trimmed from each side of a differentiated grid before taking norms
DERIVATIVE_BUFFER = 2


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled on a uniform lattice over the box [lo, hi]."""

    lo: tuple
    hi: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))

        if len(lo) != len(hi) or values.ndim != len(lo):
            raise InvalidGrid(
                f"box of dimension {len(lo)}/{len(hi)} does not match values of shape {values.shape}"
            )
        if any(n < 2 for n in values.shape):
            raise InvalidGrid(f"every axis needs at least 2 points, got shape {values.shape}")
        if any(not h > l for l, h in zip(lo, hi)):
            raise InvalidGrid(f"empty box lo={lo} hi={hi}")
        if not np.all(np.isfinite(values)):
            raise InvalidGrid("grid values must be finite")

        values.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, fn, lo, hi, shape):
        """Sample ``fn(*coords)`` (coords in ``ij`` meshgrid order) on the lattice."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        shape = tuple(int(n) for n in np.atleast_1d(shape))
        if len(shape) != len(lo):
            raise InvalidGrid(f"shape {shape} does not match box dimension {len(lo)}")
        axes = [np.linspace(l, h, n) for l, h, n in zip(lo, hi, shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        values = np.broadcast_to(np.asarray(fn(*mesh), dtype=float), shape)
        return cls(tuple(lo), tuple(hi), values)

    def with_values(self, values):
        return GridFunction(self.lo, self.hi, np.asarray(values, dtype=float).reshape(self.shape))

    @property
    def dim(self):
        return len(self.lo)

    @property
    def shape(self):
        return self.values.shape

    @property
    def spacing(self):
        return tuple((h - l) / (n - 1) for l, h, n in zip(self.lo, self.hi, self.shape))

    @property
    def volume(self):
        return float(np.prod([h - l for l, h in zip(self.lo, self.hi)]))

    @property
    def axes(self):
        return [np.linspace(l, h, n) for l, h, n in zip(self.lo, self.hi, self.shape)]

    def mesh(self):
        return np.meshgrid(*self.axes, indexing="ij")

    def points(self):
        """Lattice nodes as an array of shape (G, d), row-major."""
        return np.stack([m.ravel() for m in self.mesh()], axis=1)

    @cached_property
    def weights(self):
        per_axis = []
        for n, h in zip(self.shape, self.spacing):
            w = np.full(n, h)
            w[0] = w[-1] = h / 2
            per_axis.append(w)
        out = per_axis[0]
        for w in per_axis[1:]:
            out = np.multiply.outer(out, w)
        out.setflags(write=False)
        return out

    def integrate(self, values=None):
        values = self.values if values is None else values
        return float(np.sum(self.weights * values))

    def derivative(self, alpha):
        """Partial derivative of multi-index ``alpha`` by second-order differences."""
        alpha = tuple(int(a) for a in np.atleast_1d(alpha))
        if len(alpha) != self.dim:
            raise InvalidGrid(f"multi-index {alpha} does not match dimension {self.dim}")
        values = self.values
        for axis, (order, h, n) in enumerate(zip(alpha, self.spacing, self.shape)):
            if order == 0:
                continue
            if n < 2 * order + 3:
                raise GridTooCoarse(
                    f"derivative of order {order} needs {2 * order + 3} points on axis {axis}, got {n}"
                )
            values = _axis_derivative(values, axis, order, h)
        return self.with_values(values)

    def crop(self, pad):
        """Drop ``pad`` lattice points from both ends of every axis."""
        pads = np.broadcast_to(np.atleast_1d(pad), (self.dim,))
        if all(p == 0 for p in pads):
            return self
        if any(2 * p >= n - 1 for p, n in zip(pads, self.shape)):
            raise InvalidGrid(f"cannot crop {tuple(pads)} points from shape {self.shape}")
        index = tuple(slice(int(p), n - int(p)) for p, n in zip(pads, self.shape))
        lo = tuple(l + int(p) * h for l, p, h in zip(self.lo, pads, self.spacing))
        hi = tuple(u - int(p) * h for u, p, h in zip(self.hi, pads, self.spacing))
        return GridFunction(lo, hi, self.values[index])

    def interpolate(self, points):
        """Cubic interpolation at ``points``; zero outside the box."""
        points = np.asarray(points, dtype=float)
        if self.dim == 1:
            x = points.reshape(-1)
            if self.shape[0] < 4:
                out = np.interp(x, self.axes[0], self.values, left=0.0, right=0.0)
            else:
                spline = CubicSpline(self.axes[0], self.values, extrapolate=False)
                out = np.nan_to_num(spline(x), nan=0.0)
            return out.reshape(points.shape) if points.ndim <= 1 else out
        points = points.reshape(-1, self.dim)
        method = "cubic" if min(self.shape) >= 4 else "linear"
        interpolator = RegularGridInterpolator(
            self.axes, self.values, method=method, bounds_error=False, fill_value=0.0
        )
        return interpolator(points)

    def resample(self, lo, hi, shape):
        target = GridFunction.from_function(lambda *c: np.zeros_like(c[0]), lo, hi, shape)
        return target.with_values(self.interpolate(target.points()).reshape(target.shape))


def _axis_derivative(values, axis, order, h):
    v = np.moveaxis(values, axis, 0)
    for _ in range(order // 2):
        out = np.empty_like(v)
        out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
        out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h**2
        out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2
        v = out
    if order % 2:
        v = np.gradient(v, h, axis=0, edge_order=2)
    return np.moveaxis(v, 0, axis)


def multi_indices(dim, max_order):
    """All multi-indices of length ``dim`` with total order <= max_order."""
    if dim == 1:
        return [(j,) for j in range(max_order + 1)]
    out = []
    for first in range(max_order + 1):
        for rest in multi_indices(dim - 1, max_order - first):
            out.append((first,) + rest)
    return out


# smooth cutoffs ---------------------------------------------------------------


def _sigma(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """S(u) = s(u)/(s(u)+s(1-u)) with s(u) = exp(-1/u); 0 below 0, 1 above 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    a = _sigma(u)
    b = _sigma(1.0 - u)
    return a / (a + b)


def smooth_step_derivative(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    v = u[inside]
    a = np.exp(-1.0 / v)
    b = np.exp(-1.0 / (1.0 - v))
    da = a / v**2
    db = b / (1.0 - v) ** 2
    out[inside] = (da * b + a * db) / (a + b) ** 2
    return out


def plateau(r, inner, outer):
    """1 for r <= inner, 0 for r >= outer, smooth and monotone in between."""
    return 1.0 - smooth_step((np.asarray(r, dtype=float) - inner) / (outer - inner))


def plateau_derivative(r, inner, outer):
    return -smooth_step_derivative((np.asarray(r, dtype=float) - inner) / (outer - inner)) / (outer - inner)


# rate fitting -------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    """Power and power-times-log fits of y against x.

    ``slope`` is the plain log-log slope. ``exponent`` and ``log_exponent``
    come from the joint model log y = c + p log x + r log|log x|. Confidence
    half-widths are leave-one-out jackknife estimates.
    """

    x: np.ndarray
    y: np.ndarray
    slope: float
    slope_ci: float
    exponent: float
    exponent_ci: float
    log_exponent: float
    log_exponent_ci: float
    residual: float

    def as_dict(self):
        return {
            "x": [float(v) for v in self.x],
            "y": [float(v) for v in self.y],
            "slope": self.slope,
            "slope_ci": self.slope_ci,
            "exponent": self.exponent,
            "exponent_ci": self.exponent_ci,
            "log_exponent": self.log_exponent,
            "log_exponent_ci": self.log_exponent_ci,
            "residual": self.residual,
        }


def _design(x, with_log):
    cols = [np.ones_like(x), np.log(x)]
    if with_log:
        cols.append(np.log(np.abs(np.log(x))))
    return np.stack(cols, axis=1)


def _solve(x, logy, with_log):
    coef, *_ = np.linalg.lstsq(_design(x, with_log), logy, rcond=None)
    return coef


def _jackknife(x, logy, with_log):
    n = len(x)
    estimates = np.array(
        [_solve(np.delete(x, i), np.delete(logy, i), with_log) for i in range(n)]
    )
    spread = estimates - estimates.mean(axis=0)
    return np.sqrt((n - 1) / n * np.sum(spread**2, axis=0))


def fit_rate(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"abscissae and ordinates differ in length: {x.size} vs {y.size}")
    if x.size < 4:
        raise ValueError(f"rate fits need at least 4 points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise NonPositiveData("rate fits need strictly positive finite data")
    if np.any(x == 1.0):
        raise NonPositiveData("x = 1 has no log-power coordinate")

    logy = np.log(y)
    plain = _solve(x, logy, with_log=False)
    joint = _solve(x, logy, with_log=True)
    plain_ci = _jackknife(x, logy, with_log=False)
    joint_ci = _jackknife(x, logy, with_log=True)
    residual = float(np.sqrt(np.mean((_design(x, True) @ joint - logy) ** 2)))
    logger.debug("fit_rate slope=%.4f exponent=%.4f log=%.4f", plain[1], joint[1], joint[2])
    return RateFit(
        x=x,
        y=y,
        slope=float(plain[1]),
        slope_ci=float(plain_ci[1]),
        exponent=float(joint[1]),
        exponent_ci=float(joint_ci[1]),
        log_exponent=float(joint[2]),
        log_exponent_ci=float(joint_ci[2]),
        residual=residual,
    )


def log_slope(x, y):
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# random streams -----------------------------------------------------------------


def _normalize_key(key):
    if isinstance(key, (tuple, list)):
        return tuple(_normalize_key(k) for k in key)
    if isinstance(key, (np.integer, int)):
        return int(key)
    if isinstance(key, (np.floating, float)):
        return float(key)
    return str(key)


def rng_stream(seed, key=()):
    """Philox generator keyed by a digest of (seed, key).

    The same (seed, key) always yields the same draws, whichever worker or
    process asks for it.
    """
    material = repr((int(seed), _normalize_key(key))).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return np.random.Generator(np.random.Philox(key=int.from_bytes(digest[:16], "little")))


def split_blocks(total, block_size):
    """Sizes of consecutive fixed-size blocks covering ``total`` items."""
    total = int(total)
    block_size = max(1, int(block_size))
    sizes = [block_size] * (total // block_size)
    if total % block_size:
        sizes.append(total % block_size)
    return sizes


def map_blocks(func, tasks, workers=1):
    """Apply ``func`` to every task, in order, optionally on a process pool."""
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) < 2:
        return [func(task) for task in tasks]
    with multiprocessing.Pool(min(int(workers), len(tasks))) as pool:
        return pool.map(func, tasks)
