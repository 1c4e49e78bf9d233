# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Hermite functions, the dyadic blocks H_n^a and their verification.

Hermite functions are generated by the normalized three-term recurrence
with a running log-scale, so indices in the tens of thousands can be
evaluated far outside the oscillation region without underflow. All
sums over Hermite indices stream: memory stays proportional to the grid.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from hermite_balance.criterion.gridfn import DERIVATIVE_BUFFER, GridFunction, plateau, smooth_step
from hermite_balance.exceptions import GridTooCoarse, LevelTooLarge

logger = logging.getLogger(__name__)

RESCALE = 1e150
LOG_RESCALE = np.log(RESCALE)
DEFAULT_LEVELS = {1: 6, 2: 3}
MAX_LEVELS = {1: 7, 2: 3}


def _unscale(mantissa, log_scale):
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        return np.sign(mantissa) * np.exp(np.log(np.abs(mantissa)) + log_scale)


def iter_hermite(t, n_max):
    """Yield ``(n, h_n(t))`` for n = 0..n_max."""
    t = np.asarray(t, dtype=float)
    log_scale = -0.5 * t**2 - 0.25 * np.log(np.pi)
    prev = np.zeros_like(t)
    cur = np.ones_like(t)
    yield 0, _unscale(cur, log_scale)
    for n in range(n_max):
        nxt = t * np.sqrt(2.0 / (n + 1)) * cur - np.sqrt(n / (n + 1.0)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > RESCALE
        if np.any(big):
            cur = np.where(big, cur / RESCALE, cur)
            prev = np.where(big, prev / RESCALE, prev)
            log_scale = log_scale + big * LOG_RESCALE
        yield n + 1, _unscale(cur, log_scale)


def iter_hermite_derivative(t, n_max, order=0):
    """Yield ``(n, d^order/dt^order h_n(t))`` for n = 0..n_max, order <= 2."""
    t = np.asarray(t, dtype=float)
    if order == 0:
        yield from iter_hermite(t, n_max)
    elif order == 1:
        stream = iter_hermite(t, n_max + 1)
        prev = np.zeros_like(t)
        _, cur = next(stream)
        for n_next, nxt in stream:
            n = n_next - 1
            yield n, np.sqrt(n / 2.0) * prev - np.sqrt((n + 1) / 2.0) * nxt
            prev, cur = cur, nxt
    elif order == 2:
        for n, h in iter_hermite(t, n_max):
            yield n, (t**2 - (2 * n + 1)) * h
    else:
        raise ValueError(f"derivative order {order} is not supported")


def hermite_h(n, t):
    """The L2-normalized Hermite function h_n at ``t``."""
    if n < 0:
        raise ValueError(f"Hermite index must be nonnegative, got {n}")
    for _, h in iter_hermite(t, n):
        pass
    return h


def hermite_table(t, n_max):
    """Rows h_0..h_{n_max} evaluated at ``t``; only for small n_max * len(t)."""
    return np.array([h for _, h in iter_hermite(t, n_max)])


def orthonormality_defect(n_max=64, nodes=129):
    """max |G - I| for the Gram matrix of h_0..h_{n_max} by Gauss-Hermite quadrature."""
    x, w = hermgauss(nodes)
    table = hermite_table(x, n_max)
    gram = (table * (w * np.exp(x**2))) @ table.T
    return float(np.max(np.abs(gram - np.eye(n_max + 1))))


# cutoff ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutoffA:
    """a(t) = S((t - 1/4)/(3/4)) on [1/4, 1], 1 - a(t/4) on [1, 4], 0 elsewhere."""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        rising = smooth_step((t - 0.25) / 0.75)
        falling = 1.0 - smooth_step((t / 4.0 - 0.25) / 0.75)
        out = np.where(t <= 1.0, rising, falling)
        return np.where((t <= 0.25) | (t >= 4.0), 0.0, out)

    def pairing_defect(self, samples=2001):
        """max |a(t) + a(4t) - 1| on [1/4, 1]."""
        t = np.linspace(0.25, 1.0, samples)
        return float(np.max(np.abs(self(t) + self(4 * t) - 1.0)))

    def partition_defect(self, n_levels, samples=4001):
        """max |sum_{n<=N} a(t/4^n) - 1| on [1, 4^N]."""
        t = np.logspace(0.0, n_levels * np.log10(4.0), samples)
        total = sum(self(t / 4.0**n) for n in range(n_levels + 1))
        return float(np.max(np.abs(total - 1.0)))

    def norm(self, l, samples=20001):
        """||a||_l = sum_{i<=l} sup |a^(i)| from differences on [0, 5]."""
        f = GridFunction.from_function(self, 0.0, 5.0, samples)
        total = 0.0
        for i in range(l + 1):
            d = f.derivative((i,)) if i else f
            total += float(np.max(np.abs(d.crop(DERIVATIVE_BUFFER).values)))
        return total


@dataclass(frozen=True, eq=False)
class DyadicBlockSet:
    d: int
    n_max: int
    cutoff: CutoffA
    tables: tuple

    def index_range(self, n):
        """First and last Hermite level entering block n."""
        return 4 ** (n - 1) + 1 if n > 0 else 1, 4 ** (n + 1) - 1

    def weight_vector(self, n):
        """a(j / 4^n) for j = 0..4^{n+1}-1."""
        if n > self.n_max:
            raise LevelTooLarge(f"block {n} exceeds N_max = {self.n_max}")
        return self.tables[n]

    def shared_levels(self, n, m):
        lo_n, hi_n = self.index_range(n)
        lo_m, hi_m = self.index_range(m)
        weights_n = self.weight_vector(n)
        weights_m = self.weight_vector(m)
        common = range(max(lo_n, lo_m), min(hi_n, hi_m) + 1)
        return [j for j in common if weights_n[j] and weights_m[j]]


def build_blocks(d=1, n_max=None):
    if d not in MAX_LEVELS:
        raise LevelTooLarge(f"block kernels are enumerated for d <= 2, got d = {d}")
    n_max = DEFAULT_LEVELS[d] if n_max is None else int(n_max)
    if n_max > MAX_LEVELS[d]:
        raise LevelTooLarge(f"N_max = {n_max} exceeds the enumeration budget {MAX_LEVELS[d]} in d = {d}")
    cutoff = CutoffA()
    tables = []
    for n in range(n_max + 1):
        j = np.arange(4 ** (n + 1))
        tables.append(cutoff(j / 4.0**n))
    return DyadicBlockSet(d, n_max, cutoff, tuple(tables))


# kernels --------------------------------------------------------------------------


def block_kernel(blocks, n, x, y, order=0):
    """H_n^a(x, y), or its order-th x-derivative in d = 1.

    In d = 1 ``x`` and ``y`` broadcast against each other; in d = 2 they
    are arrays of shape (m, 2).
    """
    weights = blocks.weight_vector(n)
    top = len(weights) - 1
    if blocks.d == 1:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        total = np.zeros(x.shape)
        for (j, hx), (_, hy) in zip(iter_hermite_derivative(x, top, order), iter_hermite(y, top)):
            if weights[j]:
                total += weights[j] * (hx * hy)
        return total

    if order:
        raise ValueError("kernel derivatives are available in d = 1 only")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    axis_products = [hermite_table(x[:, i], top) * hermite_table(y[:, i], top) for i in range(2)]
    total = np.zeros(x.shape[0])
    for j in range(top + 1):
        if not weights[j]:
            continue
        level = np.zeros(x.shape[0])
        for a in range(j + 1):
            level += axis_products[0][a] * axis_products[1][j - a]
        total += weights[j] * level
    return total


def _transform_grid(f, top):
    """The grid on which coefficients up to ``top`` are integrated."""
    target = np.pi / (4.0 * np.sqrt(2 * top + 1))
    radius = np.sqrt(2 * top + 1) + 2
    if any(l > -radius or h < radius for l, h in zip(f.lo, f.hi)):
        logger.debug("box %s..%s does not contain the oscillation region |x| < %.1f", f.lo, f.hi, radius)
    if all(h <= target for h in f.spacing):
        return f
    shape = tuple(int(np.ceil((hi - lo) / target)) + 1 for lo, hi in zip(f.lo, f.hi))
    logger.debug("resampling %s -> %s for Hermite levels up to %d", f.shape, shape, top)
    return f.resample(f.lo, f.hi, shape)


def hermite_transform(f, top):
    """Coefficients <f, H_alpha> for |alpha| <= top (d = 1: vector, d = 2: matrix)."""
    g = _transform_grid(f, top)
    weighted = g.weights * g.values
    if g.dim == 1:
        x = g.axes[0]
        return np.array([float(np.dot(h, weighted)) for _, h in iter_hermite(x, top)])
    if g.dim == 2:
        h1 = hermite_table(g.axes[0], top)
        h2 = hermite_table(g.axes[1], top)
        return h1 @ weighted @ h2.T
    raise LevelTooLarge(f"Hermite transforms are implemented for d <= 2, got d = {g.dim}")


def synthesize(f, coefficients, order=0):
    """Sum of coefficients times (derivatives of) Hermite functions on f's grid."""
    if f.dim == 1:
        x = f.axes[0]
        out = np.zeros_like(x)
        top = len(coefficients) - 1
        for j, h in iter_hermite_derivative(x, top, order):
            if coefficients[j]:
                out += coefficients[j] * h
        return f.with_values(out)
    if order:
        raise ValueError("derivatives of syntheses are available in d = 1 only")
    top = coefficients.shape[0] - 1
    h1 = hermite_table(f.axes[0], top)
    h2 = hermite_table(f.axes[1], top)
    return f.with_values(h1.T @ coefficients @ h2)


def _level_weights(weights, dim):
    if dim == 1:
        return weights
    top = len(weights) - 1
    levels = np.add.outer(np.arange(top + 1), np.arange(top + 1))
    return np.where(levels <= top, weights[np.minimum(levels, top)], 0.0)


def block_convolve(blocks, n, f, order=0):
    """x -> int H_n^a(x, y) f(y) dy on f's grid, via the Hermite transform."""
    if f.dim != blocks.d:
        raise ValueError(f"function of dimension {f.dim} against blocks of dimension {blocks.d}")
    weights = blocks.weight_vector(n)
    coefficients = hermite_transform(f, len(weights) - 1)
    return synthesize(f, _level_weights(weights, f.dim) * coefficients, order)


def reconstruction_weights(blocks, n_levels):
    """Per-level weight of J_0 f + sum_{n<=N} H_n^a * f, for levels 0..4^{N+1}-1."""
    weights = np.zeros(4 ** (n_levels + 1))
    weights[0] = 1.0
    for n in range(n_levels + 1):
        block = blocks.weight_vector(n)
        weights[: len(block)] += block
    return weights


def reconstruct(blocks, f, n_levels):
    weights = reconstruction_weights(blocks, n_levels)
    coefficients = hermite_transform(f, len(weights) - 1)
    return synthesize(f, _level_weights(weights, f.dim) * coefficients)


def reconstruction_residuals(blocks, f, n_levels):
    """||f - (J_0 f + sum_{n<=N} H_n^a * f)||_2 for N = 0..n_levels, by Parseval.

    Block indices never reach 0, so the J_0 projection is added separately.
    """
    if f.dim != 1:
        raise ValueError("reconstruction residuals are computed in d = 1")
    top = 4 ** (n_levels + 1) - 1
    g = _transform_grid(f, top)
    coefficients = hermite_transform(g, top)
    energy = g.integrate(g.values**2)
    residuals = []
    for level in range(n_levels + 1):
        w = np.zeros(top + 1)
        partial = reconstruction_weights(blocks, level)
        w[: len(partial)] = partial
        captured = float(np.sum((2 * w - w**2) * coefficients**2))
        residuals.append(np.sqrt(max(energy - captured, 0.0)))
    return np.array(residuals)


# verification ---------------------------------------------------------------------


def eigen_check(alpha, grid):
    """sup |(-Laplacian + |x|^2) H_alpha - (2|alpha| + d) H_alpha| on ``grid``'s lattice."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(alpha) != grid.dim:
        raise ValueError(f"multi-index {alpha} does not match grid dimension {grid.dim}")
    nyquist = np.pi / (2.0 * np.sqrt(2 * sum(alpha) + grid.dim))
    if max(grid.spacing) > nyquist:
        raise GridTooCoarse(f"spacing {max(grid.spacing):.3g} cannot resolve level {sum(alpha)}")

    mesh = grid.mesh()
    values = np.ones(grid.shape)
    for coord, a in zip(mesh, alpha):
        values = values * hermite_h(a, coord)
    h_alpha = grid.with_values(values)

    laplacian = np.zeros(grid.shape)
    for axis in range(grid.dim):
        second = tuple(2 if i == axis else 0 for i in range(grid.dim))
        laplacian += h_alpha.derivative(second).values
    radius2 = sum(c**2 for c in mesh)
    residual = -laplacian + radius2 * values - (2 * sum(alpha) + grid.dim) * values
    return float(np.max(np.abs(grid.with_values(residual).crop(DERIVATIVE_BUFFER).values)))


def kernel_bound_ratio(blocks, alpha, k, levels=None, x_samples=48, offset_step=0.125, offset_max=6.0):
    """Per level n, sup |d_x^alpha H_n^a(x, y)| (1 + 2^n|x - y|)^k / 2^{n(alpha + 1)}.

    Probe pairs put x on [0, 1.1 R_n] with R_n the oscillation radius of
    the top level, and y at offsets from x measured in units of 2^{-n}.
    """
    if blocks.d != 1:
        raise ValueError("kernel bounds are verified in d = 1")
    alpha = int(alpha)
    if alpha > 2:
        raise ValueError("derivative order must be at most 2")
    levels = range(blocks.n_max + 1) if levels is None else levels
    ratios = []
    for n in levels:
        radius = np.sqrt(2 * 4 ** (n + 1) + 1)
        x = np.linspace(0.0, 1.1 * radius, x_samples)
        offsets = np.arange(-offset_max, offset_max + offset_step / 2, offset_step)
        xx, ss = np.meshgrid(x, offsets, indexing="ij")
        yy = xx + ss * 2.0 ** (-n)
        kernel = block_kernel(blocks, n, xx.ravel(), yy.ravel(), order=alpha)
        scaled = np.abs(kernel) * (1 + np.abs(ss.ravel())) ** k / 2.0 ** (n * (alpha + 1))
        ratios.append(float(np.max(scaled)))
        logger.debug("kernel_bound_ratio n=%d alpha=%d k=%d ratio=%.4g", n, alpha, k, ratios[-1])
    return np.array(ratios)


def ratio_trend(ratios):
    """Least-squares slope of log ratio against level index."""
    ratios = np.asarray(ratios, dtype=float)
    return float(np.polyfit(np.arange(len(ratios)), np.log(ratios), 1)[0])


def regularize(mu, delta, lo, hi, shape):
    """Density of the regularized measure, Phi_delta(y) sum_i w_i gamma_delta(X_i - y).

    Phi_delta is the smooth plateau equal to 1 on B_{1/delta} and vanishing
    outside B_{1+1/delta}; gamma_delta is the centred Gaussian density of
    variance delta. ``mu`` needs ``positions`` (n, d) and ``weights`` (n,).
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    grid = GridFunction.from_function(lambda *c: np.zeros_like(c[0]), lo, hi, shape)
    nodes = grid.points()
    positions = np.asarray(mu.positions, dtype=float).reshape(len(mu.weights), -1)
    weights = np.asarray(mu.weights, dtype=float)
    dim = nodes.shape[1]
    if positions.shape[1] != dim:
        raise ValueError(f"particles of dimension {positions.shape[1]} on a grid of dimension {dim}")

    density = np.zeros(len(nodes))
    chunk = max(1, 4_000_000 // len(nodes))
    norm = (2 * np.pi * delta) ** (-dim / 2)
    for start in range(0, len(weights), chunk):
        block = positions[start : start + chunk]
        dist2 = np.sum((nodes[:, None, :] - block[None, :, :]) ** 2, axis=2)
        density += np.exp(-dist2 / (2 * delta)) @ weights[start : start + chunk]
    density *= norm * plateau(np.linalg.norm(nodes, axis=1), 1 / delta, 1 + 1 / delta)
    return grid.with_values(density.reshape(grid.shape))
