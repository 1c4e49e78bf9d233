# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Compactly supported mollifiers with vanishing moments and their rate checks."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, signal

from hermite_balance.criterion.balance.balance import ParticleMeasure, dual_distance
from hermite_balance.criterion.gridfn import GridFunction, fit_rate
from hermite_balance.criterion.young_orlicz import weighted_sobolev_orlicz_norm
from hermite_balance.exceptions import GridTooCoarse, MarginTooSmall, SingularMomentSystem

logger = logging.getLogger(__name__)

MAX_ORDER = 12
MAX_CONDITION = 1e12


def bump(r):
    """chi(r) = exp(-1/(1 - r^2)) for r < 1, zero otherwise."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def _radial_moment(d, j):
    """int |y|^{2j} chi(|y|) dy over the unit ball."""
    if d == 1:
        value, _ = integrate.quad(lambda r: r ** (2 * j) * float(bump(r)), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
        return 2.0 * value
    value, _ = integrate.quad(lambda r: r ** (2 * j + 1) * float(bump(r)), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
    return 2.0 * np.pi * value


def _solve_moments(matrix):
    """Solve matrix @ c = e_0 with a pivoted QR factorization."""
    condition = float(np.linalg.cond(matrix))
    logger.debug("moment system of size %d, condition %.3g", len(matrix), condition)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularMomentSystem(f"moment matrix condition {condition:.3g} exceeds {MAX_CONDITION:.0e}")
    q, r, perm = linalg.qr(matrix, pivoting=True)
    rhs = np.zeros(len(matrix))
    rhs[0] = 1.0
    permuted = linalg.solve_triangular(r, q.T @ rhs)
    coefficients = np.empty_like(permuted)
    coefficients[perm] = permuted
    return coefficients, condition


@dataclass(frozen=True, eq=False)
class SuperKernel:
    """phi(y) = p(|y|^2) chi(|y|), with int phi = 1 and vanishing moments of order 1..M."""

    d: int
    M: int
    coefficients: np.ndarray
    condition: float

    def __call__(self, y):
        """Evaluate at points of shape (..., d), or at scalars when d = 1."""
        y = np.asarray(y, dtype=float)
        r2 = y**2 if self.d == 1 else np.sum(y**2, axis=-1)
        return np.polynomial.polynomial.polyval(r2, self.coefficients) * bump(np.sqrt(r2))

    def scaled(self, y, delta):
        """phi_delta(y) = delta^{-d} phi(y / delta)."""
        return self(np.asarray(y, dtype=float) / delta) / delta**self.d

    def moment(self, alpha, points=None):
        """int y^alpha phi(y) dy by tensor trapezoid on [-1, 1]^d."""
        alpha = tuple(np.atleast_1d(alpha))
        points = points or (4001 if self.d == 1 else 801)
        grid = GridFunction.from_function(lambda *c: np.zeros_like(c[0]), (-1.0,) * self.d, (1.0,) * self.d, (points,) * self.d)
        mesh = grid.mesh()
        y = np.stack(mesh, axis=-1) if self.d > 1 else mesh[0]
        monomial = np.ones(grid.shape)
        for coord, a in zip(mesh, alpha):
            monomial = monomial * coord**a
        return grid.integrate(monomial * self(y))


def build_superkernel(d, M):
    if d not in (1, 2):
        raise ValueError(f"super kernels are built for d <= 2, got d = {d}")
    if not 0 <= M <= MAX_ORDER:
        raise ValueError(f"moment order must lie in [0, {MAX_ORDER}], got {M}")
    size = M // 2 + 1
    moments = np.array([_radial_moment(d, j) for j in range(2 * size - 1)])
    matrix = np.array([[moments[i + l] for l in range(size)] for i in range(size)])
    coefficients, condition = _solve_moments(matrix)
    return SuperKernel(d, int(M), coefficients, condition)


def _stencil(kern, delta, spacing):
    """Discrete phi_delta weights on the lattice offsets inside the support."""
    radius = [int(np.floor(delta / h)) for h in spacing]
    if min(radius) < 2:
        raise GridTooCoarse(f"delta = {delta} spans fewer than 2 lattice steps")
    axes = [np.arange(-r, r + 1) * h for r, h in zip(radius, spacing)]
    mesh = np.meshgrid(*axes, indexing="ij")
    cell = float(np.prod(spacing))
    if kern.d == 1:
        # re-solve on lattice moments so that polynomials of degree <= M are reproduced exactly
        u = mesh[0] / delta
        chi = bump(np.abs(u))
        size = kern.M // 2 + 1
        matrix = np.array(
            [[np.sum(u ** (2 * i) * u ** (2 * l) * chi) * cell / delta for l in range(size)] for i in range(size)]
        )
        coefficients, _ = _solve_moments(matrix)
        return np.polynomial.polynomial.polyval(u**2, coefficients) * chi * cell / delta, radius
    y = np.stack(mesh, axis=-1)
    return kern.scaled(y, delta) * cell, radius


def mollify(f, kern, delta):
    """f * phi_delta on the interior of f's box (one support radius from every edge)."""
    if f.dim != kern.d:
        raise ValueError(f"function of dimension {f.dim} against kernel of dimension {kern.d}")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    weights, radius = _stencil(kern, delta, f.spacing)
    if any(2 * r + 4 >= n for r, n in zip(radius, f.shape)):
        raise MarginTooSmall(f"support radius {delta} does not fit the box {f.lo}..{f.hi}")
    smoothed = signal.fftconvolve(f.values, weights, mode="same")
    return f.with_values(smoothed).crop(tuple(radius))


def _matching_crop(f, g):
    """Crop f to the lattice of g, which must be a centred sub-lattice of f."""
    pads = tuple((n - m) // 2 for n, m in zip(f.shape, g.shape))
    return f.crop(pads)


def smoothing_distance(f, kern, delta, k, dictionary):
    """Dictionary estimate of ||f - f_delta||_{W*^{k,inf}}, as a sup over test functions."""
    smoothed = mollify(f, kern, delta)
    base = _matching_crop(f, smoothed)
    difference = base.with_values(base.values - smoothed.values)
    return dual_distance(ParticleMeasure.from_grid(difference), k, dictionary)


def rate_kk2(f, kern, q, k, l, e, deltas, dictionary):
    """Log-log slope of ||f - f_delta||_{W*^{k,inf}} against delta.

    ``l`` and ``e`` name the norm in which f is assumed regular; only the
    slope enters the contract slope >= q + k - 0.3.
    """
    if kern.M < q + k:
        raise ValueError(f"kernel order {kern.M} is below q + k = {q + k}")
    distances = [smoothing_distance(f, kern, delta, k, dictionary) for delta in deltas]
    fit = fit_rate(deltas, distances)
    logger.info("rate_kk2 q=%d k=%d slope=%.3f (%s, l=%d)", q, k, fit.slope, e.label, l)
    return fit.slope, np.array(distances)


def rate_kk3(f, kern, n, q, l, e, deltas):
    """Log-log slope of ||f_delta||_{n,l,(e)} against delta; contract slope >= -(n - q) - 0.3."""
    if n < q:
        raise ValueError(f"rate_kk3 needs n >= q, got n={n}, q={q}")
    norms = [weighted_sobolev_orlicz_norm(mollify(f, kern, delta), n, l, e) for delta in deltas]
    fit = fit_rate(deltas, norms)
    logger.info("rate_kk3 n=%d q=%d slope=%.3f", n, q, fit.slope)
    return fit.slope, np.array(norms)


def ante_rec_product(f, kern, r, n, k, l, e, deltas, dictionary):
    """R^{(k+r)/(n-r)} times the smoothing distance along delta, R = ||f_delta||_{n,l,(e)}."""
    if n <= r:
        raise ValueError(f"ante_rec_product needs n > r, got n={n}, r={r}")
    products = []
    for delta in deltas:
        R = weighted_sobolev_orlicz_norm(mollify(f, kern, delta), n, l, e)
        products.append(R ** ((k + r) / (n - r)) * smoothing_distance(f, kern, delta, k, dictionary))
    return np.array(products)
