# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Integration by parts weights, measure Sobolev norms and the Poisson-kernel density formula.

Weights realize E[d_alpha f(F)] = (-1)^|alpha| E[f(F) H_alpha] for
conditionally Gaussian F: given a centre c and precision P, the weights are
multivariate Hermite polynomials in z = P (F - c), built by the recursion
H_{alpha + e_i} = H_alpha z_i - d_i H_alpha.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import hermite_e
from scipy import special, stats

from hermite_balance.criterion.balance import ParticleMeasure
from hermite_balance.criterion.gridfn import multi_indices, plateau, plateau_derivative, rng_stream, split_blocks
from hermite_balance.exceptions import (
    IbpIdentityFailed,
    SingularCovariance,
    SingularPoint,
    TooFewParticlesNearX,
    WeightsMissing,
)

logger = logging.getLogger(__name__)

BLOCK_SIZE = 100_000
MIN_NEAR_PARTICLES = 100
MIN_EIGENVALUE = 1e-12
IDENTITY_Z_LIMIT = 3.0


# weights ---------------------------------------------------------------------------


def _derive(poly, axis, precision):
    """d/dF_axis of a polynomial in z = P (F - c), with dz_j/dF_axis = P[j, axis]."""
    out = defaultdict(float)
    for exponent, coeff in poly.items():
        for j, power in enumerate(exponent):
            if power:
                lowered = list(exponent)
                lowered[j] -= 1
                out[tuple(lowered)] = out[tuple(lowered)] + power * coeff * precision[..., j, axis]
    return dict(out)


def _times_z(poly, axis):
    out = {}
    for exponent, coeff in poly.items():
        raised = list(exponent)
        raised[axis] += 1
        out[tuple(raised)] = coeff
    return out


def _hermite_polynomials(d, order, precision):
    """Polynomials H_alpha(z) for |alpha| <= order; coefficients broadcast against ``precision``."""
    zero = (0,) * d
    polys = {zero: {zero: 1.0}}
    for alpha in multi_indices(d, order):
        if alpha == zero:
            continue
        axis = next(i for i, a in enumerate(alpha) if a)
        parent = tuple(a - (i == axis) for i, a in enumerate(alpha))
        product = _times_z(polys[parent], axis)
        derivative = _derive(polys[parent], axis, precision)
        merged = defaultdict(float)
        for exponent, coeff in product.items():
            merged[exponent] = merged[exponent] + coeff
        for exponent, coeff in derivative.items():
            merged[exponent] = merged[exponent] - coeff
        polys[alpha] = dict(merged)
    return polys


def conditional_gaussian_weights(particles, centers, precisions, order):
    """IBP weights for F | c ~ N(c, P^{-1}), per particle or shared.

    ``precisions`` is (d, d) or (n, d, d). The returned map sends every
    multi-index with 1 <= |alpha| <= order to an (n,) weight sample.
    """
    particles = np.atleast_2d(np.asarray(particles, dtype=float))
    n, d = particles.shape
    precisions = np.asarray(precisions, dtype=float)
    z = np.einsum("...ij,...j->...i", precisions, particles - centers)
    polys = _hermite_polynomials(d, order, precisions)
    weights = {}
    for alpha, poly in polys.items():
        if sum(alpha) == 0:
            continue
        value = np.zeros(n)
        for exponent, coeff in poly.items():
            value = value + coeff * np.prod(z ** np.array(exponent), axis=1)
        weights[alpha] = value
    return weights


def _check_covariance(cov, d):
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape != (d, d) or not np.allclose(cov, cov.T):
        raise SingularCovariance(f"covariance must be a symmetric {d}x{d} matrix")
    smallest = float(np.linalg.eigvalsh(cov).min())
    if smallest <= MIN_EIGENVALUE:
        raise SingularCovariance(f"covariance has minimal eigenvalue {smallest:.3g}")
    return cov


def _test_functions():
    """Five smooth test functions with every partial derivative in closed form."""

    def wave(omega, phase):
        def fn(x, alpha):
            out = np.ones(len(x))
            for j, a in enumerate(alpha):
                out = out * omega**a * np.sin(omega * x[:, j] + phase + 0.3 * j + a * np.pi / 2)
            return out

        return fn

    def bump(center):
        def fn(x, alpha):
            out = np.ones(len(x))
            for j, a in enumerate(alpha):
                u = x[:, j] - center
                out = out * (-1) ** a * hermite_e.hermeval(u, [0] * a + [1]) * np.exp(-(u**2) / 2)
            return out

        return fn

    return [wave(1.0, 0.2), wave(0.7, 1.1), wave(1.3, 0.5), bump(0.0), bump(0.5)]


@dataclass(frozen=True, eq=False)
class IbpSample:
    particles: np.ndarray
    weights: dict
    tag: str
    density: Optional[Callable] = None
    identity_z: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "particles", np.atleast_2d(np.asarray(self.particles, dtype=float)))

    @property
    def dim(self):
        return self.particles.shape[1]

    @property
    def size(self):
        return self.particles.shape[0]

    @property
    def identity_ok(self):
        """None until check_identity has run."""
        return None if self.identity_z is None else bool(self.identity_z <= IDENTITY_Z_LIMIT)

    @property
    def order(self):
        orders = [sum(alpha) for alpha in self.weights]
        return max(orders, default=0)

    def weight(self, alpha):
        alpha = tuple(int(a) for a in alpha)
        if sum(alpha) == 0:
            return np.ones(self.size)
        if alpha not in self.weights:
            raise WeightsMissing(f"no weight samples for multi-index {alpha} ({self.tag})")
        return self.weights[alpha]

    def to_measure(self):
        return ParticleMeasure.from_samples(self.particles, density=self.density, ibp_weights=self.weights, label=self.tag)

    def ibp_defect(self, fn, alpha):
        """(E d_alpha f(F) - (-1)^|alpha| E f(F) H_alpha, its standard error)."""
        zero = (0,) * self.dim
        sign = (-1) ** sum(alpha)
        diff = fn(self.particles, alpha) - sign * fn(self.particles, zero) * self.weight(alpha)
        return float(diff.mean()), float(diff.std(ddof=1) / np.sqrt(self.size))

    def identity_check(self, order=None):
        """Largest |defect| / se over the test functions and multi-indices up to ``order``."""
        order = self.order if order is None else order
        worst = 0.0
        for fn in _test_functions():
            for alpha in multi_indices(self.dim, order):
                if sum(alpha) == 0:
                    continue
                mean, se = self.ibp_defect(fn, alpha)
                worst = max(worst, abs(mean) / se if se > 0 else (0.0 if mean == 0 else np.inf))
        return worst


def _sample(seed, tag, n_samples, draw):
    rows = []
    for block, size in enumerate(split_blocks(n_samples, BLOCK_SIZE)):
        rows.append(draw(rng_stream(seed, (tag, block)), size))
    return np.concatenate(rows, axis=0)


def check_identity(sample, strict=False):
    """Record the worst IBP identity z-score on the sample; warn, or raise when ``strict``, past the limit."""
    worst = sample.identity_check(min(sample.order, 2))
    checked = replace(sample, identity_z=float(worst))
    if not checked.identity_ok:
        if strict:
            raise IbpIdentityFailed(f"IBP identity off by {worst:.2f} standard errors for {sample.tag}")
        logger.warning("IBP identity off by %.2f standard errors for %s", worst, sample.tag)
    return checked


def gaussian_ibp_weights(mean, cov, m, n_samples, seed, tag="gaussian"):
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    d = len(mean)
    cov = _check_covariance(cov, d)
    chol = np.linalg.cholesky(cov)
    particles = _sample(seed, tag, n_samples, lambda rng, size: mean + rng.standard_normal((size, d)) @ chol.T)
    weights = conditional_gaussian_weights(particles, mean, np.linalg.inv(cov), m)
    law = stats.multivariate_normal(mean, cov)
    density = lambda x: np.atleast_1d(law.pdf(np.asarray(x, dtype=float).reshape(-1, d)))
    return check_identity(IbpSample(particles, weights, tag, density))


def gaussian_mixture_weights(means, cov, probabilities, m, n_samples, seed, tag="mixture"):
    """F = C + N(0, cov) with C drawn from ``means``; the weights condition on C."""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    probabilities = np.asarray(probabilities, dtype=float)
    d = means.shape[1]
    cov = _check_covariance(cov, d)
    chol = np.linalg.cholesky(cov)

    def draw(rng, size):
        labels = rng.choice(len(means), size=size, p=probabilities / probabilities.sum())
        return np.hstack([means[labels], means[labels] + rng.standard_normal((size, d)) @ chol.T])

    stacked = _sample(seed, tag, n_samples, draw)
    centers, particles = stacked[:, :d], stacked[:, d:]
    weights = conditional_gaussian_weights(particles, centers, np.linalg.inv(cov), m)
    laws = [stats.multivariate_normal(mu, cov) for mu in means]
    weights_p = probabilities / probabilities.sum()
    density = lambda x: sum(w * np.atleast_1d(law.pdf(np.asarray(x, dtype=float).reshape(-1, d))) for w, law in zip(weights_p, laws))
    return check_identity(IbpSample(particles, weights, tag, density))


# norms ---------------------------------------------------------------------------------


@dataclass
class MeasureSobolevNorm:
    p: float
    m: int
    norm: float
    first_order: float
    k_dp: float
    c: float

    def as_dict(self):
        return dict(p=self.p, m=self.m, norm=self.norm, first_order=self.first_order, k_dp=self.k_dp, c=self.c)


def _norm_bound(s, m, p):
    total = 1.0
    for alpha in multi_indices(s.dim, m):
        if sum(alpha):
            total += float(np.mean(np.abs(s.weight(alpha)) ** p))
    return total ** (1 / p)


def k_dp(d, p):
    return (d - 1) / (1 - d / p)


def measure_sobolev_norm(s, m, p):
    """The weight-moment bound of ||1||_{W_mu^{m,p}} and c_{m,p} = ||1||_{W^{1,p}}^{k_{d,p}} ||1||_{W^{m,p}}."""
    d = s.dim
    if p <= d:
        raise ValueError(f"measure Sobolev norms need p > d, got p={p}, d={d}")
    norm = _norm_bound(s, m, p)
    first = _norm_bound(s, 1, p)
    k = k_dp(d, p)
    return MeasureSobolevNorm(float(p), int(m), norm, first, k, first**k * norm)


def weight_moments(s, p, order=1):
    """(E|H_alpha|^p)^{1/p} for every multi-index of the given order."""
    return {alpha: float(np.mean(np.abs(s.weight(alpha)) ** p) ** (1 / p)) for alpha in multi_indices(s.dim, order) if sum(alpha) == order}


def moment_factor(s, k):
    """m_k = E (1 + |F|)^k with its standard error."""
    values = (1 + np.linalg.norm(s.particles, axis=1)) ** k
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(s.size))


def density_norm_bound(s, m, q):
    """c_{2m+q, 2(d+1)} m_{2(d+1+m)}^{1/2}: the regularity scale fed to the IBP form of H_q."""
    d = s.dim
    c = measure_sobolev_norm(s, 2 * m + q, 2 * (d + 1)).c
    moment, _ = moment_factor(s, 2 * (d + 1 + m))
    return c * np.sqrt(moment)


# Poisson kernel ------------------------------------------------------------------------


def sphere_area(d):
    """Surface area of the unit sphere in R^d."""
    return 2 * np.pi ** (d / 2) / special.gamma(d / 2)


def poisson_kernel_grad(d, x):
    """grad Q_d for the fundamental solution of Laplace Q_d = delta_0; x has shape (..., d)."""
    x = np.asarray(x, dtype=float)
    if d == 1:
        if x.ndim == 0 or x.shape[-1] != 1:
            x = x[..., None]
        return (x > 0).astype(float)
    if x.shape[-1] != d:
        raise ValueError(f"points of dimension {x.shape[-1]} for the kernel in d = {d}")
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(r == 0):
        raise SingularPoint("the Poisson kernel gradient is singular at 0")
    return x / (sphere_area(d) * r**d)


def _localization(s, x, inner, outer):
    offsets = s.particles - x
    r = np.linalg.norm(offsets, axis=1)
    psi = plateau(r, inner, outer)
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = np.where(r > 0, plateau_derivative(r, inner, outer) / r, 0.0)
    return offsets, r, psi, radial[:, None] * offsets


def mt_density(s, x, inner=1.0, outer=2.0, strict=False):
    """Malliavin-Thalmaier estimate of p(x) with its standard error.

    p(x) = sum_i E[ d_iQ_d(F - x) (psi_x(F) H_i - d_i psi_x(F)) ], with psi_x
    the plateau equal to 1 on B_inner(x) and 0 outside B_outer(x).
    With ``strict``, a sample whose recorded IBP identity check failed is refused.
    """
    if strict and s.identity_ok is False:
        raise IbpIdentityFailed(f"weights of {s.tag} fail the IBP identity (z = {s.identity_z:.2f})")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = s.dim
    if len(x) != d:
        raise ValueError(f"point of dimension {len(x)} for a sample of dimension {d}")
    offsets, r, psi, dpsi = _localization(s, x, inner, outer)
    near = int(np.count_nonzero(r < outer))
    if near < MIN_NEAR_PARTICLES:
        raise TooFewParticlesNearX(f"only {near} particles within {outer} of {tuple(x)}")
    inside = r > 0
    grad = np.zeros_like(offsets)
    grad[inside] = poisson_kernel_grad(d, offsets[inside])
    terms = np.zeros(s.size)
    for i in range(d):
        e_i = tuple(int(j == i) for j in range(d))
        terms += grad[:, i] * (psi * s.weight(e_i) - dpsi[:, i])
    return float(terms.mean()), float(terms.std(ddof=1) / np.sqrt(s.size))


def theta_p_bound(s, p, probes):
    """Theta_p over the probes and its ratio to ||1||_{W^{1,p}}^{k_{d,p}}.

    Theta_p = sup_x sum_i (E |d_iQ_d(x - F)|^{p/(p-1)})^{(p-1)/p}.
    """
    d = s.dim
    conjugate = p / (p - 1)
    best = 0.0
    for x in np.atleast_2d(np.asarray(probes, dtype=float)):
        offsets = x - s.particles
        keep = np.linalg.norm(offsets, axis=1) > 0
        grad = poisson_kernel_grad(d, offsets[keep])
        value = float(np.sum(np.mean(np.abs(grad) ** conjugate, axis=0) ** (1 / conjugate)))
        best = max(best, value)
    norm = measure_sobolev_norm(s, 1, p)
    return best, best / norm.first_order**norm.k_dp


def density_bound_check(s, m, q, k, probes, density_derivative=None):
    """Table of |d_alpha p(x)| / (c_{2m+q,2(d+1)} m_k^{1/2} u_{k/2}(x)) for |alpha| <= q.

    Derivatives come from ``density_derivative(alpha, points)`` when given,
    otherwise only the alpha = 0 row is filled, from mt_density.
    """
    d = s.dim
    if s.order < 2 * m + q:
        raise WeightsMissing(f"need weights to order {2 * m + q}, the sample has {s.order}")
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    c = measure_sobolev_norm(s, 2 * m + q, 2 * (d + 1)).c
    moment, _ = moment_factor(s, k)
    scale = c * np.sqrt(moment) * (1 + np.linalg.norm(probes, axis=1)) ** (-k / 2)

    alphas = multi_indices(d, q) if density_derivative is not None else [(0,) * d]
    ratios = np.zeros((len(alphas), len(probes)))
    for row, alpha in enumerate(alphas):
        if density_derivative is not None:
            values = np.abs(density_derivative(alpha, probes))
        else:
            values = np.abs([mt_density(s, x)[0] for x in probes])
        ratios[row] = values / scale
    return {"alphas": alphas, "probes": probes, "ratios": ratios, "c": c, "m_k": moment}
