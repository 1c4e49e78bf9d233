# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Real interpolation on a computable pair: Y = l^1, X = weighted l^1.

Every quantity here (the K-functional, the rho norm and the distance to a
ball of X) has an exact finite algorithm, so the inclusions between the
interpolation spaces can be checked without quadrature error.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from hermite_balance.criterion.gridfn import log_slope
from hermite_balance.criterion.young_orlicz import beta_e
from hermite_balance.exceptions import Divergent

logger = logging.getLogger(__name__)

SERIES_RELATIVE = 1e-12
SERIES_CAP = 4000
DIVERGENCE_BLOCK = 10
BOUNDED_SLOPE = 0.05


@dataclass(frozen=True, eq=False)
class ToyPair:
    """Weights w_i in (0, inf]; an infinite weight marks a coordinate outside X."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(np.isnan(w)) or np.any(w <= 0):
            raise ValueError("toy pair weights must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def N(self):
        return len(self.weights)

    @property
    def embedding_constant(self):
        """||y||_Y <= C ||y||_X with C = 1 / min w_i."""
        return 1.0 / float(self.weights.min())

    def norm_y(self, y):
        return float(np.sum(np.abs(y)))

    def norm_x(self, y):
        y = np.abs(np.asarray(y, dtype=float))
        return float(np.sum(np.where(y > 0, self.weights * y, 0.0)))


def _check(pair, y):
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != pair.N:
        raise ValueError(f"element of length {len(y)} for a pair of dimension {pair.N}")
    return y


def k_functional(pair, y, t):
    """K(y, t) = sum_i |y_i| min(1, t w_i); vectorized over t."""
    y = _check(pair, y)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("K(y, t) needs t > 0")
    out = np.minimum(1.0, np.multiply.outer(t, pair.weights)) @ np.abs(y)
    return float(out) if out.ndim == 0 else out


def gamma_b_norm(pair, y, gamma, b):
    """|y|_{gamma,b} = int_0^1 t^{-gamma} |ln t|^b K(y, t) dt / t.

    On (0, t0] with t0 = min(1, 1/max w_i) the functional is t ||y||_X and
    the integral is an incomplete gamma function; the remaining
    piecewise-linear stretch is integrated segment by segment.
    """
    if gamma >= 1:
        raise Divergent(f"|y|_(gamma,b) diverges at t = 0 for gamma = {gamma} >= 1")
    if gamma < 0 or b < 0:
        raise ValueError(f"need 0 <= gamma < 1 and b >= 0, got gamma={gamma}, b={b}")
    y = _check(pair, y)
    active = np.abs(y) > 0
    if not np.any(active):
        return 0.0
    w = pair.weights[active]
    if np.any(np.isinf(w)):
        return float("inf")

    s = 1.0 - gamma
    t0 = min(1.0, 1.0 / float(w.max()))
    head = pair.norm_x(y) * special.gamma(b + 1) * special.gammaincc(b + 1, -s * np.log(t0)) / s ** (b + 1)

    breaks = np.unique(np.clip(1.0 / w, t0, 1.0))
    breaks = np.unique(np.r_[t0, breaks, 1.0])
    tail = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        value, _ = integrate.quad(
            lambda t: t ** (-gamma - 1) * abs(np.log(t)) ** b * k_functional(pair, y, t), lo, hi, epsrel=1e-10
        )
        tail += value
    return float(head + tail)


def _pi_level(pair, y, n, theta, m, a):
    """min over x_n of 2^{n theta} n^a ||y - x_n||_Y + 2^{-2nm} ||x_n||_X, per coordinate."""
    keep = 2.0 ** (n * theta) * n**a
    drop = 2.0 ** (-2 * n * m) * pair.weights
    return float(np.sum(np.abs(y) * np.minimum(keep, drop)))


def _sum_series(term, label):
    """Sum term(1), term(2), ... with relative truncation and blockwise divergence detection."""
    total = 0.0
    history = [0.0]
    growing = 0
    for n in range(1, SERIES_CAP + 1):
        value = term(n)
        total += value
        if not np.isfinite(total):
            return float("inf")
        if n % DIVERGENCE_BLOCK == 0:
            previous = history[-1]
            growing = growing + 1 if previous > 0 and total >= 10 * previous else 0
            history.append(total)
            if growing >= DIVERGENCE_BLOCK:
                logger.debug("%s diverges: partial sums grew 10x over %d blocks", label, growing)
                return float("inf")
        if total > 0 and value < SERIES_RELATIVE * total and n > 2 * DIVERGENCE_BLOCK:
            return total
        if total == 0 and n > 2 * DIVERGENCE_BLOCK:
            return 0.0
    logger.warning("%s reached the series cap %d without settling", label, SERIES_CAP)
    return float("inf")


def rho_norm(pair, y, theta, m, a):
    """rho_{theta,m,a}(y): the exact infimum of pi over sequences, which decouples per (n, i)."""
    if theta <= 0 or m < 1 or a < 0:
        raise ValueError(f"need theta > 0, m >= 1, a >= 0, got {theta}, {m}, {a}")
    y = _check(pair, y)
    return _sum_series(lambda n: _pi_level(pair, y, n, theta, m, a), "rho")


@dataclass
class NormEquivalence:
    gamma: float
    b: float
    constant: float
    lower_ratios: np.ndarray
    upper_ratios: np.ndarray
    consistent: bool
    proof_constant: float

    def as_dict(self):
        return {
            "gamma": self.gamma,
            "b": self.b,
            "constant": self.constant,
            "consistent": self.consistent,
            "proof_constant": self.proof_constant,
        }


def prop_norm_equivalence(pair, samples, theta, m, a):
    """Smallest C with rho / C <= |y|_{gamma,b} <= C (||y||_Y + rho) over the samples.

    gamma = theta / (2m + theta) and b = 2ma / (2m + theta). Elements where
    one side is infinite must have the other side infinite too.
    """
    gamma = theta / (2 * m + theta)
    b = 2 * m * a / (2 * m + theta)
    lower, upper = [], []
    consistent = True
    for y in samples:
        rho = rho_norm(pair, y, theta, m, a)
        kb = gamma_b_norm(pair, y, gamma, b)
        if np.isinf(rho) or np.isinf(kb):
            consistent &= bool(np.isinf(rho) and np.isinf(kb))
            continue
        if rho == 0 and kb == 0:
            continue
        lower.append(rho / kb)
        upper.append(kb / (pair.norm_y(y) + rho))
    lower, upper = np.array(lower), np.array(upper)
    constant = float(max(lower.max(initial=1.0), upper.max(initial=1.0)))
    return NormEquivalence(gamma, b, constant, lower, upper, consistent, 2.0 ** (2 * m + theta + a + 1))


def _waterfill(pair, y, R):
    """Minimizer of ||y - x||_Y over ||x||_X <= R: fill the cheapest coordinates first."""
    if R < 0:
        raise ValueError(f"ball radius must be nonnegative, got {R}")
    y = _check(pair, y)
    x = np.zeros_like(y)
    budget = float(R)
    for i in np.argsort(pair.weights, kind="stable"):
        if budget <= 0 or not np.isfinite(pair.weights[i]):
            break
        if y[i] == 0:
            continue
        cost = pair.weights[i] * abs(y[i])
        take = min(1.0, budget / cost)
        x[i] = take * y[i]
        budget -= take * cost
    return x


def waterfill_distance(pair, y, R):
    """d_Y(y, B_X(R)), exact for the toy pair."""
    y = _check(pair, y)
    return pair.norm_y(y - _waterfill(pair, y, R))


def element_with_distance_curve(curve, R_grid):
    """A toy element whose distance to B_X(R) equals ``curve(R)`` at every grid point.

    Coordinate j costs R_j - R_{j-1} and carries curve(R_{j-1}) - curve(R_j);
    a last coordinate of infinite weight holds curve(R_max).
    """
    R_grid = np.asarray(R_grid, dtype=float)
    values = np.array([curve(R) for R in R_grid])
    if np.any(np.diff(R_grid) <= 0) or np.any(np.diff(values) > 0):
        raise ValueError("the grid must increase and the curve must not")
    costs = np.r_[R_grid[0], np.diff(R_grid)]
    masses = np.r_[1.0, -np.diff(values)]
    weights = np.r_[costs / np.where(masses > 0, masses, np.inf), np.inf]
    y = np.r_[masses, values[-1]]
    if np.any(np.diff(weights[:-1][masses > 0]) < 0):
        logger.warning("synthesized weights are not increasing; the curve holds only approximately")
    return ToyPair(weights), y


@dataclass
class WitnessSeries:
    levels: list
    terms: np.ndarray
    partial_sum: float
    decay: float
    tail: float
    converged: bool
    b_condition: bool = True
    b_statistic: list = field(default_factory=list)

    def as_dict(self):
        return {
            "levels": self.levels,
            "terms": [float(v) for v in self.terms],
            "partial_sum": self.partial_sum,
            "decay": self.decay,
            "tail": self.tail,
            "converged": self.converged,
            "b_condition": self.b_condition,
        }


def _witness(pair, y, weight, m, a, levels):
    """Terms weight(n) ||y - x_n||_Y + 2^{-2nm} ||x_n||_X with x_n the waterfill at R_n = n^{-a} 2^{2nm}."""
    y = _check(pair, y)
    n = np.arange(1, levels + 1)
    terms = []
    for level in n:
        R = level ** (-a) * 2.0 ** (2 * level * m)
        x = _waterfill(pair, y, R)
        terms.append(weight(level) * pair.norm_y(y - x) + 2.0 ** (-2 * level * m) * pair.norm_x(x))
    terms = np.array(terms)

    recent = slice(levels // 2, levels)
    positive = terms[recent] > 0
    if not np.any(positive):
        decay, tail = np.inf, 0.0
    else:
        # power-law decay n^{-p} of the terms: the series converges for p > 1
        decay = -log_slope(n[recent][positive], terms[recent][positive])
        tail = terms[-1] * levels / (decay - 1) if decay > 1 else float("inf")
    converged = bool(decay > 1 + BOUNDED_SLOPE)
    return n.tolist(), terms, float(terms.sum()), float(decay), float(tail), converged


def b_condition(pair, y, alpha, beta, R_grid=None):
    """Whether R^alpha (ln R)^beta d_Y(y, B_X(R)) stays bounded along R_grid.

    Growth is read against ln ln R over the top half of the grid, which
    separates logarithmic excess from a bounded statistic.
    """
    R_grid = np.logspace(1, 36, 141) if R_grid is None else np.asarray(R_grid, dtype=float)
    statistic = np.array([R**alpha * np.log(R) ** beta * waterfill_distance(pair, y, R) for R in R_grid])
    top = slice(len(R_grid) // 2, None)
    tail = statistic[top]
    if np.any(tail == 0):
        return True, statistic
    slope = log_slope(np.log(R_grid[top]), tail)
    return bool(slope <= BOUNDED_SLOPE), statistic


def prop_balance_inclusion(pair, y, alpha, beta, theta, m, a, levels=60, R_grid=None):
    """Witness that B_{alpha,beta}(X, Y) sits inside S_{theta,m,a}(X, Y) for this element.

    When the B-condition holds, the sequence x_n in B_X(R_n) built from the
    waterfill is evaluated in pi_{theta,m,a} and its convergence is certified
    by the decay of the last half of the terms.
    """
    holds, statistic = b_condition(pair, y, alpha, beta, R_grid)
    result = WitnessSeries(*_witness(pair, y, lambda n: 2.0 ** (n * theta) * n**a, m, a, levels))
    result.b_condition = holds
    result.b_statistic = [float(v) for v in statistic]
    logger.info("prop_balance_inclusion b_condition=%s converged=%s decay=%.3f", holds, result.converged, result.decay)
    return result


def lemma_balance_witness(pair, y, theta, m, a, e, d=1, levels=60):
    """The witness series with the Orlicz weight 2^{n theta} beta_e(2^{nd}) in place of n^a."""
    return WitnessSeries(*_witness(pair, y, lambda n: 2.0 ** (n * theta) * beta_e(e, 2.0 ** (n * d)), m, a, levels))


def la_inequality(m, a, d=1, n_max=60):
    """Per level n, whether L_a(R_n)^{d/2m} >= 2^{nd} with R_n = n^{-a} 2^{2nm} and L_a(R) = R (ln R)^a."""
    out = []
    for n in range(1, n_max + 1):
        R = n ** (-a) * 2.0 ** (2 * n * m)
        if R <= 1:
            out.append(False)
            continue
        L = R * np.log(R) ** a
        out.append(bool(L ** (d / (2 * m)) >= 2.0 ** (n * d) * (1 - 1e-12)))
    return out
