# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""The balance criterion: distances d_k, the functional pi, hypothesis H_q and verdicts.

Distances d_k are sups over an infinite ball of test functions. They are
bounded from below by a fixed dictionary of smooth test functions and, in
d = 1 for measures with densities, from above by the quantile-coupling
Wasserstein distance. Every verdict records which side it used.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from hermite_balance.criterion.gridfn import DERIVATIVE_BUFFER, GridFunction, log_slope, multi_indices
from hermite_balance.criterion.hermite import block_convolve, hermite_h, regularize
from hermite_balance.criterion.young_orlicz import beta_e, growth_exponents, luxembourg_norm, weighted_sobolev_orlicz_norm
from hermite_balance.exceptions import CurveTooShort, DimensionMismatch

logger = logging.getLogger(__name__)

VERDICT_SLOPE = 0.05
TRUNCATION_RELATIVE = 1e-3
TRUNCATION_CAP = 12
CV_SUBSAMPLE = 2000


# measures -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ParticleMeasure:
    """A finite signed measure sum_i w_i delta_{X_i}.

    ``density`` optionally maps points of shape (m, d) to the exact density;
    ``ibp_weights`` maps multi-indices to per-particle weight samples.
    """

    positions: np.ndarray
    weights: np.ndarray
    density: Optional[Callable] = None
    ibp_weights: Optional[dict] = None
    label: str = ""

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).ravel()
        positions = np.asarray(self.positions, dtype=float).reshape(len(weights), -1)
        if not np.all(np.isfinite(positions)) or not np.all(np.isfinite(weights)):
            raise ValueError("particle positions and weights must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "positions", positions)

    @classmethod
    def from_samples(cls, samples, density=None, ibp_weights=None, label="samples"):
        samples = np.asarray(samples, dtype=float)
        n = len(samples)
        return cls(samples.reshape(n, -1), np.full(n, 1.0 / n), density, ibp_weights, label)

    @classmethod
    def point_mass(cls, x, mass=1.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(x.reshape(1, -1), np.array([mass]), label=f"delta_{tuple(x)}")

    @classmethod
    def from_grid(cls, g, density=None, label="grid"):
        """Quadrature measure with node weights w_i g(x_i)."""
        return cls(g.points(), (g.weights * g.values).ravel(), density, None, label)

    @classmethod
    def from_density(cls, density, lo, hi, shape, label="density"):
        """Quadrature representation of a known density ``density(points) -> values``."""
        grid = GridFunction.from_function(lambda *c: np.zeros_like(c[0]), lo, hi, shape)
        values = np.asarray(density(grid.points()), dtype=float).reshape(grid.shape)
        return cls.from_grid(grid.with_values(values), density=density, label=label)

    @property
    def dim(self):
        return self.positions.shape[1]

    @property
    def size(self):
        return len(self.weights)

    @property
    def total_mass(self):
        return float(np.sum(self.weights))

    @property
    def total_variation(self):
        return float(np.sum(np.abs(self.weights)))

    def integrate(self, fn):
        return float(np.dot(self.weights, fn(self.positions)))

    def localize(self, fn, label=None):
        """The measure fn(x) mu(dx), keeping IBP weight samples aligned."""
        values = np.asarray(fn(self.positions), dtype=float)
        density = None
        if self.density is not None:
            base = self.density
            density = lambda x: base(x) * fn(np.asarray(x, dtype=float).reshape(len(x), -1))
        return ParticleMeasure(self.positions, self.weights * values, density, self.ibp_weights, label or self.label)


# test dictionary --------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    """One-dimensional smooth test function."""

    kind: str
    center: float = 0.0
    width: float = 1.0
    freq: float = 0.0
    phase: float = 0.0
    index: int = 0

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        if self.kind == "gaussian":
            return np.exp(-(u**2) / 2)
        if self.kind == "step":
            return np.tanh(u)
        if self.kind == "wave":
            return np.cos(self.freq * np.asarray(x, dtype=float) + self.phase) * np.exp(-(u**2) / 2)
        if self.kind == "hermite":
            return hermite_h(self.index, u)
        raise ValueError(f"unknown atom kind {self.kind!r}")

    def span(self):
        if self.kind == "hermite":
            return (np.sqrt(2 * self.index + 1) + 10) * self.width
        return 12.0 * self.width

    def sups(self, k_max, points=4001):
        """sup |d^i atom| for i = 0..k_max on a lattice covering the atom's mass."""
        half = self.span()
        if self.kind == "wave":
            points = max(points, int(40 * half * max(self.freq, 1.0)))
        g = GridFunction.from_function(self, self.center - half, self.center + half, points)
        out = []
        for i in range(k_max + 1):
            d = g.derivative((i,)) if i else g
            out.append(float(np.max(np.abs(d.crop(DERIVATIVE_BUFFER if i else 0).values))))
        return np.array(out)

    @property
    def name(self):
        if self.kind == "wave":
            return f"wave(w={self.freq:g},phase={self.phase:g},s={self.width:g})"
        if self.kind == "hermite":
            return f"hermite({self.index},s={self.width:g})"
        return f"{self.kind}(c={self.center:g},s={self.width:g})"


@dataclass(frozen=True, eq=False)
class TestDictionary:
    """Product test functions phi(x) = prod_i atom_i(x_i) with tabulated ||phi||_{k,inf}."""

    __test__ = False

    d: int
    k_max: int
    atoms: tuple
    elements: tuple
    norms: np.ndarray

    @property
    def labels(self):
        return ["*".join(self.atoms[i].name for i in element) for element in self.elements]

    def pairings(self, measure):
        """Vector of int phi_j d(measure) over the dictionary."""
        if measure.dim != self.d:
            raise DimensionMismatch(f"measure of dimension {measure.dim} against a dictionary of dimension {self.d}")
        tables = [np.array([atom(measure.positions[:, axis]) for atom in self.atoms]) for axis in range(self.d)]
        if self.d == 1:
            values = tables[0] @ measure.weights
            return np.array([values[e[0]] for e in self.elements])
        cross = (tables[0] * measure.weights) @ tables[1].T
        return np.array([cross[e[0], e[1]] for e in self.elements])


def _default_atoms(d):
    centers = np.linspace(-4.0, 4.0, 17) if d == 1 else np.linspace(-3.0, 3.0, 7)
    atoms = [Atom("gaussian", c, s) for c in centers for s in ((0.1, 0.25, 0.5, 1.0, 2.0) if d == 1 else (0.25, 0.5, 1.0, 2.0))]
    if d == 1:
        atoms += [Atom("step", c, s) for c in centers for s in (0.02, 0.2, 0.5, 1.0, 2.0)]
        atoms += [Atom("hermite", 0.0, s, index=j) for s in (0.5, 1.0, 2.0) for j in range(12)]
    atoms += [Atom("wave", 0.0, 3.0, freq=w, phase=p) for w in (0.5, 1.0, 2.0, 4.0) for p in (0.0, np.pi / 2)]
    return atoms


def build_dictionary(d=1, k_max=3, atoms=None):
    if d not in (1, 2):
        raise DimensionMismatch(f"test dictionaries are built for d <= 2, got d = {d}")
    atoms = tuple(atoms or _default_atoms(d))
    sups = np.array([atom.sups(k_max) for atom in atoms])
    if d == 1:
        elements = tuple((i,) for i in range(len(atoms)))
    else:
        elements = tuple((i, j) for i in range(len(atoms)) for j in range(len(atoms)))
    norms = np.zeros((k_max + 1, len(elements)))
    for k in range(k_max + 1):
        for col, element in enumerate(elements):
            norms[k, col] = sum(
                np.prod([sups[i, a] for i, a in zip(element, alpha)]) for alpha in multi_indices(d, k)
            )
    return TestDictionary(d, k_max, atoms, elements, norms)


@dataclass(frozen=True)
class DistanceEstimate:
    lower: float
    upper: Optional[float]
    witness: str

    @property
    def best(self):
        """The upper bound when certified, else the dictionary lower bound."""
        return self.upper if self.upper is not None else self.lower

    @property
    def side(self):
        return "upper" if self.upper is not None else "lower"


def dual_distance(measure, k, dictionary):
    """max_j |int phi_j d(measure)| / ||phi_j||_{k,inf} for a signed measure."""
    if k > dictionary.k_max:
        raise ValueError(f"dictionary covers k <= {dictionary.k_max}, got {k}")
    return float(np.max(np.abs(dictionary.pairings(measure)) / dictionary.norms[k]))


def _wasserstein(mu, nu):
    if mu.dim != 1 or mu.density is None or nu.density is None:
        return None
    if np.any(mu.weights < 0) or np.any(nu.weights < 0):
        return None
    mass = mu.total_mass
    if mass <= 0 or abs(mass - nu.total_mass) > 1e-6 * mass:
        return None
    return mass * float(stats.wasserstein_distance(mu.positions[:, 0], nu.positions[:, 0], mu.weights, nu.weights))


def dk_distance(mu, nu, k, dictionary):
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"measures of dimension {mu.dim} and {nu.dim}")
    if k > dictionary.k_max:
        raise ValueError(f"dictionary covers k <= {dictionary.k_max}, got {k}")
    ratios = np.abs(dictionary.pairings(mu) - dictionary.pairings(nu)) / dictionary.norms[k]
    best = int(np.argmax(ratios))
    upper = _wasserstein(mu, nu) if k >= 1 else None
    return DistanceEstimate(float(ratios[best]), upper, dictionary.labels[best])


def calibrate_dictionary(dictionary):
    """Dictionary defects against TV(delta_0, delta_1) = 2 and a Gaussian shift of 0.1."""
    origin = np.zeros(dictionary.d)
    unit = np.zeros(dictionary.d)
    unit[0] = 1.0
    tv = dk_distance(ParticleMeasure.point_mass(origin), ParticleMeasure.point_mass(unit), 0, dictionary).lower
    out = {"tv_defect": 2.0 - tv}
    if dictionary.d == 1:
        mu = gaussian_measure(0.0, 1.0)
        nu = gaussian_measure(0.1, 1.0)
        out["shift_ratio"] = dk_distance(mu, nu, 1, dictionary).lower / 0.1
    return out


def gaussian_measure(mean, variance, lo=None, hi=None, points=2001):
    """Quadrature representation of N(mean, variance) in d = 1, with its density closure."""
    sd = np.sqrt(variance)
    lo = mean - 12 * sd if lo is None else lo
    hi = mean + 12 * sd if hi is None else hi
    density = lambda x: stats.norm.pdf(np.asarray(x, dtype=float).reshape(-1), mean, sd)
    return ParticleMeasure.from_density(density, lo, hi, points, label=f"N({mean:g},{variance:g})")


# the functional pi ------------------------------------------------------------------


@dataclass
class PiResult:
    levels: list
    distance_sum: float
    norm_sum: float
    tail: float
    converged: bool
    distance_side: str

    @property
    def value(self):
        return self.distance_sum + self.norm_sum + self.tail


def _series_tail(terms):
    """Geometric tail estimate from the decay of the last few positive terms."""
    positive = [(i, t) for i, t in enumerate(terms) if t > 0]
    if len(positive) < 2:
        return 0.0, 0.0
    recent = positive[-4:]
    idx = np.array([i for i, _ in recent], dtype=float)
    logs = np.log([t for _, t in recent])
    ratio = float(np.exp(np.polyfit(idx, logs, 1)[0]))
    if ratio >= 1.0:
        return float("inf"), ratio
    return recent[-1][1] * ratio / (1 - ratio), ratio


def pi_functional(mu, approximants, q, k, m, e, dictionary, N=None):
    """Truncated pi_{q,k,m,e}(mu, (mu_n)): weighted distances plus weighted approximant norms.

    ``approximants`` are densities p_{mu_n} on their own grids. The sums
    stop when the last term falls below 1e-3 of the running total or at the
    truncation cap; the reported tail extrapolates the last terms' decay.
    """
    cap = min(len(approximants), TRUNCATION_CAP if N is None else N)
    d = mu.dim
    levels = []
    distance_terms, norm_terms = [], []
    sides = set()
    for n in range(cap):
        p_n = approximants[n]
        nu = ParticleMeasure.from_grid(p_n, density=p_n.interpolate, label=f"mu_{n}")
        distance = dk_distance(mu, nu, k, dictionary)
        sides.add(distance.side)
        norm = weighted_sobolev_orlicz_norm(p_n, 2 * m + q, 2 * m, e)
        distance_terms.append(2.0 ** (n * (q + k)) * beta_e(e, 2.0 ** (n * d)) * distance.best)
        norm_terms.append(2.0 ** (-2 * n * m) * norm)
        levels.append(
            {
                "n": n,
                "R": norm,
                "dk_lower": distance.lower,
                "dk_upper": distance.upper,
                "witness": distance.witness,
                "norm": norm,
                "distance_term": distance_terms[-1],
                "norm_term": norm_terms[-1],
            }
        )
        running = sum(distance_terms) + sum(norm_terms)
        if n >= 3 and distance_terms[-1] + norm_terms[-1] < TRUNCATION_RELATIVE * running:
            break

    distance_tail, distance_ratio = _series_tail(distance_terms)
    norm_tail, norm_ratio = _series_tail(norm_terms)
    tail = distance_tail + norm_tail
    converged = bool(np.isfinite(tail))
    logger.info(
        "pi_functional levels=%d distance ratio=%.3f norm ratio=%.3f converged=%s",
        len(levels), distance_ratio, norm_ratio, converged,
    )
    return PiResult(
        levels=levels,
        distance_sum=float(sum(distance_terms)),
        norm_sum=float(sum(norm_terms)),
        tail=tail,
        converged=converged,
        distance_side="upper" if sides == {"upper"} else "lower",
    )


# hypothesis H_q ----------------------------------------------------------------------


@dataclass
class HqResult:
    R: np.ndarray
    statistic: np.ndarray
    limsup: float
    slope: float
    verdict: str
    threshold: float = VERDICT_SLOPE

    def as_dict(self):
        return {
            "R": [float(v) for v in self.R],
            "statistic": [float(v) for v in self.statistic],
            "limsup": self.limsup,
            "slope": self.slope,
            "verdict": self.verdict,
            "threshold": self.threshold,
        }


def _check_curve(curve):
    curve = sorted((float(R), float(dk)) for R, dk in curve)
    R = np.array([c[0] for c in curve])
    dk = np.array([c[1] for c in curve])
    if len(curve) < 6:
        raise CurveTooShort(f"H_q needs at least 6 points, got {len(curve)}")
    if R[0] <= 1.0:
        raise CurveTooShort("H_q needs R > 1 on the whole curve")
    if np.log10(R[-1] / R[0]) < 3.0:
        raise CurveTooShort(f"curve spans {np.log10(R[-1] / R[0]):.2f} decades, need 3")
    return R, dk


def _verdict(R, statistic):
    top = len(R) // 2
    tail_R, tail_stat = R[top:], statistic[top:]
    limsup = float(np.max(tail_stat))
    if np.any(tail_stat <= 0):
        slope = -np.inf
    else:
        slope = log_slope(tail_R, tail_stat)
    verdict = "regular" if slope <= VERDICT_SLOPE else "inconclusive"
    return HqResult(R, statistic, limsup, float(slope), verdict)


def hypothesis_Hq_statistic(curve, q, k, m, e, a, d=1):
    """L_a(R)^{1+(k+q)/2m} beta_e(L_a(R)^{d/2m}) d_k / R along the curve, with L_a(R) = R (ln R)^a.

    The verdict is "regular" when the log-log slope of the statistic over
    the top half of the curve is at most 0.05.
    """
    if a <= 1:
        raise ValueError(f"H_q needs a > 1, got {a}")
    R, dk = _check_curve(curve)
    L = R * np.log(R) ** a
    exponent = 1 + (k + q) / (2 * m)
    statistic = np.array([Li**exponent * beta_e(e, Li ** (d / (2 * m))) * dki / Ri for Li, dki, Ri in zip(L, dk, R)])
    return _verdict(R, statistic)


def example1_statistic(curve, q, k, m, p, a, d=1):
    """The L^p form R^{(q+k+d/p*)/2m} (ln R)^{a(1+(q+k+d/p*)/2m)} d_k."""
    R, dk = _check_curve(curve)
    p_star = p / (p - 1)
    exponent = (q + k + d / p_star) / (2 * m)
    statistic = R**exponent * np.log(R) ** (a * (1 + exponent)) * dk
    return _verdict(R, statistic)


def reciprocity_condition(e, q, k, m, d=1, R_grid=None):
    """Whether W^{q+1,2m,e} sits inside B_q(k,m,e): m > d/2 and alpha < (2m+k+q)/(d(2m-1)).

    alpha is the fitted power exponent of beta_e. ``gap`` is the margin
    between the decay (k+q+1)/(2m-1) of the smoothing distance and the
    growth (k+q)/2m + d alpha/2m of the H_q weight.
    """
    R_grid = np.logspace(3, 12, 10) if R_grid is None else R_grid
    alpha, gamma = growth_exponents(e, R_grid)
    alpha = max(alpha, 0.0)
    threshold = (2 * m + k + q) / (d * (2 * m - 1))
    decay = (k + q + 1) / (2 * m - 1)
    growth = (k + q) / (2 * m) + d * alpha / (2 * m)
    return {
        "holds": bool(m > d / 2 and alpha < threshold),
        "alpha": float(alpha),
        "gamma": float(gamma),
        "threshold": threshold,
        "gap": decay - growth,
    }


def hypothesis_Hq_tilde_statistic(ibp_bounds, distances, q, k, m, e, a, d=1):
    """H_q evaluated on the curve whose R values are IBP-derived norm bounds."""
    return hypothesis_Hq_statistic(list(zip(ibp_bounds, distances)), q, k, m, e, a, d)


# Fourier baseline -------------------------------------------------------------------


@dataclass
class FourierResult:
    xi: np.ndarray
    bound: np.ndarray
    exponent: float
    d: int

    @property
    def conclusive(self):
        """Square-integrable characteristic function: decay faster than |xi|^{-d/2}."""
        return self.exponent > self.d / 2

    def as_dict(self):
        return {
            "xi": [float(v) for v in self.xi],
            "bound": [float(v) for v in self.bound],
            "exponent": self.exponent,
            "d": self.d,
            "conclusive": self.conclusive,
        }


def fourier_balance(char_fn_samples, k, d=1):
    """Decay exponent of min_n (|xi| E|F - F_n| + |xi|^{-k} E|H_k(F_n)|) over the xi grid.

    ``char_fn_samples`` maps xi to a list of (char_value, E|F - F_n|, E|H_k(F_n)|).
    """
    xi = np.array(sorted(char_fn_samples))
    if np.log10(xi[-1] / xi[0]) < 2.0:
        raise ValueError("the xi grid must span at least 2 decades")
    bound = np.array(
        [min(abs(x) * err + abs(x) ** (-k) * weight for _, err, weight in char_fn_samples[x]) for x in xi]
    )
    exponent = -log_slope(xi, bound)
    logger.info("fourier_balance k=%d exponent=%.4f", k, exponent)
    return FourierResult(xi, bound, float(exponent), d)


def intro_model_samples(h, k, xi_grid, deltas=None):
    """Samples of the model E|F - F_delta| = delta^{(1+h)/2}, E|H_k| = delta^{-k/2}.

    Each xi also receives the balancing delta = |xi|^{-2(k+1)/(k+1+h)}.
    """
    deltas = np.logspace(-12, 0, 2401) if deltas is None else np.asarray(deltas)
    samples = {}
    for x in xi_grid:
        candidates = list(deltas) + [abs(x) ** (-2 * (k + 1) / (k + 1 + h))]
        samples[float(x)] = [(np.nan, dl ** ((1 + h) / 2), dl ** (-k / 2)) for dl in candidates]
    return samples


# verdicts -----------------------------------------------------------------------------


@dataclass
class BalanceReport:
    parameters: dict
    levels: list
    pi_value: float
    pi_tail: float
    statistic: Optional[float]
    statistic_slope: Optional[float]
    verdict: str
    provenance: dict
    notes: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "regular"

    def as_dict(self):
        return json_safe(
            {
                "parameters": self.parameters,
                "levels": self.levels,
                "pi_value": self.pi_value,
                "pi_tail": self.pi_tail,
                "statistic": self.statistic,
                "statistic_slope": self.statistic_slope,
                "verdict": self.verdict,
                "provenance": self.provenance,
                "notes": self.notes,
            }
        )


def json_safe(value):
    """Plain JSON values; non-finite floats become "inf", "-inf" or "nan"."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def cross_validated_delta(mu, deltas):
    """The delta minimizing the least-squares cross-validation score of regularize."""
    positions = mu.positions
    weights = mu.weights
    if mu.size > CV_SUBSAMPLE:
        keep = np.linspace(0, mu.size - 1, CV_SUBSAMPLE).astype(int)
        positions = positions[keep]
        weights = weights[keep] * (mu.total_mass / weights[keep].sum())
    dist2 = np.sum((positions[:, None, :] - positions[None, :, :]) ** 2, axis=2)
    d = positions.shape[1]
    scores = []
    for delta in deltas:
        gauss = lambda var: np.exp(-dist2 / (2 * var)) * (2 * np.pi * var) ** (-d / 2)
        integral = weights @ gauss(2 * delta) @ weights
        loo = gauss(delta)
        np.fill_diagonal(loo, 0.0)
        cross = np.sum(weights * (loo @ weights) / np.maximum(1 - weights, 1e-12))
        scores.append(integral - 2 * cross)
    best = int(np.argmin(scores))
    return float(deltas[best]), [float(s) for s in scores]


def theorem2C_verdict(mu, approximants, params, dictionary, deltas=(0.4, 0.2, 0.1, 0.05, 0.025, 0.0125)):
    """Regular when pi_{q,k,m,e}(mu, approximants) is truncation-stable.

    The density bound ||p_mu||_{W^{q,e}} <= C rho holds up to a universal
    constant that is not estimated. A cross-validated regularization of mu
    is attached for inspection.
    """
    q, k, m, e = params["q"], params["k"], params["m"], params["e"]
    result = pi_functional(mu, approximants, q, k, m, e, dictionary, params.get("N"))
    verdict = "regular" if result.converged else "inconclusive"
    notes = ["density bound holds up to an unestimated universal constant"]
    statistic = slope = None
    a = params.get("a")
    if a is not None:
        curve = [(level["R"], level["dk_lower"]) for level in result.levels]
        try:
            hq = hypothesis_Hq_statistic(curve, q, k, m, e, a, mu.dim)
        except CurveTooShort as exc:
            notes.append(f"H_q not evaluated: {exc}")
        else:
            statistic, slope = hq.limsup, hq.slope
            if hq.verdict != "regular":
                verdict = "inconclusive"

    delta_star, scores = cross_validated_delta(mu, list(deltas))
    lo = mu.positions.min(axis=0) - 3 * np.sqrt(delta_star)
    hi = mu.positions.max(axis=0) + 3 * np.sqrt(delta_star)
    shape = (801,) if mu.dim == 1 else (121,) * mu.dim
    density = regularize(mu, delta_star, tuple(lo), tuple(hi), shape)

    report = BalanceReport(
        parameters={"q": q, "k": k, "m": m, "e": e.label, "a": params.get("a")},
        levels=result.levels,
        pi_value=result.value,
        pi_tail=result.tail,
        statistic=statistic,
        statistic_slope=slope,
        verdict=verdict,
        provenance={
            "particles": mu.size,
            "levels": len(result.levels),
            "distance_side": result.distance_side,
            "cv_delta": delta_star,
            "cv_scores": scores,
            "dictionary": calibrate_dictionary(dictionary) if dictionary.d == 1 else {},
        },
        notes=notes,
    )
    if mu.dim == 1:
        report.curves["regularized_density"] = (density.axes[0], density.values, np.zeros(density.shape))
    return report


# block inequalities ---------------------------------------------------------------------


def oo_ratios(blocks, f, e, alpha=0, m=1, g=None, k=1, dictionary=None, levels=None):
    """Per-level ratios of the block convolution bounds in d = 1.

    ``oo3``: ||d^alpha H_n * f||_(e) / (2^{n alpha} ||f||_(e)).
    ``oo4``: ||H_n * d^alpha f||_(e) 4^{nm} / ||f||_{2m+alpha,2m,(e)}.
    ``oo5`` (when ``g`` is given): ||H_n * d^alpha (f - g)||_(e) over
    2^{n(alpha+k)} beta_e(2^n) d_k(mu_f, mu_g).
    Bounded ratios (no growth in n) certify the inequalities numerically.
    """
    if blocks.d != 1 or f.dim != 1:
        raise ValueError("block inequality ratios are computed in d = 1")
    levels = range(blocks.n_max + 1) if levels is None else levels
    alpha_index = (alpha,)
    f_norm = luxembourg_norm(f, e)
    sobolev = weighted_sobolev_orlicz_norm(f, 2 * m + alpha, 2 * m, e)
    df = f.derivative(alpha_index) if alpha else f

    out = {"levels": list(levels), "oo3": [], "oo4": []}
    if g is not None:
        dictionary = dictionary or build_dictionary(1, max(k, 1))
        dist = dk_distance(ParticleMeasure.from_grid(f), ParticleMeasure.from_grid(g), k, dictionary).lower
        diff = f.with_values(f.values - g.values)
        ddiff = diff.derivative(alpha_index) if alpha else diff
        out["oo5"] = []
    for n in levels:
        out["oo3"].append(luxembourg_norm(block_convolve(blocks, n, f, order=alpha), e) / (2.0 ** (n * alpha) * f_norm))
        out["oo4"].append(luxembourg_norm(block_convolve(blocks, n, df), e) * 4.0 ** (n * m) / sobolev)
        if g is not None:
            bound = 2.0 ** (n * (alpha + k)) * beta_e(e, 2.0**n) * dist
            out["oo5"].append(luxembourg_norm(block_convolve(blocks, n, ddiff), e) / bound)
    return {key: np.array(value) if key != "levels" else value for key, value in out.items()}
