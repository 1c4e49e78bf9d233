# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Stochastic heat equation on [0, 1] with Neumann boundary and space-time white noise.

The field lives on cell centres x_j = (j + 1/2)/nx; ghost cells copy the
boundary values, so the discrete Laplacian conserves mass. Every explicit
step adds sigma(u) times a Gaussian increment of variance dt/dx per cell.
"""

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from hermite_balance.criterion.balance import BalanceReport, hypothesis_Hq_statistic
from hermite_balance.criterion.gridfn import GridFunction, fit_rate, map_blocks, rng_stream, split_blocks
from hermite_balance.criterion.sde_lab import coupled_distance, log_modulus_profile, mixture_density
from hermite_balance.criterion.young_orlicz import from_label, log_entropy, weighted_sobolev_orlicz_norm
from hermite_balance.exceptions import CurveTooShort, NonPositiveData, PointsTooClose, UnstableGrid

logger = logging.getLogger(__name__)

TAGS = ("additive", "lipschitz", "c_log")
SERIES_TOLERANCE = 1e-14
IMAGE_SWITCH = 1e-4
MIN_SPACING = 1e-3
STABILITY = 4.0
MIN_WINDOW_STEPS = 4
BLOCK_SIZE = 2000
DENSITY_CENTERS = 4000
DENSITY_POINTS = {1: 801, 2: 81, 3: 31}
DEFAULT_EPS = tuple(0.05 * 2.0**-j for j in range(8))


# coefficients -----------------------------------------------------------------------


@dataclass(frozen=True)
class Coefficient:
    """u -> base + amplitude g(u - center); g is the log modulus bump when h is set, else a sine."""

    base: float = 0.0
    amplitude: float = 0.0
    h: Optional[float] = None
    center: float = 0.0

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.amplitude == 0:
            return np.full(u.shape, float(self.base))
        shifted = u - self.center
        g = np.sin(shifted) if self.h is None else log_modulus_profile(shifted, self.h)
        return self.base + self.amplitude * g


@dataclass(frozen=True)
class CosineSeries:
    """u0(x) = constant + sum_n a_n cos(n pi x), compatible with the Neumann boundary."""

    constant: float = 0.0
    amplitudes: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, float(self.constant))
        for n, a in enumerate(self.amplitudes, start=1):
            out = out + a * np.cos(n * np.pi * x)
        return out


@dataclass(frozen=True, eq=False)
class HeatModel:
    sigma: Callable
    drift: Callable
    c_sigma: float
    tag: str = "lipschitz"
    h: Optional[float] = None
    u0: Callable = field(default_factory=CosineSeries)
    sigma_bound: float = 100.0
    label: str = ""

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown coefficient class {self.tag!r}; expected one of {TAGS}")
        if self.tag == "c_log" and not (self.h and self.h > 0):
            raise ValueError("c_log coefficients need a modulus exponent h > 0")
        if self.c_sigma < 0:
            raise ValueError(f"ellipticity floor must be nonnegative, got {self.c_sigma}")
        values = self.sigma(self.probes())
        if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > self.sigma_bound:
            raise ValueError(f"sigma is not bounded by {self.sigma_bound} on the probe grid")
        if np.min(values) < self.c_sigma:
            raise ValueError(f"ellipticity floor violated: min sigma {np.min(values):.3g} < c_sigma {self.c_sigma}")
        if not np.all(np.isfinite(self.drift(self.probes()))):
            raise ValueError("drift is not finite on the probe grid")

    def probes(self):
        center = getattr(self.sigma, "center", 0.0)
        return np.concatenate([np.linspace(-50.0, 50.0, 4001), center + np.linspace(-1e-3, 1e-3, 201)])

    def modulus_ratio(self, pairs=2000, seed=0):
        """max |sigma(u) - sigma(v)| |ln|u - v||^{2+h} over random close pairs."""
        rng = rng_stream(seed, "heat-modulus-probes")
        u = rng.uniform(-3, 3, pairs)
        gap = 10 ** rng.uniform(-8, np.log10(0.5), pairs)
        u[::2] = getattr(self.sigma, "center", 0.0)
        v = u + gap * rng.choice([-1.0, 1.0], pairs)
        exponent = 2.0 + (self.h if self.h is not None else 1.0)
        return float(np.max(np.abs(self.sigma(u) - self.sigma(v)) * np.abs(np.log(gap)) ** exponent))


def additive_model(scale=1.0, u0=None):
    return HeatModel(Coefficient(scale), Coefficient(0.0), c_sigma=abs(scale), tag="additive",
                     u0=u0 or CosineSeries(), label=f"additive(sigma={scale:g})")


def lipschitz_heat_model(base=1.0, amplitude=0.5, drift=0.5, u0=None):
    """sigma(u) = base + amplitude sin(u), b(u) = -drift sin(u)."""
    return HeatModel(Coefficient(base, amplitude), Coefficient(0.0, -drift), c_sigma=base - abs(amplitude),
                     u0=u0 or CosineSeries(), label="lipschitz-sine")


def c_log_heat_model(h=1.0, base=0.5, amplitude=1.0, center=0.0, drift=0.0, u0=None):
    """sigma(u) = base + amplitude (1 + ln(1 + 1/|u - center|))^{-(2+h)} >= base."""
    return HeatModel(Coefficient(base, amplitude, h, center), Coefficient(0.0, -drift), c_sigma=base, tag="c_log",
                     h=h, u0=u0 or CosineSeries(), label=f"c_log(h={h:g})")


# Neumann kernel -------------------------------------------------------------------------


def _image_sum(t, x, y):
    out = np.zeros(np.broadcast(x, y).shape)
    for k in (-1, 0, 1):
        for z in (x - y + 2 * k, x + y + 2 * k):
            out = out + np.exp(-(z**2) / (4 * t))
    return out / np.sqrt(4 * np.pi * t)


def neumann_kernel(t, x, y, n_terms=None):
    """G_t(x, y) = 1 + 2 sum_n exp(-n^2 pi^2 t) cos(n pi x) cos(n pi y).

    The series stops before the first term below 1e-14 unless ``n_terms``
    is given; below t = 1e-4 the reflection (image) sum is used instead.
    """
    if not t > 0:
        raise ValueError(f"the heat kernel needs t > 0, got {t}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if n_terms is None:
        if t < IMAGE_SWITCH:
            out = _image_sum(t, x, y)
            return float(out) if out.ndim == 0 else out
        n_terms = int(math.floor(math.sqrt(-math.log(SERIES_TOLERANCE) / (math.pi**2 * t))))
    n = np.arange(1, n_terms + 1)
    x_, y_ = np.broadcast_arrays(x, y)
    terms = np.exp(-(n**2) * math.pi**2 * t) * np.cos(n * math.pi * x_[..., None]) * np.cos(n * math.pi * y_[..., None])
    out = 1.0 + 2.0 * terms.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def kernel_gram(x, y, eps):
    """int_{t-eps}^t int_0^1 G_{t-s}(x, z) G_{t-s}(y, z) dz ds = int_0^eps G_{2s}(x, y) ds.

    Integrated in v = sqrt(s) so the diagonal singularity disappears.
    """
    integrand = lambda v: 2 * v * neumann_kernel(2 * v * v, x, y) if v > 0 else 0.0
    value, _ = integrate.quad(integrand, 0.0, math.sqrt(eps), epsabs=1e-13, epsrel=1e-10, limit=200)
    return value


def heat_semigroup(u0, t, x, points=2001):
    """int_0^1 G_t(x, y) u0(y) dy by the trapezoid rule; meant for t >= 1e-3."""
    y = np.linspace(0.0, 1.0, points)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    values = neumann_kernel(t, x[:, None], y[None, :]) * u0(y)[None, :]
    return integrate.trapezoid(values, y, axis=1)


def _check_points(points):
    points = np.sort(np.atleast_1d(np.asarray(points, dtype=float)))
    if np.any(points <= 0) or np.any(points >= 1):
        raise ValueError(f"points must lie in the open interval (0, 1), got {points}")
    spacing = float(np.min(np.diff(points))) if len(points) > 1 else math.inf
    if spacing < MIN_SPACING:
        raise PointsTooClose(f"minimal spacing {spacing:.3g} is below {MIN_SPACING}; the covariance floor degenerates")
    return points, spacing


@dataclass
class CovarianceBounds:
    points: np.ndarray
    eps: np.ndarray
    min_ratio: np.ndarray
    max_ratio: np.ndarray
    spacing: float

    @property
    def lower(self):
        return float(self.min_ratio.min())

    @property
    def upper(self):
        return float(self.max_ratio.max())

    def as_dict(self):
        return {
            "points": [float(p) for p in self.points],
            "eps": [float(e) for e in self.eps],
            "min_ratio": [float(r) for r in self.min_ratio],
            "max_ratio": [float(r) for r in self.max_ratio],
            "spacing": self.spacing,
            "lower": self.lower,
            "upper": self.upper,
        }


def covariance_bounds(points, eps_grid):
    """Extreme eigenvalues of the window Gram matrix of (G(x_i, .))_i, over sqrt(eps)."""
    points, spacing = _check_points(points)
    lows, highs = [], []
    for eps in eps_grid:
        gram = np.array([[kernel_gram(a, b, eps) for b in points] for a in points])
        eig = np.linalg.eigvalsh(gram)
        lows.append(eig[0] / math.sqrt(eps))
        highs.append(eig[-1] / math.sqrt(eps))
    return CovarianceBounds(points, np.asarray(eps_grid, dtype=float), np.array(lows), np.array(highs), spacing)


# simulation -------------------------------------------------------------------------------


def cell_centers(nx):
    return (np.arange(nx) + 0.5) / nx


def cell_index(points, nx):
    """Index of the lattice cell containing each point."""
    return np.clip(np.floor(np.asarray(points, dtype=float) * nx).astype(int), 0, nx - 1)


def _neumann_step(v, dt, dx):
    left = np.concatenate([v[..., :1], v[..., :-1]], axis=-1)
    right = np.concatenate([v[..., 1:], v[..., -1:]], axis=-1)
    return v + dt / dx**2 * (left - 2 * v + right)


@dataclass
class HeatEnsemble:
    """Fields at T, one row per realization.

    With a freeze window, ``anchor`` is u(T - eps), ``anchor_sigma`` is
    sigma(u(T - eps)), ``mean`` the anchor carried by the heat flow alone and
    ``frozen``, ``fluctuation`` and ``drift`` the three terms of
    u(T) = u_eps(T) + I_eps(T) + J_eps(T) driven by the same noise.
    """

    x: np.ndarray
    final: np.ndarray
    anchor: Optional[np.ndarray] = None
    anchor_sigma: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    frozen: Optional[np.ndarray] = None
    fluctuation: Optional[np.ndarray] = None
    drift: Optional[np.ndarray] = None

    @property
    def size(self):
        return len(self.final)


@dataclass(frozen=True)
class _HeatTask:
    model: HeatModel
    nx: int
    schedule: tuple
    split: bool
    seed: int
    tag: object
    block: int
    size: int


def _simulate_heat_block(task):
    model = task.model
    rng = rng_stream(task.seed, (task.tag, task.block))
    dx = 1.0 / task.nx
    x = cell_centers(task.nx)
    v = np.broadcast_to(model.u0(x), (task.size, task.nx)).copy()
    anchor = sigma0 = mean = frozen = fluctuation = drift = None
    for segment, (n, dt) in enumerate(task.schedule):
        windowed = task.split and segment == 1
        if windowed:
            anchor = v.copy()
            sigma0 = model.sigma(anchor)
            mean = anchor.copy()
            frozen = anchor.copy()
            fluctuation = np.zeros_like(v)
            drift = np.zeros_like(v)
        scale = math.sqrt(dt / dx)
        for _ in range(n):
            xi = scale * rng.standard_normal((task.size, task.nx))
            s = model.sigma(v)
            b = dt * model.drift(v)
            v = _neumann_step(v, dt, dx) + b + s * xi
            if windowed:
                mean = _neumann_step(mean, dt, dx)
                frozen = _neumann_step(frozen, dt, dx) + sigma0 * xi
                fluctuation = _neumann_step(fluctuation, dt, dx) + (s - sigma0) * xi
                drift = _neumann_step(drift, dt, dx) + b
    return HeatEnsemble(x, v, anchor, sigma0, mean, frozen, fluctuation, drift)


def _concatenate(parts):
    def stack(name):
        values = [getattr(p, name) for p in parts]
        return None if values[0] is None else np.concatenate(values, axis=0)

    names = ("final", "anchor", "anchor_sigma", "mean", "frozen", "fluctuation", "drift")
    return HeatEnsemble(parts[0].x, *(stack(name) for name in names))


def _run(model, nx, schedule, split, n_real, seed, tag, workers):
    tasks = [
        _HeatTask(model, nx, schedule, split, seed, tag, block, size)
        for block, size in enumerate(split_blocks(n_real, BLOCK_SIZE))
    ]
    ensemble = _concatenate(map_blocks(_simulate_heat_block, tasks, workers))
    logger.debug("%s: %d realizations on %d cells, schedule %s", tag, n_real, nx, schedule)
    return ensemble


@dataclass
class HeatField:
    """Endpoint profiles u(T, x_j), one row per realization."""

    x: np.ndarray
    values: np.ndarray
    T: float
    dt: float

    @property
    def size(self):
        return len(self.values)

    def at(self, points):
        """Values in the cells containing ``points``."""
        return self.values[:, cell_index(points, len(self.x))]


def walsh_simulate(model, T, nx, nt, n_real, seed, workers=1):
    """Explicit finite differences for du = u_xx dt + b(u) dt + sigma(u) W(dx, dt)."""
    if nt < STABILITY * nx**2 * T:
        raise UnstableGrid(f"nt = {nt} is below {STABILITY:g} nx^2 T = {STABILITY * nx**2 * T:g}")
    dt = T / nt
    ensemble = _run(model, nx, ((nt, dt),), False, n_real, seed, "walsh", workers)
    return HeatField(ensemble.x, ensemble.final, T, dt)


def _window_schedule(T, eps, nx):
    dt_max = 1.0 / (STABILITY * nx**2)
    n1 = max(1, math.ceil((T - eps) / dt_max))
    n2 = max(MIN_WINDOW_STEPS, math.ceil(eps / dt_max))
    return ((n1, (T - eps) / n1), (n2, eps / n2))


# decomposition ----------------------------------------------------------------------------


@dataclass
class S4Decomposition:
    eps: float
    T: float
    points: np.ndarray
    cells: np.ndarray
    schedule: tuple
    ensemble: HeatEnsemble

    @property
    def full(self):
        return self.ensemble.final[:, self.cells]

    @property
    def frozen(self):
        return self.ensemble.frozen[:, self.cells]

    @property
    def fluctuation(self):
        return self.ensemble.fluctuation[:, self.cells]

    @property
    def drift(self):
        return self.ensemble.drift[:, self.cells]

    @property
    def residual(self):
        e = self.ensemble
        return float(np.max(np.abs(e.final - (e.frozen + e.fluctuation + e.drift))))

    def moments(self):
        n = self.ensemble.size
        out = {"eps": self.eps}
        for name, values in (("I2", self.fluctuation), ("J2", self.drift)):
            per_path = np.mean(values**2, axis=1)
            out[name] = float(per_path.mean())
            out[f"{name}_se"] = float(per_path.std(ddof=1) / math.sqrt(n))
        out["residual"] = self.residual
        return out


def s4_decomposition(model, T, eps, n_real, seed, nx=64, points=(0.5,), workers=1):
    """u(T) = u_eps(T) + I_eps(T) + J_eps(T) on common noise, sigma frozen at u(T - eps) for u_eps."""
    if not 0 < eps < T:
        raise ValueError(f"freeze window must satisfy 0 < eps < T, got eps={eps}, T={T}")
    points = np.atleast_1d(np.asarray(points, dtype=float))
    schedule = _window_schedule(T, eps, nx)
    ensemble = _run(model, nx, schedule, True, n_real, seed, ("heat-split", eps), workers)
    split = S4Decomposition(eps, T, points, cell_index(points, nx), schedule, ensemble)
    logger.debug("s4 eps=%g residual %.3g", eps, split.residual)
    return split


def chebyshev_tail_check(split, eta=None):
    """P(|u(T, y) - u(T - eps, y)| > eta) against its bound E|u(T, y) - u(T - eps, y)|^2 / eta^2.

    eta defaults to eps^{1/16}; ``constant`` is the second moment over sqrt(eps).
    """
    eta = split.eps ** (1 / 16) if eta is None else eta
    increment = split.full - split.ensemble.anchor[:, split.cells]
    tail = float(np.mean(np.abs(increment) > eta))
    moment = float(np.mean(increment**2))
    bound = moment / eta**2
    return {
        "eps": split.eps,
        "eta": eta,
        "tail": tail,
        "moment": moment,
        "bound": bound,
        "ratio": tail / bound if bound > 0 else 0.0,
        "constant": moment / math.sqrt(split.eps),
    }


MOMENT_COLUMNS = ("eps", "I2", "I2_se", "J2", "J2_se", "residual", "eta", "tail", "bound", "ratio", "constant")


@dataclass
class MomentTable:
    rows: list
    fit: Optional[object] = None

    def as_dict(self):
        return {"rows": self.rows, "fit": self.fit.as_dict() if self.fit is not None else None}

    def write_csv(self, path):
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=MOMENT_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: repr(float(row[k])) for k in MOMENT_COLUMNS})
        return path


def moment_statistics(model, T, eps_grid, n_real, seed, nx=64, points=(0.5,), workers=1):
    """Per-eps moments of I_eps and J_eps with the Chebyshev check, and the rate fit of E|I_eps|^2."""
    rows = []
    for eps in sorted(eps_grid, reverse=True):
        split = s4_decomposition(model, T, eps, n_real, seed, nx, points, workers)
        row = split.moments()
        row.update(chebyshev_tail_check(split))
        rows.append(row)
    fit = None
    try:
        fit = fit_rate([r["eps"] for r in rows], [r["I2"] for r in rows])
    except (ValueError, NonPositiveData) as exc:
        logger.info("no rate fit for E|I_eps|^2: %s", exc)
    else:
        logger.info("E|I_eps|^2 %s: slope %.3f, log exponent %.2f", model.label, fit.slope, fit.log_exponent)
    return MomentTable(rows, fit)


# regularity pipeline --------------------------------------------------------------------------


def _window_weights(nx, cells, n, dt):
    """dt/dx sum_{p < n} (P^p e_i)(y) (P^p e_j)(y) for the window step operator P."""
    dx = 1.0 / nx
    rows = np.zeros((len(cells), nx))
    rows[np.arange(len(cells)), cells] = 1.0
    out = np.zeros((len(cells), len(cells), nx))
    for _ in range(n):
        out += rows[:, None, :] * rows[None, :, :]
        rows = _neumann_step(rows, dt, dx)
    return out * dt / dx


def conditional_covariance(split):
    """Covariance of u_eps(T, points) given the field at T - eps, one matrix per realization."""
    nx = len(split.ensemble.x)
    n, dt = split.schedule[1]
    weights = _window_weights(nx, split.cells, n, dt)
    return np.einsum("ijy,ry->rij", weights, split.ensemble.anchor_sigma**2)


def _mixture_norm(centers, covariances, m, e):
    n, d = centers.shape
    keep = np.linspace(0, n - 1, min(DENSITY_CENTERS, n)).astype(int)
    spread = np.sqrt(np.max(covariances[:, range(d), range(d)]))
    lo = centers.min(axis=0) - 4 * spread
    hi = centers.max(axis=0) + 4 * spread
    grid = GridFunction.from_function(lambda *c: np.zeros_like(c[0]), tuple(lo), tuple(hi), (DENSITY_POINTS[d],) * d)
    values = mixture_density(centers[keep], covariances[keep], grid.points()).reshape(grid.shape)
    return weighted_sobolev_orlicz_norm(grid.with_values(values), 2 * m, 2 * m, e)


def _resolve(params, defaults):
    out = dict(defaults)
    out.update({k: v for k, v in (params or {}).items() if v is not None})
    if isinstance(out["e"], str):
        out["e"] = from_label(out["e"])
    return out


def spde_verdict(model, points, T, params=None, eps_grid=DEFAULT_EPS, n_real=10_000, seed=0, nx=128, workers=1):
    """H_q verdict for the law of (u(T, x_1), ..., u(T, x_d)) from the frozen-coefficient approximants.

    u_eps(T, points) is Gaussian given the field at T - eps. The norm of the
    resulting mixture density is measured per eps and the largest eps
    calibrates R_eps = C eps^{-(2m+q)/4}; d_1 is the coupling bound
    E min(2, |u(T) - u_eps(T)|).
    """
    points, _ = _check_points(points)
    d = len(points)
    if d > 3:
        raise ValueError(f"at most 3 observation points are supported, got {d}")
    if not model.c_sigma > 0:
        raise ValueError("the regularity pipeline needs an ellipticity floor c_sigma > 0")
    cells = cell_index(points, nx)
    if len(set(cells.tolist())) < d:
        raise PointsTooClose(f"points {points} share a lattice cell at nx = {nx}")
    auto_m = max(3, int(math.floor(1 / (2 * model.h))) + 1) if model.h else 3
    p = _resolve(params, {"q": 0, "k": 1, "m": auto_m, "e": log_entropy(), "a": 1.05})
    q, k, m, e, a = p["q"], p["k"], p["m"], p["e"], p["a"]
    ones = lambda x: np.ones(len(x))

    levels = []
    for eps in sorted(eps_grid, reverse=True):
        split = s4_decomposition(model, T, eps, n_real, seed, nx, points, workers)
        covariances = conditional_covariance(split)
        eig = np.linalg.eigvalsh(covariances) / math.sqrt(eps)
        _, d1, d1_se = coupled_distance(split.full, split.frozen, ones, 0.0)
        moments = split.moments()
        levels.append(
            {
                "eps": eps,
                "measured_norm": _mixture_norm(split.ensemble.mean[:, split.cells], covariances, m, e),
                "d1": d1,
                "d1_se": d1_se,
                "I2": moments["I2"],
                "J2": moments["J2"],
                "sigma_min_ratio": float(eig[:, 0].min()),
                "sigma_max_ratio": float(eig[:, -1].max()),
            }
        )
    # C is floored at 2 so that ln R stays positive along the curve
    exponent = (2 * m + q) / 4
    scale = max(levels[0]["measured_norm"], 2.0) * levels[0]["eps"] ** exponent
    for level in levels:
        level["R"] = scale * level["eps"] ** -exponent

    notes = []
    hq = None
    try:
        hq = hypothesis_Hq_statistic([(lv["R"], lv["d1"]) for lv in levels], q, k, m, e, a, d)
    except CurveTooShort as exc:
        notes.append(f"H_q not evaluated: {exc}")

    report = BalanceReport(
        parameters={"q": q, "k": k, "m": m, "e": e.label, "a": a, "points": points, "T": T},
        levels=levels,
        pi_value=float("nan"),
        pi_tail=float("nan"),
        statistic=hq.limsup if hq is not None else None,
        statistic_slope=hq.slope if hq is not None else None,
        verdict=hq.verdict if hq is not None else "inconclusive",
        provenance={
            "model": model.label,
            "realizations": n_real,
            "seed": seed,
            "nx": nx,
            "cells": cell_centers(nx)[cells],
            "scale": scale,
            "distance_side": "coupling upper bound",
            "sigma_min_ratio": min(lv["sigma_min_ratio"] for lv in levels),
            "sigma_max_ratio": max(lv["sigma_max_ratio"] for lv in levels),
        },
        notes=notes,
    )
    report.curves["distance"] = (
        np.array([lv["eps"] for lv in levels]),
        np.array([lv["d1"] for lv in levels]),
        np.array([lv["d1_se"] for lv in levels]),
    )
    if hq is not None:
        report.curves["statistic"] = (hq.R, hq.statistic, np.zeros(len(hq.R)))
    logger.info("spde %s at %s: %s", model.label, points, report.verdict)
    return report
