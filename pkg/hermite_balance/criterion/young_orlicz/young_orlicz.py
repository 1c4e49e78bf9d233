# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Young functions, Luxembourg norms and weighted Sobolev-Orlicz norms."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from hermite_balance.criterion.gridfn import DERIVATIVE_BUFFER, GridFunction, fit_rate, multi_indices
from hermite_balance.exceptions import InvalidYoungFunction, NonIntegrable

logger = logging.getLogger(__name__)

CERTIFY_GRID = np.logspace(-8, 8, 321)
ROOT_RTOL = 1e-10
MAX_ITER = 200
OVERFLOW_GUARD = 1e300


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """A symmetric gauge e with its certified doubling constant.

    ``kind`` selects analytic fast paths: "power" (with ``p``), "log_entropy",
    "loglog", "conjugate_power", "conjugate_log_entropy" or "user".
    """

    evaluator: Callable
    label: str
    kind: str = "user"
    p: Optional[float] = None
    doubling_constant: float = float("inf")
    monotone_slope_flag: bool = False
    certified: bool = field(default=False, repr=False)

    def __call__(self, t):
        with np.errstate(over="ignore", invalid="ignore"):
            return self.evaluator(np.abs(np.asarray(t, dtype=float)))


def make_young(evaluator, label, kind="user", p=None, certify=True):
    """Wrap ``evaluator`` (acting on |t|) and certify the growth conditions on a grid.

    Raises InvalidYoungFunction when e(0) != 0, e is not strictly increasing,
    the doubling ratio e(2s)/e(s) is not finite, or e(s)/s decreases.
    """
    e = YoungFunction(evaluator, label, kind, p)
    if not certify:
        return e

    s = CERTIFY_GRID
    values = e(s)
    if float(e(0.0)) != 0.0:
        raise InvalidYoungFunction(f"{label}: e(0) must vanish")
    if not np.all(np.isfinite(values)) or np.any(np.diff(values) <= 0):
        raise InvalidYoungFunction(f"{label}: e must be finite and strictly increasing on (0, inf)")
    ratio = e(2 * s) / values
    if not np.all(np.isfinite(ratio)):
        raise InvalidYoungFunction(f"{label}: doubling ratio e(2s)/e(s) is unbounded")
    slope = values / s
    monotone = bool(np.all(np.diff(slope) >= -1e-9 * slope[1:]))
    if not monotone:
        raise InvalidYoungFunction(f"{label}: e(s)/s must be nondecreasing")
    return YoungFunction(
        evaluator,
        label,
        kind,
        p,
        doubling_constant=float(np.max(ratio)),
        monotone_slope_flag=monotone,
        certified=True,
    )


def power(p):
    p = float(p)
    if p <= 1:
        raise InvalidYoungFunction(f"power(p) needs p > 1, got {p}")
    return make_young(lambda t: t**p, f"power({p:g})", kind="power", p=p)


def log_entropy():
    return make_young(lambda t: (1 + t) * np.log1p(t), "log_entropy", kind="log_entropy")


def loglog():
    return make_young(lambda t: (1 + t) * np.log1p(np.log1p(t)), "loglog", kind="loglog")


def from_label(label):
    """Builtin lookup: ``power(p)``, ``log_entropy`` or ``loglog``."""
    label = label.strip()
    if label == "log_entropy":
        return log_entropy()
    if label == "loglog":
        return loglog()
    if label.startswith("power(") and label.endswith(")"):
        return power(float(label[len("power(") : -1]))
    raise InvalidYoungFunction(f"unknown Young function {label!r}")


# derived quantities ------------------------------------------------------------------


def conjugate(e):
    """Legendre conjugate e*(s) = sup_{t>=0} (st - e(t))."""
    if e.kind == "power":
        p = e.p
        q = p / (p - 1)
        const = (p - 1) * p ** (-q)
        return make_young(lambda s: const * s**q, f"conj({e.label})", kind="conjugate_power", p=q, certify=False)
    if e.kind == "log_entropy":
        # maximizer t = exp(s-1) - 1 for s > 1
        def evaluator(s):
            s = np.asarray(s, dtype=float)
            return np.where(s > 1, np.exp(s - 1) - s, 0.0)

        return make_young(evaluator, f"conj({e.label})", kind="conjugate_log_entropy", certify=False)

    def evaluator(s):
        s = np.asarray(s, dtype=float)
        flat = np.array([_legendre(e, v) for v in s.ravel()])
        return flat.reshape(s.shape)

    return make_young(evaluator, f"conj({e.label})", kind="user", certify=False)


def _legendre(e, s):
    if s <= 0:
        return 0.0
    upper = 1.0
    while upper * s - float(e(upper)) > 0 and upper < 1e150:
        upper *= 2.0
    result = optimize.minimize_scalar(
        lambda t: -(s * t - float(e(t))), bounds=(0.0, upper), method="bounded", options={"xatol": 1e-12 * upper}
    )
    return max(0.0, -float(result.fun))


def inverse(e, a):
    """e^{-1}(a) = sup{c >= 0 : e(c) <= a}."""
    a = float(a)
    if a <= 0:
        return 0.0
    if e.kind in ("power", "conjugate_power"):
        return (a / _power_scale(e)) ** (1.0 / e.p)
    upper = 1.0
    while float(e(upper)) < a:
        upper *= 2.0
        if upper > 1e300:
            raise NonIntegrable(f"{e.label}: e never reaches {a}")
    lower = 0.0 if float(e(upper / 2)) >= a else upper / 2
    return optimize.brentq(lambda c: float(e(c)) - a, lower, upper, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=MAX_ITER)


def _power_scale(e):
    return float(e(1.0))


def beta_e(e, R):
    """Fundamental function beta_e(R) = R / e^{-1}(R)."""
    R = float(R)
    if R <= 0:
        raise ValueError(f"beta_e needs R > 0, got {R}")
    return R / inverse(e, R)


def phi_e(e, r):
    """phi_e(r) = 1 / e^{-1}(1/r)."""
    r = float(r)
    if r <= 0:
        raise ValueError(f"phi_e needs r > 0, got {r}")
    return 1.0 / inverse(e, 1.0 / r)


def growth_exponents(e, R_grid):
    """Fit beta_e(R) ~ R^alpha (ln R)^gamma over ``R_grid`` (all R > 1)."""
    R = np.asarray(R_grid, dtype=float)
    fit = fit_rate(R, [beta_e(e, v) for v in R])
    return fit.exponent, fit.log_exponent


# norms ----------------------------------------------------------------------------


def _modular(values, weights, e, c):
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sum(weights * e(values / c)))


def luxembourg_norm(f, e):
    """Smallest c with sum_i w_i e(f_i / c) <= 1, by bracketing and bisection."""
    values = np.abs(f.values)
    if not np.any(values):
        return 0.0
    weights = f.weights

    seed = float(np.sum(weights * values)) + float(values.max())
    upper = seed
    steps = 0
    while not _modular(values, weights, e, upper) <= 1.0:
        upper *= 2.0
        steps += 1
        if steps > MAX_ITER or upper > OVERFLOW_GUARD:
            raise NonIntegrable(f"{e.label}: modular stays above 1 for every bracketing c")
    lower = upper / 2.0
    while _modular(values, weights, e, lower) <= 1.0:
        upper = lower
        lower /= 2.0

    norm = optimize.bisect(
        lambda c: _modular(values, weights, e, c) - 1.0, lower, upper, rtol=ROOT_RTOL, maxiter=MAX_ITER
    )
    logger.debug("luxembourg_norm %s bracket=[%.3g, %.3g] norm=%.10g", e.label, lower, upper, norm)
    return float(norm)


def weighted_sobolev_orlicz_norm(f, k, l, e):
    """Sum over |gamma| <= l, |alpha| <= k of ||x^gamma d_alpha f||_(e).

    Derivatives come from second-order differences; for k >= 1 the outer
    DERIVATIVE_BUFFER points of every axis are left out of the norms.
    """
    k = int(k)
    l = int(l)
    pad = DERIVATIVE_BUFFER if k > 0 else 0
    coords = [c for c in f.crop(pad).mesh()]
    total = 0.0
    for alpha in multi_indices(f.dim, k):
        derivative = f.derivative(alpha).crop(pad) if any(alpha) else f.crop(pad)
        for gamma in multi_indices(f.dim, l):
            weight = np.ones(derivative.shape)
            for axis, power_ in enumerate(gamma):
                if power_:
                    weight = weight * coords[axis] ** power_
            total += luxembourg_norm(derivative.with_values(weight * derivative.values), e)
    return total


def sobolev_orlicz_norm(f, k, e):
    return weighted_sobolev_orlicz_norm(f, k, 0, e)


def sup_sobolev_norm(f, k):
    """||f||_{k,inf}: sum over |alpha| <= k of sup |d_alpha f|."""
    pad = DERIVATIVE_BUFFER if k > 0 else 0
    total = 0.0
    for alpha in multi_indices(f.dim, int(k)):
        derivative = f.derivative(alpha) if any(alpha) else f
        total += float(np.max(np.abs(derivative.crop(pad).values)))
    return total


def holder_defect(f, g, e):
    """2 ||f||_(e) ||g||_(e*) - |int f g|; nonnegative up to root tolerance."""
    if f.shape != g.shape or f.lo != g.lo or f.hi != g.hi:
        raise ValueError("holder_defect needs both functions on the same grid")
    return 2.0 * luxembourg_norm(f, e) * luxembourg_norm(g, conjugate(e)) - abs(f.integrate(f.values * g.values))


def u_weight_bound(e, l, d=1, half_width=200.0, points=20001):
    """Return (||(1+|x|)^{-l}||_(e), max(e(1) ||u_l||_1, 1)) on a centred box."""
    if l <= d:
        raise ValueError(f"u_l is integrable only for l > d, got l={l}, d={d}")
    shape = (points,) if d == 1 else (int(points ** (1.0 / d)),) * d
    u = GridFunction.from_function(
        lambda *c: (1 + np.sqrt(sum(x**2 for x in c))) ** (-float(l)),
        (-half_width,) * d,
        (half_width,) * d,
        shape,
    )
    return luxembourg_norm(u, e), max(float(e(1.0)) * u.integrate(), 1.0)


def rho_norm_bound_ratio(e, n, d=1):
    """||(1+2^n|z|)^{-(d+1)}||_(e) divided by 2^{-nd} beta_e(2^{nd}), in d = 1.

    The profile is integrated in the rescaled variable s = 2^n z by adaptive
    quadrature; the ratio stays bounded in n.
    """
    if d != 1:
        raise ValueError("rho_norm_bound_ratio is implemented for d = 1")
    scale = 2.0 ** (-n * d)

    def modular(c):
        value, _ = integrate.quad(lambda s: float(e((1 + s) ** -2.0 / c)), 0.0, np.inf, limit=200)
        return 2.0 * scale * value

    upper = 1.0
    while modular(upper) > 1.0:
        upper *= 2.0
    lower = upper / 2.0
    while modular(lower) <= 1.0:
        upper = lower
        lower /= 2.0
    norm = optimize.brentq(lambda c: modular(c) - 1.0, lower, upper, rtol=1e-10)
    return norm / (scale * beta_e(e, 2.0 ** (n * d)))
