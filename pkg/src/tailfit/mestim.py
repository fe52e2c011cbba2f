"""Rank-based M-estimation of bivariate tail-dependence parameters.

The estimator matches rectangle integrals of the parametric survival-tail
function c_theta, up to an auxiliary scale zeta, against exact rectangle
integrals of the empirical tail functional.  The scale has a closed-form
inner minimizer, so the search runs over theta alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .empirical import RankedSample, TailIndexChoice, rect_integral_Q
from .errors import (
    DegenerateRectangle,
    NoTailData,
    SingularJ,
    UnsupportedFamily,
    ZeroModelVector,
)
from .families import (
    Rectangle,
    TailFamily,
    get_family,
    min_power_interval_integral,
)
from .optimize import minimize_multistart

__all__ = [
    "WeightScheme",
    "FitOptions",
    "BivariateFit",
    "WEIGHT_PRESETS",
    "default_weights",
    "preset_weights",
    "model_moment_vector",
    "empirical_moment_vector",
    "profile_zeta",
    "fit_bivariate",
    "plugin_covariance_AI",
]

ZETA_FLOOR = 1e-12

#: The five standard weighting rectangles.
STANDARD_RECTS = (
    Rectangle(0.0, 1.0, 0.0, 1.0),
    Rectangle(0.0, 2.0, 0.0, 2.0),
    Rectangle(0.5, 1.5, 0.5, 1.5),
    Rectangle(0.0, 1.0, 0.0, 3.0),
    Rectangle(0.0, 3.0, 0.0, 1.0),
)

#: Named subsets of the standard rectangles (0-based indices into STANDARD_RECTS).
WEIGHT_PRESETS = {
    "g1": (0, 1, 2, 3, 4),
    "g2": (0, 1),
    "g3": (0, 2),
    "g4": (0, 3, 4),
    "g5": (0, 1, 2),
    "g6": (0, 1, 3, 4),
    "g7": (0, 2, 3, 4),
}

#: Default reference parameter per family for normalizing the weights.
DEFAULT_THETA_REF = {
    "inverted_husler_reiss": (0.6,),
    "inverted_asym_logistic": (0.6, 0.6),
    "random_scale": (1.0,),
    "husler_reiss_ad": (1.0,),
    "asym_logistic_ad": (0.6, 0.6, 2.0),
}


@dataclass(frozen=True)
class WeightScheme:
    """Indicator weights on rectangles, normalized at a reference parameter."""

    rects: tuple
    norms: tuple  # a_j = integral of c_{theta_ref} over rects[j]
    theta_ref: tuple
    family_id: str

    def __post_init__(self):
        if len(self.rects) != len(self.norms):
            raise ValueError("rects and norms must have equal length")
        for rect, a in zip(self.rects, self.norms):
            if rect.area == 0.0:
                raise DegenerateRectangle(f"zero-area rectangle {rect}")
            if not a > 0.0:
                raise ValueError(f"nonpositive norm {a}")

    @property
    def q(self) -> int:
        return len(self.rects)

    @property
    def T(self) -> float:
        """Largest corner coordinate; the effective integration bound."""
        return max(max(r.x_hi, r.y_hi) for r in self.rects)


def _resolve_family(family) -> TailFamily:
    return family if isinstance(family, TailFamily) else get_family(family)


def default_weights(family, theta_ref=None, rects=STANDARD_RECTS) -> WeightScheme:
    """Weight scheme on the given rectangles, normalized at theta_ref."""
    fam = _resolve_family(family)
    if theta_ref is None:
        theta_ref = DEFAULT_THETA_REF[fam.family_id]
    theta_ref = tuple(float(t) for t in np.atleast_1d(theta_ref))
    fam.validate_theta(theta_ref)
    rects = tuple(rects)
    if len(rects) < len(theta_ref) + 1:
        raise ValueError(
            f"need at least {len(theta_ref) + 1} rectangles to identify "
            f"(theta, zeta), got {len(rects)}"
        )
    norms = tuple(fam.rect_integral(theta_ref, r) for r in rects)
    return WeightScheme(rects=rects, norms=norms, theta_ref=theta_ref, family_id=fam.family_id)


def preset_weights(family, name: str, theta_ref=None) -> WeightScheme:
    """Weight scheme for one of the named presets g1..g7."""
    idx = WEIGHT_PRESETS[name]
    return default_weights(family, theta_ref, rects=tuple(STANDARD_RECTS[i] for i in idx))


def model_moment_vector(family, theta, weights: WeightScheme) -> np.ndarray:
    """v(theta): normalized rectangle integrals of c_theta."""
    fam = _resolve_family(family)
    return fam.rect_integrals(theta, weights.rects) / np.asarray(weights.norms)


def empirical_moment_vector(sample: RankedSample, pair, k: int, weights: WeightScheme):
    """b: normalized exact rectangle integrals of the empirical tail functional."""
    return np.array(
        [
            rect_integral_Q(sample, pair, k, r) / a
            for r, a in zip(weights.rects, weights.norms)
        ]
    )


def profile_zeta(v, b, mode: str = "lsq") -> float:
    """Optimal positive scale for matching zeta*v to b.

    "lsq" is the exact minimizer <v,b>/<v,v> of the Euclidean objective;
    "ratio" is the ratio of component sums.  Both are floored at a small
    positive value.
    """
    v = np.asarray(v, dtype=float)
    b = np.asarray(b, dtype=float)
    if mode == "lsq":
        denom = float(np.dot(v, v))
        if denom <= 0.0:
            raise ZeroModelVector("model moment vector is zero")
        zeta = float(np.dot(v, b)) / denom
    elif mode == "ratio":
        denom = float(np.sum(v))
        if denom == 0.0:
            raise ZeroModelVector("model moment vector sums to zero")
        zeta = float(np.sum(b)) / denom
    else:
        raise ValueError(f"unknown zeta profile mode {mode!r}")
    return max(zeta, ZETA_FLOOR)


@dataclass(frozen=True)
class FitOptions:
    seed: int = 0
    n_restarts: int = 8
    fatol: float = 1e-8
    grid_halfwidth: float = 0.02
    grid_points: int = 9
    zeta_mode: str = "lsq"
    boundary_eps: float = 1e-3


@dataclass(frozen=True)
class BivariateFit:
    theta_hat: tuple
    zeta_hat: float
    sigma_hat: float
    eta_hat: float
    objective: float
    k_used: int
    m_used: float
    converged: bool
    boundary: bool
    n_restarts_used: int
    family_id: str


def _profiled_objective(fam, b, weights, zeta_mode):
    def obj(x):
        theta = fam.from_fit_params(x)
        if fam.domain_violation(theta):
            return np.inf
        v = model_moment_vector(fam, theta, weights)
        try:
            zeta = profile_zeta(v, b, zeta_mode)
        except ZeroModelVector:
            return np.inf
        return float(np.linalg.norm(zeta * v - b))

    return obj


def fit_bivariate(
    sample: RankedSample,
    pair,
    family,
    weights: WeightScheme,
    choice: TailIndexChoice,
    opts: FitOptions = FitOptions(),
) -> BivariateFit:
    """Minimum-distance fit of a tail family to one margin pair."""
    fam = _resolve_family(family)
    k = choice.resolved_k
    b = empirical_moment_vector(sample, pair, k, weights)
    if not np.any(b > 0.0):
        raise NoTailData(f"no joint tail mass at k={k}")
    m = choice.resolved_m
    if choice.mode == "fixed_k":
        m = sample.n * rect_diag_count(sample, pair, k)
    if m <= 0:
        raise NoTailData(f"no joint diagonal exceedances at k={k}")

    obj = _profiled_objective(fam, b, weights, opts.zeta_mode)
    res = minimize_multistart(
        obj,
        fam.fit_sampling_box or fam.sampling_box,
        seed=opts.seed,
        n_starts=opts.n_restarts,
        fatol=opts.fatol,
        grid_halfwidth=opts.grid_halfwidth,
        grid_points=opts.grid_points,
    )
    theta_hat = fam.canonicalize(fam.from_fit_params(res.x))
    v = model_moment_vector(fam, theta_hat, weights)
    zeta_hat = profile_zeta(v, b, opts.zeta_mode)
    return BivariateFit(
        theta_hat=theta_hat,
        zeta_hat=zeta_hat,
        sigma_hat=sample.n * zeta_hat / m,
        eta_hat=fam.eta(theta_hat),
        objective=float(np.linalg.norm(zeta_hat * v - b)),
        k_used=k,
        m_used=float(m),
        converged=res.converged,
        boundary=fam.near_boundary(theta_hat, opts.boundary_eps),
        n_restarts_used=res.n_restarts_used,
        family_id=fam.family_id,
    )


def rect_diag_count(sample: RankedSample, pair, k: int) -> float:
    """Fraction of observations jointly exceeding the diagonal level k."""
    from .empirical import empirical_Q

    return empirical_Q(sample, pair, k, 1.0, 1.0)


def _covariance_A(fam, theta, weights: WeightScheme) -> np.ndarray:
    """A_{jl} = integral of c(x ^ x', y ^ y') over I_j x I_l, normalized.

    For product-form c = x^p y^q the 4-d integral factorizes into two
    1-d min-power integrals.
    """
    p, q = fam.exponents(theta)
    rects = weights.rects
    nr = len(rects)
    A = np.empty((nr, nr))
    for j in range(nr):
        for l in range(j, nr):
            rj, rl = rects[j], rects[l]
            wx = min_power_interval_integral(p, rj.x_lo, rj.x_hi, rl.x_lo, rl.x_hi)
            wy = min_power_interval_integral(q, rj.y_lo, rj.y_hi, rl.y_lo, rl.y_hi)
            A[j, l] = A[l, j] = wx * wy / (weights.norms[j] * weights.norms[l])
    return A


def plugin_covariance_AI(
    sample: RankedSample,
    pair,
    family,
    fit: BivariateFit,
    weights: WeightScheme,
    fd_step: float = 1e-5,
) -> np.ndarray:
    """Plug-in sampling covariance of (theta_hat, sigma_hat).

    Valid for the asymptotically independent product-form families; the
    tail-process covariance kernel is then c(x ^ x', y ^ y'), which makes
    the middle matrix A available in closed form.
    """
    fam = _resolve_family(family)
    theta0 = fam.validate_theta(fit.theta_hat)
    if fam.is_asymptotically_dependent(theta0) or not hasattr(fam, "exponents"):
        raise UnsupportedFamily(
            f"plug-in covariance needs a product-form tail family, got {fam.family_id}"
        )
    theta = np.asarray(fit.theta_hat, dtype=float)
    p = theta.size
    v_hat = model_moment_vector(fam, theta, weights)

    # J: derivative of sigma*v(theta) - v(theta_hat) at (theta_hat, sigma=1).
    J = np.empty((weights.q, p + 1))
    for i in range(p):
        h = fd_step * max(abs(theta[i]), 1.0)
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        # fall back to a one-sided stencil when the estimate sits on the
        # boundary of the parameter domain
        if fam.domain_violation(tp):
            tp = theta.copy()
        if fam.domain_violation(tm):
            tm = theta.copy()
        span = tp[i] - tm[i]
        if span <= 0.0:
            raise SingularJ(
                f"cannot difference component {i} at theta {theta} near the boundary"
            )
        J[:, i] = (
            model_moment_vector(fam, tp, weights) - model_moment_vector(fam, tm, weights)
        ) / span
    J[:, p] = v_hat

    A = _covariance_A(fam, theta, weights)
    JtJ = J.T @ J
    eigvals = np.linalg.eigvalsh(JtJ)
    if eigvals[0] < 1e-10:
        raise SingularJ(f"J'J nearly singular (min eigenvalue {eigvals[0]:.2e})")
    JtJ_inv = np.linalg.inv(JtJ)
    Sigma = JtJ_inv @ J.T @ A @ J @ JtJ_inv
    return Sigma / fit.m_used
