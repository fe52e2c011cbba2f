"""Spatial tail-dependence fitting through pairwise margins.

A stationary isotropic model links each pair of locations to a bivariate
inverted Hüsler-Reiss-type tail parameter through a fractal-variogram
map theta(Delta) = Phi((Delta/beta)^(alpha/2) / 2).  The spatial
parameter vartheta = (alpha, beta) is recovered either by least squares
on the pairwise estimates or by minimizing all pairwise moment
objectives jointly with per-pair profiled scales.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .empirical import RankedSample, select_khat
from .errors import (
    NoTailData,
    NonPositiveZeta,
    ParamOutOfRange,
    SpatialNoData,
    Underidentified,
    ZeroModelVector,
)
from .families import get_family, norm_cdf
from .mestim import (
    BivariateFit,
    FitOptions,
    WeightScheme,
    empirical_moment_vector,
    fit_bivariate,
    model_moment_vector,
    profile_zeta,
)
from .optimize import minimize_multistart

__all__ = ["SpatialModel", "SpatialFit", "link_theta", "pairwise_fits",
           "fit_least_squares", "fit_joint"]

#: vartheta = (alpha, beta) domain: alpha in (0, 2], beta > 0.
ALPHA_MAX = 2.0


@dataclass(frozen=True)
class SpatialModel:
    """Locations, the pair list, and the variogram-link specification."""

    coords: np.ndarray  # d x 2
    link: str = "fractal_variogram_ihr"
    bivariate_family: str = "inverted_husler_reiss"

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2 or coords.shape[0] < 2:
            raise ValueError("coords must be a d x 2 matrix with d >= 2")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coords must be finite")
        if self.link != "fractal_variogram_ihr":
            raise ValueError(f"unknown link {self.link!r}")
        object.__setattr__(self, "coords", coords)
        dists = self.distances
        if np.any(dists <= 0.0):
            raise ValueError("duplicate locations (zero pairwise distance)")

    @property
    def d(self) -> int:
        return self.coords.shape[0]

    @property
    def pairs(self):
        d = self.d
        return [(i, j) for i in range(d) for j in range(i + 1, d)]

    @property
    def distances(self) -> np.ndarray:
        diffs = self.coords[:, None, :] - self.coords[None, :, :]
        dm = np.sqrt((diffs ** 2).sum(-1))
        return np.array([dm[i, j] for i, j in self.pairs])


def _check_vartheta(vartheta):
    alpha, beta = float(vartheta[0]), float(vartheta[1])
    if not (0.0 < alpha <= ALPHA_MAX) or not beta > 0.0:
        raise ParamOutOfRange(f"vartheta {(alpha, beta)} outside (0,2]x(0,inf)")
    return alpha, beta


def theta_of_distance(vartheta, delta):
    """theta(Delta) = Phi((Delta/beta)^(alpha/2) / 2), vectorized in delta."""
    alpha, beta = _check_vartheta(vartheta)
    delta = np.asarray(delta, dtype=float)
    out = norm_cdf((delta / beta) ** (alpha / 2.0) / 2.0)
    return out if out.ndim else float(out)


def link_theta(model: SpatialModel, vartheta, s: int) -> float:
    """Bivariate tail parameter implied by vartheta for pair index s."""
    return float(theta_of_distance(vartheta, model.distances[s]))


@dataclass(frozen=True)
class SpatialFit:
    vartheta_hat: tuple
    method: str  # "least_squares" | "joint"
    objective: float
    m_used: int
    pairs_used: tuple
    pairwise_thetas: tuple = ()
    zeta_hats: tuple = ()
    converged: bool = True


def pairwise_fits(
    sample: RankedSample,
    model: SpatialModel,
    m: int,
    weights: WeightScheme,
    opts: FitOptions = FitOptions(),
):
    """Independent bivariate fits for every location pair.

    Each pair gets its own threshold k from the common effective count m.
    Pairs whose fit fails are dropped with a warning; the returned dict
    maps pair index -> BivariateFit.
    """
    fam = get_family(model.bivariate_family)
    fits = {}
    for s, pair in enumerate(model.pairs):
        try:
            choice = select_khat(sample, pair, m)
            fits[s] = fit_bivariate(sample, pair, fam, weights, choice, opts)
        except (NoTailData, ZeroModelVector) as exc:
            warnings.warn(f"pair {pair} dropped: {exc}", stacklevel=2)
    if not fits:
        raise SpatialNoData("every pair failed to fit")
    return fits


def _vartheta_box(model: SpatialModel):
    """Sampling box for (alpha, beta) sized to the observed distances."""
    dmax = float(np.max(model.distances))
    dmin = float(np.min(model.distances))
    return ((0.1, ALPHA_MAX), (0.1 * dmin, 3.0 * dmax))


def _require_identifiable(model: SpatialModel, usable):
    deltas = model.distances[list(usable)]
    if len(usable) < 2 or np.unique(np.round(deltas, 12)).size < 2:
        raise Underidentified(
            "need at least two pairs at distinct distances to identify (alpha, beta)"
        )


def fit_least_squares(
    pairwise_thetas: dict,
    model: SpatialModel,
    opts: FitOptions = FitOptions(),
) -> SpatialFit:
    """Least-squares aggregation of pairwise tail parameters.

    ``pairwise_thetas`` maps pair index -> theta estimate (scalar or
    BivariateFit).
    """
    usable = sorted(pairwise_thetas)
    _require_identifiable(model, usable)
    theta_hat = np.array(
        [
            pairwise_thetas[s].theta_hat[0]
            if isinstance(pairwise_thetas[s], BivariateFit)
            else float(np.atleast_1d(pairwise_thetas[s])[0])
            for s in usable
        ]
    )
    deltas = model.distances[usable]

    def obj(vartheta):
        alpha, beta = vartheta
        if not (0.0 < alpha <= ALPHA_MAX) or not beta > 0.0:
            return np.inf
        resid = theta_of_distance((alpha, beta), deltas) - theta_hat
        return float(np.dot(resid, resid))

    res = minimize_multistart(
        obj, _vartheta_box(model), seed=opts.seed, n_starts=opts.n_restarts,
        fatol=opts.fatol, grid_halfwidth=opts.grid_halfwidth,
        grid_points=opts.grid_points,
    )
    return SpatialFit(
        vartheta_hat=(float(res.x[0]), float(res.x[1])),
        method="least_squares",
        objective=res.fun,
        m_used=0,
        pairs_used=tuple(usable),
        pairwise_thetas=tuple(float(t) for t in theta_hat),
        converged=res.converged,
    )


def fit_joint(
    sample: RankedSample,
    model: SpatialModel,
    m: int,
    weights: WeightScheme,
    opts: FitOptions = FitOptions(),
) -> SpatialFit:
    """Joint minimization over vartheta of all pairwise moment objectives.

    For each candidate vartheta the per-pair scale is profiled out in
    closed form and the squared moment-matching errors are summed over
    pairs.
    """
    fam = get_family(model.bivariate_family)
    usable, bs = [], []
    for s, pair in enumerate(model.pairs):
        try:
            choice = select_khat(sample, pair, m)
            b = empirical_moment_vector(sample, pair, choice.resolved_k, weights)
        except Exception as exc:  # noqa: BLE001 - record and drop the pair
            warnings.warn(f"pair {pair} dropped: {exc}", stacklevel=2)
            continue
        if not np.any(b > 0.0):
            warnings.warn(f"pair {pair} dropped: no joint tail mass", stacklevel=2)
            continue
        usable.append(s)
        bs.append(b)
    if not usable:
        raise SpatialNoData("every pair failed to produce a moment vector")
    _require_identifiable(model, usable)
    deltas = model.distances[usable]
    theta_lo, theta_hi = 0.5, 1.0

    B = np.array(bs)
    xlo = np.array([r.x_lo for r in weights.rects])
    xhi = np.array([r.x_hi for r in weights.rects])
    ylo = np.array([r.y_lo for r in weights.rects])
    yhi = np.array([r.y_hi for r in weights.rects])
    norms = np.asarray(weights.norms)
    fast = model.bivariate_family == "inverted_husler_reiss"

    def moment_matrix(thetas):
        """v(theta) for every pair at once (closed form, c = (xy)^theta)."""
        p1 = thetas[:, None] + 1.0
        fx = (xhi[None, :] ** p1 - xlo[None, :] ** p1) / p1
        fy = (yhi[None, :] ** p1 - ylo[None, :] ** p1) / p1
        return fx * fy / norms[None, :]

    def obj(vartheta):
        alpha, beta = vartheta
        if not (0.0 < alpha <= ALPHA_MAX) or not beta > 0.0:
            return np.inf
        thetas = np.clip(
            theta_of_distance((alpha, beta), deltas), theta_lo + 1e-7, theta_hi
        )
        if fast:
            V = moment_matrix(thetas)
            zetas = np.maximum(
                (V * B).sum(1) / (V * V).sum(1)
                if opts.zeta_mode == "lsq"
                else B.sum(1) / V.sum(1),
                1e-12,
            )
            resid = zetas[:, None] * V - B
            return float((resid ** 2).sum())
        total = 0.0
        for th, b in zip(thetas, bs):
            v = model_moment_vector(fam, (float(th),), weights)
            zeta = profile_zeta(v, b, opts.zeta_mode)
            resid = zeta * v - b
            total += float(np.dot(resid, resid))
        return total

    res = minimize_multistart(
        obj, _vartheta_box(model), seed=opts.seed, n_starts=opts.n_restarts,
        fatol=opts.fatol, grid_halfwidth=opts.grid_halfwidth,
        grid_points=opts.grid_points,
    )
    vartheta = (float(res.x[0]), float(res.x[1]))
    thetas = theta_of_distance(vartheta, deltas)
    zetas = []
    for th, b in zip(thetas, bs):
        th = min(max(float(th), theta_lo + 1e-7), theta_hi)
        v = model_moment_vector(fam, (th,), weights)
        zeta = profile_zeta(v, b, opts.zeta_mode)
        if zeta <= 0.0:
            raise NonPositiveZeta(f"profiled scale nonpositive for a pair at theta={th}")
        zetas.append(zeta)
    return SpatialFit(
        vartheta_hat=vartheta,
        method="joint",
        objective=res.fun,
        m_used=m,
        pairs_used=tuple(usable),
        pairwise_thetas=tuple(float(t) for t in thetas),
        zeta_hats=tuple(zetas),
        converged=res.converged,
    )
