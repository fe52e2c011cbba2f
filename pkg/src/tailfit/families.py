"""Parametric survival-tail function families.

Each family evaluates c_theta(x, y), its homogeneity index 1/eta, the
extremal dependence coefficient chi, and exact rectangle integrals of
c_theta.  The two inverted max-stable families have product form
c(x, y) = x^p y^q and admit closed-form integrals; the random scale model
is a linear combination of min/max power terms which also integrates in
closed form away from the boundary regime; the asymptotically dependent
families fall back on adaptive quadrature with a diagonal split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateRectangle, ParamOutOfRange, ThetaOutOfDomain
from .quadrature import _gl_nodes as _gl_cache, integrate_1d, integrate_rect

# margin used to keep optimizers off open parameter-space boundaries
EPS_THETA = 1e-8

HR_INF = math.inf  # sentinel for the perfect-independence Husler-Reiss limit


@dataclass(frozen=True)
class Rectangle:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (0.0 <= self.x_lo <= self.x_hi and 0.0 <= self.y_lo <= self.y_hi):
            raise DegenerateRectangle(f"invalid rectangle bounds {self}")

    @property
    def area(self):
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    @property
    def max_corner(self):
        return max(self.x_hi, self.y_hi)


def norm_cdf(x):
    return ndtr(x)


def norm_quantile(p):
    from scipy.special import ndtri

    return ndtri(p)


# ---------------------------------------------------------------------------
# stable tail dependence functions
# ---------------------------------------------------------------------------

def stdf_husler_reiss(lam, x, y):
    """Husler-Reiss stable tail dependence function.

    lam = 0 gives complete dependence (max), lam = math.inf gives
    independence (x + y); the infinite case is branched on, never used in
    arithmetic.
    """
    if lam < 0:
        raise ParamOutOfRange("Husler-Reiss parameter must be >= 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ParamOutOfRange("stdf arguments must be non-negative")
    if math.isinf(lam):
        return x + y
    if lam == 0.0:
        res = np.maximum(x, y)
        return res if res.ndim else float(res)
    x, y = np.broadcast_arrays(x, y)
    pos = (x > 0) & (y > 0)
    xs = np.where(pos, x, 1.0)
    ys = np.where(pos, y, 1.0)
    w = (np.log(xs) - np.log(ys)) / (2.0 * lam)
    val = xs * ndtr(lam + w) + ys * ndtr(lam - w)
    out = np.where(pos, val, x + y)  # l(x, 0) = x, l(0, y) = y
    return out if out.ndim else float(out)


def stdf_husler_reiss_dx(lam, x, y):
    """Partial derivative of the Husler-Reiss stdf in its first argument."""
    if math.isinf(lam):
        return np.ones_like(np.asarray(x, dtype=float))
    if lam == 0.0:
        return (np.asarray(x, float) >= np.asarray(y, float)).astype(float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return ndtr(lam + (np.log(x) - np.log(y)) / (2.0 * lam))


def stdf_asym_logistic(nu, phi, r, x, y):
    """Asymmetric logistic stable tail dependence function of Tawn."""
    if not (0.0 <= nu <= 1.0 and 0.0 <= phi <= 1.0 and r >= 1.0):
        raise ParamOutOfRange("asymmetric logistic requires nu,phi in [0,1], r >= 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ParamOutOfRange("stdf arguments must be non-negative")
    a = nu * x
    b = phi * y
    m = np.maximum(a, b)
    ms = np.where(m > 0.0, m, 1.0)
    rnorm = m * ((a / ms) ** r + (b / ms) ** r) ** (1.0 / r)
    res = (1.0 - nu) * x + (1.0 - phi) * y + rnorm
    return res if res.ndim else float(res)


def stdf_asym_logistic_dx(nu, phi, r, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = nu * x
    b = phi * y
    m = np.maximum(np.maximum(a, b), 1e-300)
    s = ((a / m) ** r + (b / m) ** r) ** (1.0 / r - 1.0)
    return (1.0 - nu) + nu * (a / m) ** (r - 1.0) * s


def eval_stdf(kind, params, x, y):
    """Evaluate a stable tail dependence function by name.

    kind is "husler_reiss" (params: lam) or "asym_logistic"
    (params: (nu, phi, r)).
    """
    if kind == "husler_reiss":
        (lam,) = np.atleast_1d(params) if not np.isscalar(params) else (params,)
        return stdf_husler_reiss(float(lam), x, y)
    if kind == "asym_logistic":
        nu, phi, r = params
        return stdf_asym_logistic(float(nu), float(phi), float(r), x, y)
    raise ParamOutOfRange(f"unknown stdf kind {kind!r}")


# ---------------------------------------------------------------------------
# closed-form building blocks
# ---------------------------------------------------------------------------

def _corner_minmax_power(p, q, X, Y):
    """Integral of (x^y-min)^p (x^y-max)^q over [0, X] x [0, Y].

    Requires p > -1 and p + q + 2 > 0; q may be any real (including -1,
    which produces a logarithm).
    """
    if X <= 0.0 or Y <= 0.0:
        return 0.0
    swap = Y > X
    if swap:
        X, Y = Y, X
    lead = 2.0 * Y ** (p + q + 2.0) / ((p + 1.0) * (p + q + 2.0))
    if q == -1.0:
        tail = Y ** (p + 1.0) * math.log(X / Y) / (p + 1.0)
    else:
        tail = (Y ** (p + 1.0) * X ** (q + 1.0) - Y ** (p + q + 2.0)) / ((p + 1.0) * (q + 1.0))
    return lead + tail


def minmax_power_rect_integral(p, q, rect: Rectangle):
    """Exact integral of min(x,y)^p max(x,y)^q over a rectangle."""
    G = _corner_minmax_power
    return (
        G(p, q, rect.x_hi, rect.y_hi)
        - G(p, q, rect.x_lo, rect.y_hi)
        - G(p, q, rect.x_hi, rect.y_lo)
        + G(p, q, rect.x_lo, rect.y_lo)
    )


def _corner_minmax_log(X, Y):
    """Integral of min*(1 + log(max/min)/2) over [0, X] x [0, Y].

    Antiderivative of the random-scale survival tail function at the
    lambda = 1 regime boundary.
    """
    if X <= 0.0 or Y <= 0.0:
        return 0.0
    if Y > X:
        X, Y = Y, X
    return (
        5.0 * Y ** 3 / 12.0
        + 3.0 * Y ** 2 * (X - Y) / 8.0
        + X * Y ** 2 * math.log(X / Y) / 4.0
    )


@lru_cache(maxsize=500_000)
def _homog_corner(family_id, theta_key, X, Y, rel_tol):
    """Corner integral of c over [0, X] x [0, Y] via boundary reduction.

    For c homogeneous of degree h, div((x, y) c) = (h + 2) c, so the corner
    integral reduces to two 1-D integrals along the outer edges (the axes
    contribute nothing).  Cached: the five default weight rectangles reuse
    corners heavily, and exchangeable families fold (X, Y) ~ (Y, X).
    """
    if X <= 0.0 or Y <= 0.0:
        return 0.0
    fam = get_family(family_id)
    theta = np.asarray(theta_key, dtype=float)
    h = 1.0 / fam.eta(theta)
    c = fam._c_unchecked

    gx = integrate_1d(lambda y: c(theta, np.full_like(y, X), y), 0.0, Y, rel_tol)
    if X == Y and fam.is_exchangeable(theta):
        gy = gx
    else:
        gy = integrate_1d(lambda x: c(theta, x, np.full_like(x, Y)), 0.0, X, rel_tol)
    return (X * gx + Y * gy) / (h + 2.0)


def homogeneous_rect_integral(family, theta, rect: Rectangle, rel_tol=1e-9):
    """Rectangle integral of a homogeneous c via cached corner integrals."""
    theta_key = tuple(float(t) for t in np.atleast_1d(theta))
    exch = family.is_exchangeable(np.asarray(theta_key))

    def corner(X, Y):
        if exch and Y > X:
            X, Y = Y, X
        return _homog_corner(family.family_id, theta_key, X, Y, rel_tol)

    return (
        corner(rect.x_hi, rect.y_hi)
        - corner(rect.x_lo, rect.y_hi)
        - corner(rect.x_hi, rect.y_lo)
        + corner(rect.x_lo, rect.y_lo)
    )


def _corner_min_power(p, X, Y):
    """Integral of min(x, x')^p over [0, X] x [0, Y] (p > -1)."""
    if X <= 0.0 or Y <= 0.0:
        return 0.0
    if Y > X:
        X, Y = Y, X
    return 2.0 * Y ** (p + 2.0) / ((p + 1.0) * (p + 2.0)) + Y ** (p + 1.0) * (X - Y) / (p + 1.0)


def min_power_interval_integral(p, lo1, hi1, lo2, hi2):
    """Exact integral of min(x, x')^p over [lo1, hi1] x [lo2, hi2]."""
    V = _corner_min_power
    return V(p, hi1, hi2) - V(p, lo1, hi2) - V(p, hi1, lo2) + V(p, lo1, lo2)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class TailFamily:
    """Base class: a parametric family of survival tail functions."""

    family_id: str
    parameter_dim: int
    # per-coordinate box used for optimizer starts (subset of the domain)
    sampling_box: tuple

    def validate_theta(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.parameter_dim,):
            raise ThetaOutOfDomain(
                f"{self.family_id}: expected {self.parameter_dim} parameters, got {theta.shape}"
            )
        if not np.all(np.isfinite(theta)) or not self.contains(theta):
            raise ThetaOutOfDomain(f"{self.family_id}: theta {theta} outside the domain")
        return theta

    def contains(self, theta) -> bool:
        raise NotImplementedError

    def domain_violation(self, theta) -> float:
        """Distance-like measure of how far theta is outside the domain."""
        raise NotImplementedError

    def near_boundary(self, theta, tol=1e-6) -> bool:
        raise NotImplementedError

    def c(self, theta, x, y):
        raise NotImplementedError

    def _c_unchecked(self, theta, x, y):
        """c without domain validation (hot quadrature path)."""
        return self.c(theta, x, y)

    def is_exchangeable(self, theta) -> bool:
        """Whether c_theta(x, y) = c_theta(y, x)."""
        return False

    def canonicalize(self, theta):
        """Canonical representative when c identifies theta only up to a class."""
        return tuple(float(t) for t in np.atleast_1d(theta))

    # Optimizer-facing parameterization.  Identity by default; families whose
    # c identifies theta only up to an equivalence class search a reduced
    # space instead and map back.
    fit_sampling_box = None  # defaults to sampling_box

    def from_fit_params(self, x):
        return tuple(float(t) for t in np.atleast_1d(x))

    def rect_integrals(self, theta, rects, rel_tol=1e-9):
        """Integrals of c_theta over several rectangles at once."""
        return np.array([self.rect_integral(theta, r, rel_tol) for r in rects])

    def eta(self, theta) -> float:
        raise NotImplementedError

    def chi(self, theta) -> float:
        raise NotImplementedError

    def is_asymptotically_dependent(self, theta) -> bool:
        return self.chi(theta) > 0.0

    def has_closed_form_integral(self, theta) -> bool:
        return False

    def rect_integral(self, theta, rect: Rectangle, rel_tol=1e-9):
        """Exact or adaptive-quadrature integral of c_theta over rect."""
        theta = self.validate_theta(theta)
        if rect.area == 0.0:
            return 0.0
        if self.has_closed_form_integral(theta):
            return self._rect_integral_closed(theta, rect)
        return self.rect_integral_quad(theta, rect, rel_tol)

    def rect_integral_quad(self, theta, rect: Rectangle, rel_tol=1e-9):
        """Adaptive quadrature route, available for every family."""
        theta = self.validate_theta(theta)
        if rect.area == 0.0:
            return 0.0

        def f(x, y):
            return self.c(theta, x, y)

        return integrate_rect(f, rect.x_lo, rect.x_hi, rect.y_lo, rect.y_hi, rel_tol)

    def _rect_integral_closed(self, theta, rect):
        raise NotImplementedError


class _ProductForm(TailFamily):
    """Families with c(x, y) = x^p y^q."""

    def exponents(self, theta):
        raise NotImplementedError

    def c(self, theta, x, y):
        p, q = self.exponents(theta)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        res = x ** p * y ** q
        return res if res.ndim else float(res)

    def has_closed_form_integral(self, theta):
        return True

    def _rect_integral_closed(self, theta, rect):
        p, q = self.exponents(theta)
        fx = (rect.x_hi ** (p + 1.0) - rect.x_lo ** (p + 1.0)) / (p + 1.0)
        fy = (rect.y_hi ** (q + 1.0) - rect.y_lo ** (q + 1.0)) / (q + 1.0)
        return fx * fy

    def chi(self, theta):
        return 0.0


class InvertedHuslerReiss(_ProductForm):
    """Inverted Husler-Reiss: c(x, y) = (xy)^theta, theta in (1/2, 1]."""

    family_id = "inverted_husler_reiss"
    parameter_dim = 1
    sampling_box = ((0.5 + 0.01, 1.0),)

    def contains(self, theta):
        return 0.5 + EPS_THETA <= theta[0] <= 1.0

    def domain_violation(self, theta):
        return max(0.5 + EPS_THETA - theta[0], theta[0] - 1.0, 0.0)

    def near_boundary(self, theta, tol=1e-6):
        return theta[0] <= 0.5 + EPS_THETA + tol or theta[0] >= 1.0 - tol

    def exponents(self, theta):
        return float(theta[0]), float(theta[0])

    def is_exchangeable(self, theta):
        return True

    def eta(self, theta):
        theta = self.validate_theta(theta)
        return 1.0 / (2.0 * float(theta[0]))


class InvertedAsymLogistic(_ProductForm):
    """Inverted asymmetric logistic: c = x^t1 y^t2 on (0,1]^2, t1+t2 > 1."""

    family_id = "inverted_asym_logistic"
    parameter_dim = 2
    sampling_box = ((0.3, 1.0), (0.3, 1.0))

    def contains(self, theta):
        return (
            EPS_THETA <= theta[0] <= 1.0
            and EPS_THETA <= theta[1] <= 1.0
            and theta[0] + theta[1] >= 1.0 + EPS_THETA
        )

    def domain_violation(self, theta):
        v = 0.0
        for t in theta:
            v = max(v, EPS_THETA - t, t - 1.0)
        return max(v, 1.0 + EPS_THETA - (theta[0] + theta[1]), 0.0)

    def near_boundary(self, theta, tol=1e-6):
        return bool(
            np.min(theta) <= EPS_THETA + tol
            or np.max(theta) >= 1.0 - tol
            or theta[0] + theta[1] <= 1.0 + EPS_THETA + tol
        )

    def exponents(self, theta):
        return float(theta[0]), float(theta[1])

    def is_exchangeable(self, theta):
        return float(theta[0]) == float(theta[1])

    def eta(self, theta):
        theta = self.validate_theta(theta)
        return 1.0 / (float(theta[0]) + float(theta[1]))


class RandomScale(TailFamily):
    """Pareto random scale model, parametrized by lambda = alpha_R/alpha_W.

    The survival tail function switches between five regimes at
    lambda = 1 and lambda = 2; the boundary rows own their lambda values.
    """

    family_id = "random_scale"
    parameter_dim = 1
    sampling_box = ((0.05, 2.95),)

    def contains(self, theta):
        return theta[0] >= EPS_THETA

    def domain_violation(self, theta):
        return max(EPS_THETA - theta[0], 0.0)

    def near_boundary(self, theta, tol=1e-6):
        return theta[0] <= EPS_THETA + tol

    def _terms(self, lam):
        """c_lambda as [(coef, p, q)] terms of min^p max^q, or None at lam=1."""
        if lam < 1.0:
            return [
                ((2.0 - lam) / (2.0 * (1.0 - lam)), 1.0, 0.0),
                (-lam / (2.0 * (1.0 - lam)), 1.0 / lam, 1.0 - 1.0 / lam),
            ]
        if lam == 1.0:
            return None
        if lam < 2.0:
            return [
                (lam / (2.0 * (lam - 1.0)), 1.0, lam - 1.0),
                (-(2.0 - lam) / (2.0 * (lam - 1.0)), lam, 0.0),
            ]
        return [(1.0, 1.0, 1.0)]

    def is_exchangeable(self, theta):
        return True

    def canonicalize(self, theta):
        # c is mu*M for every lambda >= 2, so the regime is only
        # identifiable up to its boundary value.
        return (min(float(theta[0]), 2.0),)

    def c(self, theta, x, y):
        theta = self.validate_theta(theta)
        return self._c_unchecked(theta, x, y)

    def _c_unchecked(self, theta, x, y):
        lam = float(theta[0])
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        mu = np.minimum(x, y)
        mm = np.maximum(x, y)
        if lam == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(mu > 0.0, mm / np.where(mu > 0.0, mu, 1.0), 1.0)
                res = mu * (1.0 + 0.5 * np.log(ratio))
        else:
            res = np.zeros(np.broadcast(mu, mm).shape)
            with np.errstate(divide="ignore", invalid="ignore"):
                for coef, p, q in self._terms(lam):
                    term = np.where(
                        mu > 0.0,
                        mu ** p * np.where(mm > 0.0, mm, 1.0) ** q,
                        0.0,
                    )
                    res = res + coef * term
        res = np.where(mu == 0.0, 0.0, res)
        return res if res.ndim else float(res)

    def eta(self, theta):
        theta = self.validate_theta(theta)
        lam = float(theta[0])
        if lam <= 1.0:
            return 1.0
        if lam < 2.0:
            return 1.0 / lam
        return 0.5

    def chi(self, theta):
        """Zero for lambda >= 1; K_lambda (the scaling constant) below 1."""
        theta = self.validate_theta(theta)
        lam = float(theta[0])
        if lam >= 1.0:
            return 0.0
        return 2.0 * (1.0 - lam) / (2.0 - lam)

    def has_closed_form_integral(self, theta):
        return True

    def _rect_integral_closed(self, theta, rect):
        lam = float(theta[0])
        terms = self._terms(lam)
        if terms is None:  # lambda = 1 boundary row
            G = _corner_minmax_log
            return (
                G(rect.x_hi, rect.y_hi)
                - G(rect.x_lo, rect.y_hi)
                - G(rect.x_hi, rect.y_lo)
                + G(rect.x_lo, rect.y_lo)
            )
        return sum(coef * minmax_power_rect_integral(p, q, rect) for coef, p, q in terms)


class _AsymptoticallyDependent(TailFamily):
    """Families with c(x, y) = (x + y - l(x, y)) / chi, chi = 2 - l(1, 1)."""

    def stdf(self, theta, x, y):
        raise NotImplementedError

    def c(self, theta, x, y):
        theta = self.validate_theta(theta)
        return self._c_unchecked(theta, x, y)

    def _c_unchecked(self, theta, x, y):
        chi = 2.0 - float(self.stdf(theta, 1.0, 1.0))
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        res = (x + y - self.stdf(theta, x, y)) / chi
        res = np.maximum(res, 0.0)
        return res if res.ndim else float(res)

    def eta(self, theta):
        self.validate_theta(theta)
        return 1.0

    def chi(self, theta):
        theta = self.validate_theta(theta)
        return 2.0 - float(self.stdf(theta, 1.0, 1.0))

    def rect_integral(self, theta, rect: Rectangle, rel_tol=1e-9):
        # 1-homogeneous c: reduce to adaptive 1-D edge integrals, which is
        # much faster than 2-D quadrature inside the optimizer loop.  The
        # 2-D path stays available through rect_integral_quad.
        theta = self.validate_theta(theta)
        if rect.area == 0.0:
            return 0.0
        return homogeneous_rect_integral(self, theta, rect, rel_tol)

    _GL_ORDER = 48

    def rect_integrals(self, theta, rects, rel_tol=1e-9):
        """Batched rectangle integrals via one vectorized evaluation of c.

        Homogeneity of order 1 turns each corner integral over [0,X]x[0,Y]
        into (X * int_0^Y c(X,y) dy + Y * int_0^X c(x,Y) dx) / 3.  All the
        resulting 1-d integrals (split at the diagonal, where c can have a
        kink) are evaluated on stacked Gauss-Legendre nodes in a single
        call; the integrand is smooth on each piece, so a fixed order is
        spectrally accurate.
        """
        theta = self.validate_theta(theta)
        exch = self.is_exchangeable(theta)
        corner_coefs = {}  # (X, Y) -> inclusion-exclusion weight per rect
        for i, rect in enumerate(rects):
            for X, sx in ((rect.x_hi, 1.0), (rect.x_lo, -1.0)):
                for Y, sy in ((rect.y_hi, 1.0), (rect.y_lo, -1.0)):
                    if X <= 0.0 or Y <= 0.0:
                        continue
                    key = (max(X, Y), min(X, Y)) if exch else (X, Y)
                    corner_coefs.setdefault(key, np.zeros(len(rects)))[i] += sx * sy

        # one edge integral per (fixed coordinate, axis): int_0^H c dt
        edges = {}  # (fixed_value, axis) with axis 0 = x varies, 1 = y varies
        for X, Y in corner_coefs:
            edges[(X, 1, Y)] = None
            if not (exch and X == Y):
                edges[(Y, 0, X)] = None
            else:
                edges[(Y, 0, X)] = (X, 1, Y)  # same value by symmetry

        nodes, glw = _gl_cache(self._GL_ORDER)
        seg_x, seg_y, seg_w, seg_of = [], [], [], []
        edge_segments = {}
        # c can have a boundary layer at the diagonal (near-kink), so each
        # piece is subdivided geometrically toward the break point.
        fracs = np.array([0.0, 0.001, 0.01, 0.1, 1.0])
        for eid, (fixed, axis, hi) in enumerate(k for k, v in edges.items() if v is None):
            edge_segments[(fixed, axis, hi)] = eid
            brk = min(fixed, hi)
            for lo, up, at_upper in ((0.0, brk, True), (brk, hi, False)):
                if up <= lo:
                    continue
                cuts = up - (up - lo) * fracs if at_upper else lo + (up - lo) * fracs
                cuts = np.sort(cuts)
                for a, b in zip(cuts[:-1], cuts[1:]):
                    t = a + nodes * (b - a)
                    var = np.full_like(t, fixed)
                    seg_x.append(t if axis == 0 else var)
                    seg_y.append(var if axis == 0 else t)
                    seg_w.append(glw * (b - a))
                    seg_of.append(eid)
        cvals = self._c_unchecked(theta, np.concatenate(seg_x), np.concatenate(seg_y))
        n = self._GL_ORDER
        edge_vals = np.zeros(len(edge_segments))
        for j, eid in enumerate(seg_of):
            edge_vals[eid] += float(np.dot(cvals[j * n:(j + 1) * n], seg_w[j]))

        def edge(fixed, axis, hi):
            key = (fixed, axis, hi)
            alias = edges[key]
            if alias is not None:
                key = alias
            return edge_vals[edge_segments[key]]

        out = np.zeros(len(rects))
        for (X, Y), coefs in corner_coefs.items():
            corner = (X * edge(X, 1, Y) + Y * edge(Y, 0, X)) / 3.0
            out += coefs * corner
        return out


class HuslerReissAD(_AsymptoticallyDependent):
    """Husler-Reiss max-stable dependence, lambda in [0, lam_max)."""

    family_id = "husler_reiss_ad"
    parameter_dim = 1
    sampling_box = ((0.02, 3.0),)
    lam_max = 20.0  # chi(20) is below double precision; treat as the domain edge

    def contains(self, theta):
        return 0.0 <= theta[0] < self.lam_max

    def domain_violation(self, theta):
        return max(-theta[0], theta[0] - self.lam_max + EPS_THETA, 0.0)

    def near_boundary(self, theta, tol=1e-6):
        return theta[0] <= tol or theta[0] >= self.lam_max - tol

    def is_exchangeable(self, theta):
        return True

    def stdf(self, theta, x, y):
        return stdf_husler_reiss(float(theta[0]), x, y)


class AsymLogisticAD(_AsymptoticallyDependent):
    """Asymmetric logistic max-stable dependence, (nu, phi, r)."""

    family_id = "asym_logistic_ad"
    parameter_dim = 3
    sampling_box = ((0.15, 1.0), (0.15, 1.0), (1.2, 6.0))

    def contains(self, theta):
        return (
            EPS_THETA <= theta[0] <= 1.0
            and EPS_THETA <= theta[1] <= 1.0
            and theta[2] >= 1.0 + EPS_THETA
        )

    def domain_violation(self, theta):
        v = max(EPS_THETA - theta[0], theta[0] - 1.0, 0.0)
        v = max(v, EPS_THETA - theta[1], theta[1] - 1.0)
        return max(v, 1.0 + EPS_THETA - theta[2], 0.0)

    def near_boundary(self, theta, tol=1e-6):
        return bool(
            min(theta[0], theta[1]) <= EPS_THETA + tol
            or max(theta[0], theta[1]) >= 1.0 - tol
            or theta[2] <= 1.0 + EPS_THETA + tol
        )

    def is_exchangeable(self, theta):
        return float(theta[0]) == float(theta[1])

    def canonicalize(self, theta):
        # c is invariant under joint scaling of (nu, phi): c depends only on
        # (phi/nu, r).  Normalize so that max(nu, phi) = 1.
        nu, phi, r = (float(t) for t in theta)
        m = max(nu, phi)
        return (nu / m, phi / m, r)

    # Search over (asymmetry, r) in the canonical slice instead of the
    # rank-deficient 3-d space.
    fit_sampling_box = ((-0.85, 0.85), (1.2, 6.0))

    def from_fit_params(self, x):
        a, r = float(x[0]), float(x[1])
        if a >= 0.0:
            return (1.0, 1.0 - a, r)
        return (1.0 + a, 1.0, r)

    def stdf(self, theta, x, y):
        return stdf_asym_logistic(float(theta[0]), float(theta[1]), float(theta[2]), x, y)


_FAMILIES = {
    f.family_id: f
    for f in (
        InvertedHuslerReiss(),
        InvertedAsymLogistic(),
        RandomScale(),
        HuslerReissAD(),
        AsymLogisticAD(),
    )
}

FAMILY_IDS = tuple(_FAMILIES)


def get_family(family_id) -> TailFamily:
    if isinstance(family_id, TailFamily):
        return family_id
    try:
        return _FAMILIES[family_id]
    except KeyError:
        raise ThetaOutOfDomain(f"unknown family {family_id!r}") from None


# thin functional wrappers -------------------------------------------------

def eval_c(family, theta, x, y):
    fam = get_family(family)
    return fam.c(fam.validate_theta(theta), x, y)


def eta_of(family, theta):
    return get_family(family).eta(theta)


def chi_of(family, theta):
    return get_family(family).chi(theta)


def rect_integral_c(family, theta, rect, rel_tol=1e-9):
    return get_family(family).rect_integral(theta, rect, rel_tol)
