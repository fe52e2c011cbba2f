"""Exact samplers for the benchmark data-generating processes.

Bivariate extreme-value copulas are sampled by conditional inversion
(analytic partial derivative of the copula plus bisection); inverted
max-stable vectors are 1 minus those draws.  The random-scale model is
a product of Pareto variables.  The spatial inverted Brown-Resnick
process uses the exact extremal-functions construction.  All samplers
are deterministic functions of (spec, seed) built on counter-based
Philox streams, so parallel replications are reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import BisectionFailure, CholeskyFailure, ParamOutOfRange
from .families import (
    norm_quantile,
    stdf_asym_logistic,
    stdf_asym_logistic_dx,
    stdf_husler_reiss,
    stdf_husler_reiss_dx,
)

__all__ = [
    "SimSpec",
    "rng_for",
    "sample_bivariate_ev_copula",
    "sample_inverted",
    "sample_random_scale",
    "sample_inverted_brown_resnick",
    "simulate",
    "write_samples_csv",
    "write_coords_csv",
]

_U_LO = 1e-300
_U_HI = 1.0 - 1e-16
_BISECT_TOL = 1e-12


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent reproducible stream: Philox keyed by seed, jumped."""
    bitgen = np.random.Philox(key=seed)
    if stream:
        bitgen = bitgen.jumped(stream)
    return np.random.Generator(bitgen)


@dataclass(frozen=True)
class SimSpec:
    """Specification of a simulated data set."""

    model: str  # "m1" | "m2" | "m3" | "spatial_ibr"
    n: int
    params: dict = field(default_factory=dict)
    margins: str = "frechet"  # "uniform" | "frechet"
    noise_pareto_alpha: float | None = None  # additive Pareto noise, e.g. 4.0
    coords: np.ndarray | None = None  # spatial model only

    def __post_init__(self):
        if self.model not in ("m1", "m2", "m3", "spatial_ibr"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.margins not in ("uniform", "frechet"):
            raise ValueError(f"unknown margins {self.margins!r}")
        if self.model == "spatial_ibr":
            if self.coords is None:
                raise ValueError("spatial model needs coords")
            object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))


def _stdf_and_dx(kind, params):
    if kind == "husler_reiss":
        lam = float(params["lam"])

        def l(x, y):
            return stdf_husler_reiss(lam, x, y)

        def lx(x, y):
            return stdf_husler_reiss_dx(lam, x, y)

    elif kind == "asym_logistic":
        nu, phi, r = (float(params[k]) for k in ("nu", "phi", "r"))

        def l(x, y):
            return stdf_asym_logistic(nu, phi, r, x, y)

        def lx(x, y):
            return stdf_asym_logistic_dx(nu, phi, r, x, y)

    else:
        raise ValueError(f"unknown stdf kind {kind!r}")
    return l, lx


def sample_bivariate_ev_copula(kind, params, n, rng) -> np.ndarray:
    """n draws from C(u, v) = exp(-l(-log u, -log v)), uniform margins.

    Conditional-distribution method: V solves dC/du (V | U) = W with the
    analytic derivative, by vectorized bisection.
    """
    if isinstance(rng, (int, np.integer)):
        rng = rng_for(int(rng))
    l, lx = _stdf_and_dx(kind, params)
    u = rng.uniform(size=n)
    w = rng.uniform(size=n)

    if kind == "husler_reiss" and np.isinf(params["lam"]):
        return np.column_stack([u, w])  # exact independence
    if kind == "husler_reiss" and params["lam"] == 0.0:
        return np.column_stack([u, u])  # perfect dependence

    x = -np.log(u)

    def cond_cdf(v):
        y = -np.log(v)
        # dC/du = exp(-l(x,y)) * l_x(x,y) / u
        return np.exp(x - l(x, y)) * lx(x, y)

    lo = np.full(n, _U_LO)
    hi = np.full(n, _U_HI)
    v = 0.5 * (lo + hi)
    for _ in range(80):
        f = cond_cdf(v)
        too_high = f > w
        hi = np.where(too_high, v, hi)
        lo = np.where(too_high, lo, v)
        v = 0.5 * (lo + hi)
        if np.max(np.abs(f - w)) < _BISECT_TOL and np.max(hi - lo) < 1e-15:
            break
    resid = np.abs(cond_cdf(v) - w)
    # endpoints: conditional CDF cannot reach w within (0,1) numerically
    interior = (v > 1e-12) & (v < 1.0 - 1e-12)
    if np.any(resid[interior] > 1e-9):
        raise BisectionFailure(
            f"conditional inversion residual {np.max(resid[interior]):.2e}"
        )
    return np.column_stack([u, v])


def _to_frechet(u):
    u = np.clip(u, _U_LO, _U_HI)
    return -1.0 / np.log(u)


def _add_noise(data, alpha, rng):
    """Independent additive Pareto(alpha) noise, CDF 1 - x^-alpha on [1, inf)."""
    noise = rng.uniform(size=data.shape) ** (-1.0 / alpha)
    return data + noise


def sample_inverted(spec: SimSpec, seed: int, stream: int = 0) -> np.ndarray:
    """Inverted bivariate max-stable sample (models m1 and m2)."""
    rng = rng_for(seed, stream)
    if spec.model == "m1":
        theta = float(spec.params["theta"])
        if not 0.5 < theta <= 1.0:
            raise ParamOutOfRange(f"theta {theta} outside (1/2, 1]")
        z = sample_bivariate_ev_copula(
            "husler_reiss", {"lam": norm_quantile(theta)}, spec.n, rng
        )
    elif spec.model == "m2":
        z = sample_bivariate_ev_copula("asym_logistic", spec.params, spec.n, rng)
    else:
        raise ValueError(f"sample_inverted expects m1/m2, got {spec.model}")
    data = 1.0 - z
    if spec.margins == "frechet":
        data = _to_frechet(data)
    if spec.noise_pareto_alpha is not None:
        data = _add_noise(data, spec.noise_pareto_alpha, rng)
    return data


def sample_random_scale(spec: SimSpec, seed: int, stream: int = 0) -> np.ndarray:
    """(X, Y) = R * (W1, W2) with R ~ Par(alpha_R), W_j ~ Par(alpha_W) iid."""
    rng = rng_for(seed, stream)
    a_r = float(spec.params.get("alpha_r", spec.params.get("lam", 1.0)))
    a_w = float(spec.params.get("alpha_w", 1.0))
    if a_r <= 0.0 or a_w <= 0.0:
        raise ParamOutOfRange("Pareto indices must be positive")
    r = rng.uniform(size=spec.n) ** (-1.0 / a_r)
    w = rng.uniform(size=(spec.n, 2)) ** (-1.0 / a_w)
    data = r[:, None] * w
    if spec.noise_pareto_alpha is not None:
        data = _add_noise(data, spec.noise_pareto_alpha, rng)
    return data


# ---------------------------------------------------------------------------
# spatial inverted Brown-Resnick


def _variogram_matrix(coords, alpha, beta):
    diffs = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diffs ** 2).sum(-1))
    return (dist / beta) ** alpha


def _conditional_factors(gamma, jitter=1e-10):
    """Per-site Cholesky factors for the log-Gaussian extremal proposals.

    Conditionally on the spectral function being 1 at site k, the log
    values at the other sites are Gaussian with mean -gamma[:, k] / 2 and
    covariance Sigma_k[i, j] = (gamma[i,k] + gamma[j,k] - gamma[i,j]) / 2.
    """
    d = gamma.shape[0]
    factors = []
    for k in range(d):
        idx = [i for i in range(d) if i != k]
        sub = 0.5 * (
            gamma[np.ix_(idx, [k] * (d - 1))]
            + gamma[np.ix_([k] * (d - 1), idx)].T
            - gamma[np.ix_(idx, idx)]
        )
        sub = 0.5 * (sub + sub.T) + jitter * np.eye(d - 1)
        try:
            factors.append((idx, np.linalg.cholesky(sub)))
        except np.linalg.LinAlgError as exc:
            raise CholeskyFailure(f"site {k}: {exc}") from exc
    return factors


def _sample_max_stable_frechet(coords, alpha, beta, n, rng):
    """Exact Brown-Resnick max-stable draws with unit Frechet margins.

    Extremal-functions construction: sweep the sites; at site k run a
    Poisson point process of intensity dz/z^2 and accept spectral
    proposals that do not exceed the current maximum at earlier sites.
    """
    d = coords.shape[0]
    gamma = _variogram_matrix(coords, alpha, beta)
    factors = _conditional_factors(gamma)
    z = np.zeros((n, d))
    for k in range(d):
        idx, chol = factors[k]
        mean = -0.5 * gamma[idx, k]
        active = np.arange(n)
        zeta = np.zeros(n)
        while active.size:
            zeta[active] += rng.exponential(size=active.size)
            poisson = 1.0 / zeta[active]
            still = poisson > z[active, k]
            active = active[still]
            if not active.size:
                break
            poisson = poisson[still]
            normals = rng.standard_normal(size=(active.size, d - 1))
            logw = mean + normals @ chol.T
            w = np.empty((active.size, d))
            w[:, idx] = np.exp(logw)
            w[:, k] = 1.0
            cand = poisson[:, None] * w
            # keep the extremal function at site k: it must not be beaten
            # by an already-drawn function at any earlier site
            ok = np.all(cand[:, :k] <= z[active, :k] + 1e-300, axis=1) if k else np.ones(active.size, bool)
            upd = active[ok]
            z[upd] = np.maximum(z[upd], cand[ok])
    return z


def sample_inverted_brown_resnick(spec: SimSpec, seed: int, stream: int = 0) -> np.ndarray:
    """n x d inverted Brown-Resnick sample on spec.coords."""
    alpha = float(spec.params["alpha"])
    beta = float(spec.params["beta"])
    if not (0.0 < alpha <= 2.0) or beta <= 0.0:
        raise ParamOutOfRange(f"(alpha, beta) = {(alpha, beta)} invalid")
    coords = spec.coords
    if coords.shape[0] > 64:
        raise ValueError("spatial sampler supports up to 64 locations")
    rng = rng_for(seed, stream)
    z = _sample_max_stable_frechet(coords, alpha, beta, spec.n, rng)
    u = np.exp(-1.0 / z)  # uniform margins of the max-stable vector
    data = 1.0 - u
    if spec.margins == "frechet":
        data = _to_frechet(data)
    if spec.noise_pareto_alpha is not None:
        data = _add_noise(data, spec.noise_pareto_alpha, rng)
    return data


def simulate(spec: SimSpec, seed: int, stream: int = 0) -> np.ndarray:
    """Dispatch on spec.model."""
    if spec.model in ("m1", "m2"):
        return sample_inverted(spec, seed, stream)
    if spec.model == "m3":
        return sample_random_scale(spec, seed, stream)
    return sample_inverted_brown_resnick(spec, seed, stream)


def write_samples_csv(path, data, columns=None):
    data = np.asarray(data)
    if columns is None:
        columns = [f"x{j + 1}" for j in range(data.shape[1])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(data.tolist())


def write_coords_csv(path, coords):
    coords = np.asarray(coords)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y"])
        for i, (x, y) in enumerate(coords):
            writer.writerow([i, x, y])
