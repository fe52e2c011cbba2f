"""Rank transforms and the empirical joint tail functional.

Everything here is rank-based: the raw data enter only through their
columnwise ranks, so all quantities are invariant under strictly
increasing marginal transformations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import NonFiniteInput, Unreachable, ZeroDenominator
from .families import Rectangle

__all__ = [
    "RankedSample",
    "TailIndexChoice",
    "rank_transform",
    "empirical_Q",
    "tilde_c",
    "select_khat",
    "rect_integral_Q",
]


@dataclass(frozen=True)
class RankedSample:
    """Columnwise ranks of an n x d data matrix (rank n = largest value)."""

    n: int
    d: int
    ranks: np.ndarray  # n x d integer matrix, each column a permutation of 1..n
    had_ties: bool = False

    def __post_init__(self):
        ranks = np.asarray(self.ranks)
        if ranks.shape != (self.n, self.d):
            raise ValueError(f"ranks shape {ranks.shape} != ({self.n}, {self.d})")
        if self.n < 2:
            raise ValueError("need at least two observations")

    def margin_pair(self, pair):
        """Return the two rank columns for a margin pair (j1, j2)."""
        j1, j2 = pair
        return self.ranks[:, j1], self.ranks[:, j2]


@dataclass(frozen=True)
class TailIndexChoice:
    """A resolved tail-sample-fraction choice.

    Either k was fixed directly or it was chosen so that the number of
    joint diagonal exceedances reaches a target m; ``resolved_m`` is the
    count actually achieved (integer-valued counts may overshoot m).
    """

    mode: str  # "fixed_k" | "effective_m"
    resolved_k: int
    resolved_m: float

    def __post_init__(self):
        if self.mode not in ("fixed_k", "effective_m"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.resolved_k < 1:
            raise ValueError("resolved_k must be positive")
        if self.resolved_m < 0:
            raise ValueError("resolved_m must be nonnegative")


def rank_transform(data) -> RankedSample:
    """Rank each column of an n x d matrix; ties broken by occurrence order.

    Continuous margins should not produce ties; if they do, a warning is
    issued and recorded on the returned sample.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2:
        raise ValueError("data must be a 2-d array")
    n, d = data.shape
    if n < 2:
        raise ValueError("need at least two observations")
    if not np.all(np.isfinite(data)):
        raise NonFiniteInput("data contains non-finite entries")
    had_ties = False
    ranks = np.empty((n, d), dtype=np.int64)
    for j in range(d):
        col = data[:, j]
        if np.unique(col).size < n:
            had_ties = True
        # 'ordinal' breaks ties by first occurrence.
        ranks[:, j] = rankdata(col, method="ordinal")
    if had_ties:
        warnings.warn(
            "ties found in at least one margin; broken by occurrence order",
            stacklevel=2,
        )
    return RankedSample(n=n, d=d, ranks=ranks, had_ties=had_ties)


def empirical_Q(sample: RankedSample, pair, k: int, x, y):
    """Empirical joint tail functional evaluated at arguments (kx/n, ky/n).

    Returns (1/n) * #{i : R1_i >= n+1-floor(kx) and R2_i >= n+1-floor(ky)}.
    Vectorized over broadcastable x, y.
    """
    n = sample.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    r1, r2 = sample.margin_pair(pair)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("x and y must be nonnegative")
    tx, ty = np.broadcast_arrays(n + 1 - np.floor(k * x), n + 1 - np.floor(k * y))
    hit = (r1[:, None] >= np.ravel(tx)) & (r2[:, None] >= np.ravel(ty))
    counts = hit.sum(axis=0).reshape(tx.shape)
    out = counts / n
    return out if out.ndim else float(out)


def tilde_c(sample: RankedSample, pair, k: int, x, y):
    """Nonparametric ratio estimator Q(x,y)/Q(1,1) at level k."""
    denom = empirical_Q(sample, pair, k, 1.0, 1.0)
    if denom <= 0.0:
        raise ZeroDenominator(f"no joint exceedance at k={k}")
    num = empirical_Q(sample, pair, k, x, y)
    out = np.asarray(num) / denom
    return out if out.ndim else float(out)


def select_khat(sample: RankedSample, pair, m: int) -> TailIndexChoice:
    """Smallest k with at least m joint diagonal exceedances.

    n * Q(k, 1, 1) counts observations whose smaller rank is >= n+1-k,
    so the smallest valid k is the m-th smallest of w_i = n+1-min(R1,R2).
    """
    n = sample.n
    if not 1 <= m <= n:
        raise ValueError(f"m={m} outside 1..{n}")
    r1, r2 = sample.margin_pair(pair)
    w = n + 1 - np.minimum(r1, r2)
    w_sorted = np.sort(w)
    khat = int(w_sorted[m - 1])
    achieved = int(np.count_nonzero(w <= khat))
    if achieved < m:
        raise Unreachable(f"cannot reach m={m} exceedances even at k=n")
    return TailIndexChoice(mode="effective_m", resolved_k=khat, resolved_m=float(achieved))


def rect_integral_Q(sample: RankedSample, pair, k: int, rect: Rectangle) -> float:
    """Exact integral of the empirical step function Q over a rectangle.

    Each observation contributes the area of the part of rect to the
    upper-right of (u_i, v_i) with u_i = (n+1-R1_i)/k, v_i = (n+1-R2_i)/k.
    """
    n = sample.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    r1, r2 = sample.margin_pair(pair)
    u = (n + 1 - r1) / k
    v = (n + 1 - r2) / k
    wx = np.maximum(rect.x_hi - np.maximum(rect.x_lo, u), 0.0)
    wy = np.maximum(rect.y_hi - np.maximum(rect.y_lo, v), 0.0)
    return float(np.dot(wx, wy) / n)
