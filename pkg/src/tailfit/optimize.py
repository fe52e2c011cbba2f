"""Derivative-free minimization used by the bivariate and spatial fitters.

The criterion functions are low-dimensional (1-3 parameters), cheap, and
can have kinks at the boundary of the parameter domain, so the strategy
is multi-start Nelder-Mead from Latin-hypercube points inside a sampling
box, followed by a local grid refinement around the incumbent and a
final polish.  Points outside the domain are handled by the objective
returning +inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

__all__ = ["MinimizeResult", "minimize_multistart"]


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    fun: float
    converged: bool
    n_restarts_used: int
    n_evals: int


def _nelder_mead(fun, x0, fatol, maxiter, simplex_scale=None):
    options = {
        "xatol": 1e-9,
        "fatol": fatol,
        "maxiter": maxiter,
        "adaptive": len(x0) > 1,
    }
    if simplex_scale is not None:
        # small starting simplex for the polish stage: the incumbent is
        # already near the minimum, so skip the global expansion phase
        x0 = np.asarray(x0, dtype=float)
        simplex = np.tile(x0, (len(x0) + 1, 1))
        for i in range(len(x0)):
            simplex[i + 1, i] += simplex_scale * max(abs(x0[i]), 1.0)
        options["initial_simplex"] = simplex
    return minimize(fun, x0, method="Nelder-Mead", options=options)


def _grid_refine(fun, x, fx, halfwidth, points):
    """Local tensor/coordinate grid search around the incumbent."""
    p = len(x)
    offsets = np.linspace(-halfwidth, halfwidth, points)
    n_evals = 0
    if p <= 2:
        axes = [x[i] + offsets for i in range(p)]
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
        for cand in mesh:
            fc = fun(cand)
            n_evals += 1
            if fc < fx:
                x, fx = cand.copy(), fc
    else:
        for _ in range(2):  # two cyclic sweeps
            for i in range(p):
                for off in offsets:
                    cand = x.copy()
                    cand[i] += off
                    fc = fun(cand)
                    n_evals += 1
                    if fc < fx:
                        x, fx = cand, fc
    return np.asarray(x, dtype=float), fx, n_evals


def minimize_multistart(
    fun,
    sampling_box,
    seed=0,
    n_starts=8,
    extra_starts=(),
    fatol=1e-8,
    early_stop=1e-9,
    grid_halfwidth=0.02,
    grid_points=9,
    maxiter=400,
) -> MinimizeResult:
    """Minimize ``fun`` over the box-interior with multiple restarts.

    ``sampling_box`` is a sequence of (lo, hi) per coordinate used only
    to place starting points; the feasible region is whatever set
    ``fun`` is finite on.  Deterministic given ``seed``.
    """
    box = np.asarray(sampling_box, dtype=float)
    p = box.shape[0]
    sampler = qmc.LatinHypercube(d=p, seed=np.random.default_rng(seed))
    unit = sampler.random(n_starts)
    starts = box[:, 0] + unit * (box[:, 1] - box[:, 0])
    starts = list(np.asarray(extra_starts, dtype=float).reshape(-1, p)) + list(starts)

    # rank starts so the most promising restart runs first (lets the
    # early-stop fire after a single local search on easy problems)
    f0 = np.array([fun(x0) for x0 in starts])
    n_evals = len(starts)
    order = np.argsort(f0, kind="stable")

    best_x, best_f, converged, used = None, np.inf, False, 0
    for idx in order:
        if not np.isfinite(f0[idx]):
            continue
        used += 1
        res = _nelder_mead(fun, starts[idx], fatol, maxiter)
        n_evals += res.nfev
        if res.fun < best_f:
            best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
            converged = bool(res.success)
        if best_f < early_stop:
            break
    if best_x is None:
        raise ValueError("no feasible starting point in the sampling box")

    if best_f >= early_stop:
        # local grid sweep guards against Nelder-Mead stalling on the
        # plateau-like objectives that noisy moment vectors produce
        best_x, best_f, ng = _grid_refine(fun, best_x, best_f, grid_halfwidth, grid_points)
        n_evals += ng
    polish_fatol = min(fatol, max(best_f * 1e-6, 1e-15))
    res = _nelder_mead(fun, best_x, polish_fatol, maxiter, simplex_scale=1e-4)
    n_evals += res.nfev
    if res.fun < best_f:
        best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
        converged = converged or bool(res.success)
    return MinimizeResult(
        x=best_x, fun=best_f, converged=converged, n_restarts_used=used, n_evals=n_evals
    )
