"""Monte Carlo study harness.

Runs replicated simulate-then-fit experiments and aggregates bias/RMSE
tables: threshold sweeps, parameter-grid sweeps, and spatial studies.
Replications run on independent counter-based RNG streams, so results
are identical whether executed serially or across a process pool.
"""

from __future__ import annotations

import csv
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .empirical import TailIndexChoice, rank_transform, select_khat
from .families import get_family
from .mestim import FitOptions, default_weights, fit_bivariate, preset_weights
from .simulate import SimSpec, simulate
from .spatial import (
    SpatialModel,
    fit_joint,
    fit_least_squares,
    pairwise_fits,
    theta_of_distance,
)

__all__ = [
    "StudySpec",
    "StudyResult",
    "run_bias_rmse_vs_k",
    "run_parameter_grid",
    "run_spatial_study",
    "run_study",
    "write_raw_csv",
    "write_summary_csv",
]

BOXPLOT_QUANTILES = (2.5, 25.0, 50.0, 75.0, 97.5)


def resolve_threads(threads: int = 0) -> int:
    """0 means auto: the TAILFIT_THREADS env var, then the CPU count."""
    if threads:
        return max(1, int(threads))
    env = os.environ.get("TAILFIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class StudySpec:
    """Design of one replicated Monte Carlo experiment."""

    kind: str  # "bias_rmse_vs_k" | "parameter_grid" | "spatial"
    model: str  # simulator model: m1 | m2 | m3 | spatial_ibr
    family: str  # fitted family id (bivariate studies)
    n: int
    replications: int
    sweep: tuple  # k values, truth vectors, or m values depending on kind
    truth: tuple  # true parameter (theta or (alpha, beta)); grid studies ignore it
    seed: int = 0
    k: int | None = None  # fixed k for parameter_grid studies
    noise_pareto_alpha: float | None = 4.0
    weights: str = "g1"
    coords: tuple = ()  # spatial studies
    threads: int = 0
    keep_raw: bool = True

    def __post_init__(self):
        if self.kind not in ("bias_rmse_vs_k", "parameter_grid", "spatial"):
            raise ValueError(f"unknown study kind {self.kind!r}")
        if self.replications < 2:
            raise ValueError("need at least two replications")
        if not self.sweep:
            raise ValueError("sweep must be nonempty")


@dataclass(frozen=True)
class StudyResult:
    spec: StudySpec
    rows: tuple  # per replication x sweep point dicts
    summary: tuple  # per sweep point dicts
    wall_clock: float
    n_failed: int


def _sim_spec(spec: StudySpec, truth) -> SimSpec:
    if spec.model == "m1":
        params = {"theta": float(truth[0])}
    elif spec.model == "m2":
        params = {"nu": float(truth[0]), "phi": float(truth[1]), "r": 2.0}
    elif spec.model == "m3":
        params = {"alpha_r": float(truth[0]), "alpha_w": 1.0}
    else:
        params = {"alpha": float(truth[0]), "beta": float(truth[1])}
    return SimSpec(
        model=spec.model,
        n=spec.n,
        params=params,
        coords=np.array(spec.coords) if spec.coords else None,
        noise_pareto_alpha=spec.noise_pareto_alpha,
    )


def _weights_for(spec: StudySpec):
    if spec.weights == "g1":
        return default_weights(spec.family)
    return preset_weights(spec.family, spec.weights)


def _bivariate_rep(args):
    """One replication: simulate, rank, fit at each sweep point."""
    spec, rep = args
    fam = get_family(spec.family)
    weights = _weights_for(spec)
    out = []
    if spec.kind == "bias_rmse_vs_k":
        data = simulate(_sim_spec(spec, spec.truth), spec.seed, rep)
        sample = rank_transform(data)
        for k in spec.sweep:
            choice = TailIndexChoice(mode="fixed_k", resolved_k=int(k), resolved_m=0.0)
            try:
                fit = fit_bivariate(sample, (0, 1), fam, weights, choice, FitOptions(seed=spec.seed + rep))
                out.append((rep, float(k), fit.theta_hat, None))
            except Exception as exc:  # noqa: BLE001 - failed reps are reported
                out.append((rep, float(k), None, str(exc)))
    else:  # parameter_grid: one dataset per (truth, rep)
        for i, truth in enumerate(spec.sweep):
            truth = tuple(np.atleast_1d(truth))
            stream = i * spec.replications + rep
            data = simulate(_sim_spec(spec, truth), spec.seed, stream)
            sample = rank_transform(data)
            choice = TailIndexChoice(mode="fixed_k", resolved_k=int(spec.k), resolved_m=0.0)
            try:
                fit = fit_bivariate(sample, (0, 1), fam, weights, choice, FitOptions(seed=spec.seed + stream))
                out.append((rep, truth, fit.theta_hat, None))
            except Exception as exc:  # noqa: BLE001
                out.append((rep, truth, None, str(exc)))
    return out


def _spatial_rep(args):
    """One spatial replication: both estimators at each m in the sweep."""
    spec, rep = args
    weights = _weights_for(spec)
    model = SpatialModel(coords=np.array(spec.coords))
    data = simulate(_sim_spec(spec, spec.truth), spec.seed, rep)
    sample = rank_transform(data)
    test_dists = _test_distances(model)
    out = []
    for m in spec.sweep:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                opts = FitOptions(seed=spec.seed + rep)
                fits = pairwise_fits(sample, model, int(m), weights, opts)
                ls = fit_least_squares(fits, model, opts)
                joint = fit_joint(sample, model, int(m), weights, opts)
            pair_theta = {
                s: fits[s].theta_hat[0] for s in _test_pair_indices(model) if s in fits
            }
            out.append((rep, float(m), ls.vartheta_hat, joint.vartheta_hat, pair_theta, None))
        except Exception as exc:  # noqa: BLE001
            out.append((rep, float(m), None, None, None, str(exc)))
    return out


def _test_pair_indices(model: SpatialModel):
    """Five pairs spread over the distance range, for spread comparisons."""
    dists = model.distances
    order = np.argsort(dists)
    picks = np.unique(
        order[np.round(np.linspace(0, len(order) - 1, 5)).astype(int)]
    )
    return [int(i) for i in picks]


def _test_distances(model: SpatialModel):
    return [float(model.distances[s]) for s in _test_pair_indices(model)]


def _run_parallel(worker, spec: StudySpec):
    jobs = [(spec, rep) for rep in range(spec.replications)]
    threads = resolve_threads(spec.threads)
    if threads == 1:
        results = [worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, jobs))
    # flatten in replication order so aggregation does not depend on scheduling
    flat = []
    for rep_result in results:
        flat.extend(rep_result)
    return flat


def _summarize_estimates(point_rows, truth):
    """Bias/RMSE/quantile summary for one sweep point."""
    est = np.array([r["estimate"] for r in point_rows if r["estimate"] is not None])
    n_failed = sum(1 for r in point_rows if r["estimate"] is None)
    if est.size == 0:
        return {"n_ok": 0, "n_failed": n_failed}
    truth = np.atleast_1d(np.asarray(truth, dtype=float))
    bias = est.mean(0) - truth
    rmse = np.sqrt(((est - truth) ** 2).mean(0))
    summ = {
        "n_ok": int(est.shape[0]),
        "n_failed": n_failed,
        "mean": est.mean(0).tolist(),
        "bias": bias.tolist(),
        "abs_bias": np.abs(bias).tolist(),
        "rmse": rmse.tolist(),
        "euclid_bias": float(np.linalg.norm(bias)),
        "euclid_rmse": float(np.sqrt(((est - truth) ** 2).sum(1).mean())),
        "variance": est.var(0).tolist(),
    }
    for q in BOXPLOT_QUANTILES:
        summ[f"q{q}"] = np.percentile(est, q, axis=0).tolist()
    return summ


def run_bias_rmse_vs_k(spec: StudySpec) -> StudyResult:
    t0 = time.time()
    flat = _run_parallel(_bivariate_rep, spec)
    rows = [
        {"rep": rep, "sweep": k, "estimate": est, "error": err}
        for rep, k, est, err in flat
    ]
    summary = []
    for k in spec.sweep:
        point = [r for r in rows if r["sweep"] == float(k)]
        summ = _summarize_estimates(point, spec.truth)
        summ["k"] = float(k)
        summary.append(summ)
    n_failed = sum(1 for r in rows if r["estimate"] is None)
    return StudyResult(spec, tuple(rows) if spec.keep_raw else (), tuple(summary),
                       time.time() - t0, n_failed)


def run_parameter_grid(spec: StudySpec) -> StudyResult:
    t0 = time.time()
    flat = _run_parallel(_bivariate_rep, spec)
    rows = [
        {"rep": rep, "sweep": truth, "estimate": est, "error": err}
        for rep, truth, est, err in flat
    ]
    summary = []
    for truth in spec.sweep:
        truth = tuple(np.atleast_1d(truth))
        point = [r for r in rows if r["sweep"] == truth]
        summ = _summarize_estimates(point, truth)
        summ["truth"] = list(truth)
        summary.append(summ)
    n_failed = sum(1 for r in rows if r["estimate"] is None)
    return StudyResult(spec, tuple(rows) if spec.keep_raw else (), tuple(summary),
                       time.time() - t0, n_failed)


def run_spatial_study(spec: StudySpec) -> StudyResult:
    t0 = time.time()
    flat = _run_parallel(_spatial_rep, spec)
    model = SpatialModel(coords=np.array(spec.coords))
    grid = np.linspace(0.0, 3.0, 301)
    truth_curve = theta_of_distance(spec.truth, grid)
    test_idx = _test_pair_indices(model)
    test_d = _test_distances(model)

    rows = []
    for rep, m, ls, joint, pair_theta, err in flat:
        row = {"rep": rep, "sweep": m, "error": err}
        if err is None:
            row["estimate"] = ls  # least-squares vartheta, used by _summarize
            row["ls"] = ls
            row["joint"] = joint
            row["sup_ls"] = float(np.max(np.abs(theta_of_distance(ls, grid) - truth_curve)))
            row["sup_joint"] = float(np.max(np.abs(theta_of_distance(joint, grid) - truth_curve)))
            row["pair_theta"] = pair_theta
            row["theta_at_test_ls"] = [float(theta_of_distance(ls, d)) for d in test_d]
        else:
            row["estimate"] = None
        rows.append(row)

    summary = []
    for m in spec.sweep:
        point = [r for r in rows if r["sweep"] == float(m) and r["error"] is None]
        n_failed = sum(1 for r in rows if r["sweep"] == float(m) and r["error"] is not None)
        if not point:
            summary.append({"m": float(m), "n_ok": 0, "n_failed": n_failed})
            continue
        ls = np.array([r["ls"] for r in point])
        joint = np.array([r["joint"] for r in point])
        truth = np.asarray(spec.truth, dtype=float)
        spread_spatial, spread_pairwise = [], []
        for pos, s in enumerate(test_idx):
            th_curve = np.array([r["theta_at_test_ls"][pos] for r in point])
            th_pair = np.array([r["pair_theta"][s] for r in point if s in r["pair_theta"]])
            q75, q25 = np.percentile(th_curve, [75, 25])
            spread_spatial.append(float(q75 - q25))
            if th_pair.size:
                q75p, q25p = np.percentile(th_pair, [75, 25])
                spread_pairwise.append(float(q75p - q25p))
            else:
                spread_pairwise.append(float("nan"))
        summary.append({
            "m": float(m),
            "n_ok": len(point),
            "n_failed": n_failed,
            "ls_bias": (ls.mean(0) - truth).tolist(),
            "ls_rmse": np.sqrt(((ls - truth) ** 2).mean(0)).tolist(),
            "joint_bias": (joint.mean(0) - truth).tolist(),
            "joint_rmse": np.sqrt(((joint - truth) ** 2).mean(0)).tolist(),
            "mean_sup_ls": float(np.mean([r["sup_ls"] for r in point])),
            "mean_sup_joint": float(np.mean([r["sup_joint"] for r in point])),
            "mean_abs_diff_ls_joint": np.abs(ls - joint).mean(0).tolist(),
            "test_distances": test_d,
            "iqr_spatial": spread_spatial,
            "iqr_pairwise": spread_pairwise,
        })
    n_failed = sum(1 for r in rows if r["estimate"] is None)
    return StudyResult(spec, tuple(rows) if spec.keep_raw else (), tuple(summary),
                       time.time() - t0, n_failed)


def run_study(spec: StudySpec) -> StudyResult:
    if spec.kind == "bias_rmse_vs_k":
        return run_bias_rmse_vs_k(spec)
    if spec.kind == "parameter_grid":
        return run_parameter_grid(spec)
    return run_spatial_study(spec)


def _flatten_value(v):
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    if isinstance(v, dict):
        return ";".join(f"{k}={x}" for k, x in sorted(v.items()))
    return v


def write_raw_csv(path, result: StudyResult):
    """Tidy CSV: one row per replication x sweep point."""
    if not result.rows:
        raise ValueError("study was run with keep_raw=False")
    keys = sorted({k for r in result.rows for k in r})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for r in result.rows:
            writer.writerow([_flatten_value(r.get(k, "")) for k in keys])


def write_summary_csv(path, result: StudyResult):
    keys = sorted({k for s in result.summary for k in s})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for s in result.summary:
            writer.writerow([_flatten_value(s.get(k, "")) for k in keys])
