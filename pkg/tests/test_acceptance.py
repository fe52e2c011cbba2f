"""Acceptance suite: ten criteria, one printed pass/fail line each.

Each test prints "CRITERION n PASS/FAIL (t s): detail" on the real stdout
(bypassing capture) and then asserts, so a plain pytest run shows one line
per criterion regardless of verbosity.
"""

import sys
import time

import numpy as np
import pytest
from scipy import stats

from tailfit.bench import StudySpec, run_study, write_raw_csv, write_summary_csv
from tailfit.empirical import TailIndexChoice, rank_transform, rect_integral_Q
from tailfit.families import (
    FAMILY_IDS,
    Rectangle,
    get_family,
    stdf_husler_reiss,
)
from tailfit.mestim import (
    FitOptions,
    default_weights,
    fit_bivariate,
    model_moment_vector,
    plugin_covariance_AI,
)
from tailfit.mestim import _covariance_A  # white-box oracle target
from tailfit.simulate import SimSpec, rng_for, sample_bivariate_ev_copula, simulate

SEED = 20260826


_CAPSYS = None


@pytest.fixture(autouse=True)
def _capture_handle(capsys):
    # keep a handle so report() can print through pytest's output capture
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def report(criterion, ok, elapsed, detail):
    line = (
        f"CRITERION {criterion} {'PASS' if ok else 'FAIL'} "
        f"({elapsed:.1f} s): {detail}\n"
    )
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            sys.stdout.write(line)
            sys.stdout.flush()
    else:
        sys.__stdout__.write(line)
        sys.__stdout__.flush()
    assert ok, line


# ---------------------------------------------------------------------------
# shared M1 study (criteria 4, 6, 9)

M1_THETAS = (0.6, 0.75, 0.9)
M1_REPS = 200
M1_N = 5000
M1_K = 800


def _m1_rep(theta, stream, noise=4.0, k=M1_K, with_cov=False):
    fam = get_family("inverted_husler_reiss")
    w = default_weights(fam)
    spec = SimSpec(model="m1", n=M1_N, params={"theta": theta},
                   noise_pareto_alpha=noise, coords=None)
    sample = rank_transform(simulate(spec, SEED, stream))
    choice = TailIndexChoice(mode="fixed_k", resolved_k=k, resolved_m=0.0)
    fit = fit_bivariate(sample, (0, 1), fam, w, choice, FitOptions(seed=SEED + stream))
    se = None
    if with_cov:
        cov = plugin_covariance_AI(sample, (0, 1), fam, fit, w)
        se = float(np.sqrt(max(cov[0, 0], 0.0)))
    return fit.theta_hat[0], se


@pytest.fixture(scope="session")
def m1_study():
    t0 = time.monotonic()
    out = {}
    for i, theta in enumerate(M1_THETAS):
        ests = [
            _m1_rep(theta, i * M1_REPS + rep)[0] for rep in range(M1_REPS)
        ]
        out[theta] = np.array(ests)
    out["elapsed"] = time.monotonic() - t0
    return out


# ---------------------------------------------------------------------------


def test_criterion_1_empirical_integral_vs_riemann():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED)
    g = 2000
    worst = 0.0
    for trial in range(20):
        z = rng.standard_normal((50, 2))
        z[:, 1] = 0.5 * z[:, 0] + z[:, 1]
        sample = rank_transform(z)
        k = int(rng.integers(5, 20))
        lo = rng.uniform(0.0, 1.0, 2)
        hi = lo + rng.uniform(0.5, 2.0, 2)
        rect = Rectangle(lo[0], hi[0], lo[1], hi[1])
        # midpoint Riemann grid, counts computed directly from the ranks
        xs = rect.x_lo + (np.arange(g) + 0.5) * (rect.x_hi - rect.x_lo) / g
        ys = rect.y_lo + (np.arange(g) + 0.5) * (rect.y_hi - rect.y_lo) / g
        n = sample.n
        r1, r2 = sample.ranks[:, 0], sample.ranks[:, 1]
        tx = n + 1 - np.floor(k * xs)
        ty = n + 1 - np.floor(k * ys)
        cx = (r1[:, None] >= tx[None, :]).sum(1)  # grid columns above threshold
        cy = (r2[:, None] >= ty[None, :]).sum(1)
        riemann = float(np.dot(cx, cy)) / (g * g) * rect.area / n
        exact = rect_integral_Q(sample, (0, 1), k, rect)
        worst = max(worst, abs(exact - riemann) / rect.area)
    elapsed = time.monotonic() - t0
    ok = worst < 2e-3 and elapsed < 30.0
    report(1, ok, elapsed, f"max |exact - Riemann|/area = {worst:.2e} (< 2e-3)")


def test_criterion_2_family_invariants():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED + 1)
    worst_c11 = worst_hom = worst_l = 0.0
    for fid in FAMILY_IDS:
        fam = get_family(fid)
        for _ in range(100):
            while True:
                theta = np.array([rng.uniform(lo, hi) for lo, hi in fam.sampling_box])
                if fam.contains(theta):
                    break
            worst_c11 = max(worst_c11, abs(fam.c(theta, 1.0, 1.0) - 1.0))
            eta = fam.eta(theta)
            x, y = rng.uniform(0.1, 3.0, 2)
            for t in (0.5, 2.0):
                lhs = fam.c(theta, t * x, t * y)
                rhs = t ** (1.0 / eta) * fam.c(theta, x, y)
                worst_hom = max(worst_hom, abs(lhs - rhs) / max(abs(rhs), 1e-12))
    # stdf bounds and midpoint convexity
    rng2 = np.random.default_rng(SEED + 2)
    for _ in range(300):
        lam = rng2.uniform(0.05, 5.0)
        x, y, x2, y2 = rng2.uniform(0.05, 4.0, 4)
        val = stdf_husler_reiss(lam, x, y)
        worst_l = max(worst_l, max(max(x, y) - val, val - (x + y)))
        mid = stdf_husler_reiss(lam, (x + x2) / 2, (y + y2) / 2)
        worst_l = max(
            worst_l,
            mid - (stdf_husler_reiss(lam, x, y) + stdf_husler_reiss(lam, x2, y2)) / 2,
        )
    elapsed = time.monotonic() - t0
    ok = worst_c11 < 1e-12 and worst_hom < 1e-9 and worst_l < 1e-12 and elapsed < 10.0
    report(2, ok, elapsed,
           f"c(1,1) err {worst_c11:.1e}, homogeneity {worst_hom:.1e}, "
           f"stdf bounds/convexity {worst_l:.1e}")


def _random_interior_truth(fam, rng):
    """Interior point of the identifiable parameter region."""
    fid = fam.family_id
    if fid == "random_scale":
        return np.array([rng.uniform(0.1, 1.9)])
    if fid == "asym_logistic_ad":
        a = rng.uniform(-0.7, 0.7)
        r = rng.uniform(1.3, 5.0)
        return np.asarray(fam.from_fit_params(np.array([a, r])), dtype=float)
    while True:
        theta = np.array([
            rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
            for lo, hi in fam.sampling_box
        ])
        if fam.contains(theta):
            return theta


def test_criterion_3_noise_free_inversion():
    import tailfit.mestim as mes

    t0 = time.monotonic()
    rng = np.random.default_rng(SEED + 3)
    sample = rank_transform(rng.standard_normal((1000, 2)))
    choice = TailIndexChoice(mode="fixed_k", resolved_k=100, resolved_m=0.0)
    worst = 0.0
    orig = mes.empirical_moment_vector
    try:
        for fid in FAMILY_IDS:
            fam = get_family(fid)
            w = default_weights(fam)
            for trial in range(50):
                theta0 = _random_interior_truth(fam, rng)
                zeta0 = rng.uniform(0.2, 2.0)
                b = zeta0 * model_moment_vector(fam, theta0, w)
                mes.empirical_moment_vector = lambda *a, **k: b
                fit = fit_bivariate(sample, (0, 1), fam, w, choice,
                                    FitOptions(seed=SEED + trial))
                want = np.asarray(fam.canonicalize(np.asarray(theta0, dtype=float)))
                err = max(
                    float(np.max(np.abs(np.asarray(fit.theta_hat) - want))),
                    abs(fit.zeta_hat - zeta0),
                )
                worst = max(worst, err)
    finally:
        mes.empirical_moment_vector = orig
    elapsed = time.monotonic() - t0
    ok = worst < 1e-6 and elapsed < 60.0
    report(3, ok, elapsed, f"max parameter recovery error {worst:.2e} (< 1e-6)")


def test_criterion_4_m1_recovery(m1_study):
    t0 = time.monotonic()
    details = []
    ok = True
    for theta in M1_THETAS:
        est = m1_study[theta]
        bias = est.mean() - theta
        rmse = float(np.sqrt(((est - theta) ** 2).mean()))
        details.append(f"theta={theta}: bias {bias:+.3f}, rmse {rmse:.3f}")
        ok &= abs(bias) <= 0.05 and rmse <= 0.10
    bias06 = m1_study[0.6].mean() - 0.6
    ok &= bias06 < 0.0
    elapsed = m1_study["elapsed"] + (time.monotonic() - t0)
    ok &= elapsed < 15 * 60
    report(4, ok, elapsed, "; ".join(details) + f"; bias(0.6) negative: {bias06 < 0}")


M3_GRID = tuple(round(0.2 * i, 1) for i in range(1, 10))  # 0.2 .. 1.8


@pytest.fixture(scope="session")
def m3_study():
    t0 = time.monotonic()
    spec = StudySpec(
        kind="parameter_grid",
        model="m3",
        family="random_scale",
        n=M1_N,
        replications=M1_REPS,
        sweep=tuple((lam,) for lam in M3_GRID),
        truth=(),
        seed=SEED,
        k=400,
        threads=1,
    )
    result = run_study(spec)
    return result, time.monotonic() - t0


def test_criterion_5_m3_regimes(m3_study):
    result, elapsed = m3_study
    by_truth = {tuple(s["truth"]): s for s in result.summary}
    rmse04 = by_truth[(0.4,)]["rmse"][0]
    abs_bias = {lam: by_truth[(lam,)]["abs_bias"][0] for lam in M3_GRID}
    argmax = max(abs_bias, key=abs_bias.get)
    ok = rmse04 <= 0.10 and argmax in (0.8, 1.0) and elapsed < 15 * 60
    report(5, ok, elapsed,
           f"rmse(0.4) = {rmse04:.3f} (<= 0.10); max |bias| at lambda = {argmax} "
           f"(|bias| = {abs_bias[argmax]:.3f})")


def test_criterion_6_rank_and_noise_invariance(m1_study):
    t0 = time.monotonic()
    # (a) bit-identical estimates under strictly increasing marginal maps
    fam = get_family("inverted_husler_reiss")
    w = default_weights(fam)
    spec = SimSpec(model="m1", n=M1_N, params={"theta": 0.75},
                   noise_pareto_alpha=4.0, coords=None)
    data = simulate(spec, SEED, 0)
    warped = np.column_stack([np.log(data[:, 0]), data[:, 1] ** 3])
    choice = TailIndexChoice(mode="fixed_k", resolved_k=M1_K, resolved_m=0.0)
    fit_a = fit_bivariate(rank_transform(data), (0, 1), fam, w, choice,
                          FitOptions(seed=SEED))
    fit_b = fit_bivariate(rank_transform(warped), (0, 1), fam, w, choice,
                          FitOptions(seed=SEED))
    identical = (fit_a.theta_hat == fit_b.theta_hat
                 and fit_a.zeta_hat == fit_b.zeta_hat
                 and fit_a.objective == fit_b.objective)
    # (b) Pareto(4) noise shifts the mean estimate by < 2 MC standard errors
    noisy = m1_study[0.75]
    clean = np.array([
        _m1_rep(0.75, 10_000 + rep, noise=None)[0] for rep in range(M1_REPS)
    ])
    se = float(np.sqrt(noisy.var() / len(noisy) + clean.var() / len(clean)))
    shift = abs(noisy.mean() - clean.mean())
    elapsed = time.monotonic() - t0
    ok = identical and shift < 2.0 * se and elapsed < 10 * 60
    report(6, ok, elapsed,
           f"rank invariance bit-identical: {identical}; noise shift "
           f"{shift:.4f} < 2 SE = {2 * se:.4f}")


SPATIAL_TRUTH = (1.0, 3.0)


@pytest.fixture(scope="session")
def spatial_study():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED)
    coords = tuple(map(tuple, rng.uniform(0.0, 3.0, (10, 2))))
    spec = StudySpec(
        kind="spatial",
        model="spatial_ibr",
        family="inverted_husler_reiss",
        n=M1_N,
        replications=100,
        sweep=(150,),
        truth=SPATIAL_TRUTH,
        seed=SEED,
        coords=coords,
        threads=1,
    )
    result = run_study(spec)
    return result, time.monotonic() - t0


def test_criterion_7_spatial_study(spatial_study):
    result, elapsed = spatial_study
    row = result.summary[0]
    mean_sup = row["mean_sup_ls"]
    diff = max(row["mean_abs_diff_ls_joint"])
    iqr_ok = all(
        s <= p + 1e-12
        for s, p in zip(row["iqr_spatial"], row["iqr_pairwise"])
    )
    ok = (
        mean_sup <= 0.1
        and diff <= 0.05
        and iqr_ok
        and result.n_failed == 0
        and elapsed < 30 * 60
    )
    report(7, ok, elapsed,
           f"mean sup|theta curve err| = {mean_sup:.3f} (<= 0.1); "
           f"max mean |LS - joint| = {diff:.3f} (<= 0.05); "
           f"spatial IQR <= pairwise IQR at all 5 distances: {iqr_ok}")


def test_criterion_8_simulator_oracles():
    t0 = time.monotonic()
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [2.5, 1.0], [3.0, 3.0]])
    spec = SimSpec(model="spatial_ibr", n=100_000,
                   params={"alpha": 1.0, "beta": 3.0}, margins="uniform",
                   noise_pareto_alpha=None, coords=coords)
    data = simulate(spec, SEED)
    z = 1.0 - data  # max-stable pair with uniform margins
    worst = 0.0
    d = len(coords)
    for i in range(d):
        for j in range(i + 1, d):
            h = float(np.linalg.norm(coords[i] - coords[j]))
            gamma = h / 3.0
            want = stdf_husler_reiss(np.sqrt(gamma) / 2.0, 1.0, 1.0)
            nu_mad = np.mean(np.abs(z[:, i] - z[:, j])) / 2.0
            got = (1.0 + 2.0 * nu_mad) / (1.0 - 2.0 * nu_mad)
            worst = max(worst, abs(got - want))
    # EV-copula margins: KS uniformity at level 0.01
    uv = sample_bivariate_ev_copula("husler_reiss", {"lam": 0.9}, 20_000,
                                    rng_for(SEED, 5))
    pvals = [stats.kstest(uv[:, j], "uniform").pvalue for j in (0, 1)]
    elapsed = time.monotonic() - t0
    ok = worst < 0.03 and min(pvals) > 0.01 and elapsed < 5 * 60
    report(8, ok, elapsed,
           f"max extremal-coefficient error {worst:.4f} (< 0.03); "
           f"KS p-values {pvals[0]:.3f}/{pvals[1]:.3f} (> 0.01)")


def test_criterion_9_covariance_sanity(m1_study):
    t0 = time.monotonic()
    # (a) factorized A vs plain 4-d Monte Carlo, 1e7 points per entry
    fam = get_family("inverted_husler_reiss")
    w = default_weights(fam)
    theta = (0.6,)
    A = _covariance_A(fam, theta, w)
    rng = np.random.default_rng(SEED + 9)
    nmc = 10_000_000
    worst_rel = 0.0
    p = theta[0]
    for j in range(w.q):
        for l in range(j, w.q):
            rj, rl = w.rects[j], w.rects[l]
            x = rng.uniform(rj.x_lo, rj.x_hi, nmc)
            y = rng.uniform(rj.y_lo, rj.y_hi, nmc)
            x2 = rng.uniform(rl.x_lo, rl.x_hi, nmc)
            y2 = rng.uniform(rl.y_lo, rl.y_hi, nmc)
            c = (np.minimum(x, x2) * np.minimum(y, y2)) ** p
            mc = c.mean() * rj.area * rl.area / (w.norms[j] * w.norms[l])
            worst_rel = max(worst_rel, abs(A[j, l] - mc) / abs(mc))
    # (b) 95% normal intervals cover the truth in >= 85% of reps.  The
    # deep-threshold design of the recovery study has a deliberate ~2-SE
    # bias at theta = 0.6, so coverage is assessed at a shallower
    # threshold (k = 400) where the asymptotic regime applies.
    coverage = {}
    for i, theta0 in enumerate(M1_THETAS):
        hits = []
        for rep in range(M1_REPS):
            est, se = _m1_rep(theta0, 30_000 + i * M1_REPS + rep, k=400,
                              with_cov=True)
            hits.append(abs(est - theta0) <= 1.96 * se)
        coverage[theta0] = float(np.mean(hits))
    elapsed = time.monotonic() - t0
    ok = (worst_rel < 0.01
          and all(c >= 0.85 for c in coverage.values())
          and elapsed < 20 * 60)
    report(9, ok, elapsed,
           f"max |A - MC|/MC = {worst_rel:.4f} (< 0.01); coverage "
           + ", ".join(f"{t}: {c:.2f}" for t, c in coverage.items())
           + " (>= 0.85)")


def test_criterion_10_thread_determinism(tmp_path):
    t0 = time.monotonic()
    identical = True
    specs = {
        "bivariate": dict(kind="bias_rmse_vs_k", model="m1",
                          family="inverted_husler_reiss", n=800,
                          replications=4, sweep=(80, 160), truth=(0.6,)),
        "grid": dict(kind="parameter_grid", model="m3", family="random_scale",
                     n=600, replications=3, sweep=((0.4,), (1.2,)), truth=(),
                     k=80),
        "spatial": dict(kind="spatial", model="spatial_ibr",
                        family="inverted_husler_reiss", n=500, replications=2,
                        sweep=(50,), truth=(1.0, 3.0),
                        coords=((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 2.0))),
    }
    for name, kw in specs.items():
        outputs = []
        for threads in (1, 2):
            result = run_study(StudySpec(seed=SEED, threads=threads, **kw))
            raw = tmp_path / f"{name}_{threads}_raw.csv"
            summ = tmp_path / f"{name}_{threads}_sum.csv"
            write_raw_csv(raw, result)
            write_summary_csv(summ, result)
            outputs.append(raw.read_bytes() + summ.read_bytes())
        identical &= outputs[0] == outputs[1]
    elapsed = time.monotonic() - t0
    report(10, identical, elapsed,
           f"raw+summary CSVs byte-identical for 1 vs 2 threads "
           f"across all three study kinds: {identical}")
