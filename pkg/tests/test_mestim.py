"""M-estimation: weights, moment vectors, profiled scale, fits, covariance."""

import numpy as np
import pytest

from tailfit.empirical import TailIndexChoice, rank_transform, select_khat
from tailfit.errors import UnsupportedFamily
from tailfit.families import Rectangle, get_family
from tailfit.mestim import (
    DEFAULT_THETA_REF,
    STANDARD_RECTS,
    WEIGHT_PRESETS,
    FitOptions,
    default_weights,
    empirical_moment_vector,
    fit_bivariate,
    model_moment_vector,
    plugin_covariance_AI,
    preset_weights,
    profile_zeta,
)
from tailfit.simulate import SimSpec, simulate


def test_standard_rects():
    assert len(STANDARD_RECTS) == 5
    assert STANDARD_RECTS[0] == Rectangle(0.0, 1.0, 0.0, 1.0)
    assert STANDARD_RECTS[3] == Rectangle(0.0, 1.0, 0.0, 3.0)


def test_default_weights_norms_ihr():
    # reference theta 0.6: integral of (xy)^0.6 over [0,X]^2 = X^3.2/1.6^2
    w = default_weights("inverted_husler_reiss")
    assert w.theta_ref == (0.6,)
    assert w.norms[0] == pytest.approx(1.0 / 1.6**2)  # 0.390625
    assert w.norms[1] == pytest.approx(4.0**1.6 / 1.6**2)  # 3.589682...
    assert w.q == 5
    assert w.T == 3.0


def test_presets_subset_standard():
    fam = get_family("inverted_husler_reiss")
    for name, idx in WEIGHT_PRESETS.items():
        w = preset_weights(fam, name)
        assert w.rects == tuple(STANDARD_RECTS[i] for i in idx)


def test_model_moment_vector_is_one_at_reference():
    for fid, ref in DEFAULT_THETA_REF.items():
        w = default_weights(fid)
        v = model_moment_vector(fid, ref, w)
        assert np.allclose(v, 1.0, atol=1e-9)


def test_profile_zeta_modes():
    v = np.array([1.0, 2.0, 3.0])
    b = 0.7 * v
    assert profile_zeta(v, b, "lsq") == pytest.approx(0.7)
    assert profile_zeta(v, b, "ratio") == pytest.approx(0.7)
    # floor keeps zeta positive
    assert profile_zeta(v, -b, "lsq") == pytest.approx(1e-12)
    with pytest.raises(ValueError):
        profile_zeta(v, b, "bogus")


def test_empirical_moment_vector_matches_rect_integrals():
    from tailfit.empirical import rect_integral_Q

    rng = np.random.default_rng(0)
    s = rank_transform(rng.standard_normal((150, 2)))
    w = default_weights("inverted_husler_reiss")
    k = 30
    b = empirical_moment_vector(s, (0, 1), k, w)
    for j, rect in enumerate(w.rects):
        want = rect_integral_Q(s, (0, 1), k, rect) / w.norms[j]
        assert b[j] == pytest.approx(want)


def synthetic_fit(fid, theta0, zeta0=0.8, seed=0):
    """Noise-free inversion: plant b = zeta0 * v(theta0) and fit."""
    fam = get_family(fid)
    w = default_weights(fam)
    v0 = model_moment_vector(fam, theta0, w)

    import tailfit.mestim as m

    sample = rank_transform(np.random.default_rng(seed).standard_normal((1000, 2)))
    choice = TailIndexChoice(mode="fixed_k", resolved_k=100, resolved_m=0.0)
    orig = m.empirical_moment_vector
    m.empirical_moment_vector = lambda *a, **k: zeta0 * v0
    try:
        fit = fit_bivariate(sample, (0, 1), fam, w, choice, FitOptions(seed=seed))
    finally:
        m.empirical_moment_vector = orig
    return fam, fit


@pytest.mark.parametrize(
    "fid, theta0",
    [
        ("inverted_husler_reiss", (0.72,)),
        ("inverted_asym_logistic", (0.55, 0.8)),
        ("random_scale", (1.35,)),
        ("husler_reiss_ad", (1.4,)),
        ("asym_logistic_ad", (0.7, 1.0, 2.4)),
    ],
)
def test_noise_free_inversion(fid, theta0):
    fam, fit = synthetic_fit(fid, theta0)
    want = np.asarray(fam.canonicalize(np.asarray(theta0, dtype=float)))
    assert np.max(np.abs(np.asarray(fit.theta_hat) - want)) < 1e-6
    assert abs(fit.zeta_hat - 0.8) < 1e-6
    assert fit.objective < 1e-10
    assert fit.converged


def test_fit_bivariate_on_simulated_data():
    spec = SimSpec(model="m1", n=3000, params={"theta": 0.7}, margins="uniform",
                   noise_pareto_alpha=None, coords=None)
    data = simulate(spec, seed=42)
    s = rank_transform(data)
    fam = get_family("inverted_husler_reiss")
    w = default_weights(fam)
    choice = select_khat(s, (0, 1), 200)
    fit = fit_bivariate(s, (0, 1), fam, w, choice, FitOptions(seed=1))
    assert fit.converged
    assert abs(fit.theta_hat[0] - 0.7) < 0.12
    assert fit.eta_hat == pytest.approx(1.0 / (2 * fit.theta_hat[0]))
    assert fit.zeta_hat > 0
    assert fit.sigma_hat > 0
    assert fit.family_id == "inverted_husler_reiss"


def test_fit_reports_k_and_m():
    rng = np.random.default_rng(9)
    s = rank_transform(rng.standard_normal((800, 2)))
    fam = get_family("inverted_husler_reiss")
    w = default_weights(fam)
    choice = select_khat(s, (0, 1), 60)
    fit = fit_bivariate(s, (0, 1), fam, w, choice, FitOptions(seed=0))
    assert fit.k_used == choice.resolved_k
    assert fit.m_used >= 60


def test_plugin_covariance_psd_and_requires_product_form():
    fam, fit = synthetic_fit("inverted_husler_reiss", (0.65,))
    rng = np.random.default_rng(3)
    s = rank_transform(rng.standard_normal((500, 2)))
    w = default_weights(fam)
    cov = plugin_covariance_AI(s, (0, 1), fam, fit, w)
    assert cov.shape == (2, 2)
    assert np.allclose(cov, cov.T)
    assert np.all(np.linalg.eigvalsh(cov) >= -1e-12)

    ad_fam, ad_fit = synthetic_fit("husler_reiss_ad", (1.0,))
    with pytest.raises(UnsupportedFamily):
        plugin_covariance_AI(s, (0, 1), ad_fam, ad_fit, default_weights(ad_fam))


def test_covariance_shrinks_with_m():
    fam, fit = synthetic_fit("inverted_husler_reiss", (0.65,))
    rng = np.random.default_rng(3)
    big = rank_transform(rng.standard_normal((4000, 2)))
    w = default_weights(fam)
    fit_small = fit.__class__(**{**fit.__dict__, "m_used": 100.0})
    fit_large = fit.__class__(**{**fit.__dict__, "m_used": 400.0})
    cov_small = plugin_covariance_AI(big, (0, 1), fam, fit_small, w)
    cov_large = plugin_covariance_AI(big, (0, 1), fam, fit_large, w)
    assert cov_large[0, 0] < cov_small[0, 0]


def test_objective_minimal_at_truth():
    # probe the profiled objective along a grid; planted truth should win
    fam = get_family("inverted_husler_reiss")
    w = default_weights(fam)
    theta0, zeta0 = (0.7,), 0.9
    b = zeta0 * model_moment_vector(fam, theta0, w)

    def obj(th):
        v = model_moment_vector(fam, (th,), w)
        z = profile_zeta(v, b)
        return float(np.sum((z * v - b) ** 2))

    grid = np.linspace(0.52, 0.99, 60)
    vals = [obj(t) for t in grid]
    assert grid[int(np.argmin(vals))] == pytest.approx(0.7, abs=0.01)
    assert obj(0.7) < 1e-20
