"""Monte Carlo study harness: determinism, summaries, CSV output."""

import csv

import numpy as np
import pytest

from tailfit.bench import (
    StudySpec,
    resolve_threads,
    run_study,
    write_raw_csv,
    write_summary_csv,
)

COORDS = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 2.0), (1.0, 2.0))


def small_spec(threads=1, seed=11):
    return StudySpec(
        kind="bias_rmse_vs_k",
        model="m1",
        family="inverted_husler_reiss",
        n=800,
        replications=4,
        sweep=(80, 160),
        truth=(0.6,),
        seed=seed,
        threads=threads,
    )


def test_resolve_threads_env(monkeypatch):
    monkeypatch.delenv("TAILFIT_THREADS", raising=False)
    assert resolve_threads(3) == 3
    monkeypatch.setenv("TAILFIT_THREADS", "2")
    assert resolve_threads(0) == 2
    monkeypatch.delenv("TAILFIT_THREADS")
    assert resolve_threads(0) >= 1


def test_study_summary_consistency():
    result = run_study(small_spec())
    assert result.n_failed == 0
    assert len(result.rows) == 8  # 2 sweep points x 4 reps
    for row in result.summary:
        # rmse^2 = bias^2 + variance (up to fp error), per component
        for rmse, bias, var in zip(row["rmse"], row["bias"], row["variance"]):
            assert rmse**2 == pytest.approx(bias**2 + var, rel=1e-9, abs=1e-12)
        assert row["n_ok"] == 4
        qs = np.array([row[f"q{q}"] for q in (2.5, 25.0, 50.0, 75.0, 97.5)])
        assert np.all(np.diff(qs, axis=0) >= 0)


def test_study_deterministic_across_threads():
    a = run_study(small_spec(threads=1))
    b = run_study(small_spec(threads=2))
    est_a = [row["estimate"] for row in a.rows]
    est_b = [row["estimate"] for row in b.rows]
    assert est_a == est_b
    assert a.summary == b.summary


def test_study_seed_changes_results():
    a = run_study(small_spec(seed=11))
    b = run_study(small_spec(seed=12))
    assert [r["estimate"] for r in a.rows] != [r["estimate"] for r in b.rows]


def test_csv_round_trip(tmp_path):
    result = run_study(small_spec())
    raw, summary = tmp_path / "raw.csv", tmp_path / "sum.csv"
    write_raw_csv(raw, result)
    write_summary_csv(summary, result)
    with open(raw) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(result.rows)
    assert "estimate" in rows[0] and "sweep" in rows[0]
    with open(summary) as fh:
        srows = list(csv.DictReader(fh))
    assert len(srows) == len(result.summary)
    assert float(srows[0]["rmse"]) >= abs(float(srows[0]["bias"]))


def test_parameter_grid_study():
    spec = StudySpec(
        kind="parameter_grid",
        model="m3",
        family="random_scale",
        n=800,
        replications=3,
        sweep=((0.4,), (1.2,)),
        truth=(),
        seed=5,
        k=100,
        threads=1,
    )
    result = run_study(spec)
    assert result.n_failed == 0
    sweeps = {tuple(np.atleast_1d(r["sweep"])) for r in result.rows}
    assert len(sweeps) == 2


def test_spatial_study_smoke():
    spec = StudySpec(
        kind="spatial",
        model="spatial_ibr",
        family="inverted_husler_reiss",
        n=600,
        replications=2,
        sweep=(60,),
        truth=(1.0, 3.0),
        seed=3,
        coords=COORDS,
        threads=1,
    )
    result = run_study(spec)
    assert result.n_failed == 0
    row = result.summary[0]
    assert 0.0 <= row["mean_sup_ls"] <= 1.0
    assert 0.0 <= row["mean_sup_joint"] <= 1.0
    assert np.all(np.asarray(row["mean_abs_diff_ls_joint"]) >= 0.0)
    assert len(row["iqr_spatial"]) == len(row["iqr_pairwise"]) == 5


def test_bad_spec_rejected():
    with pytest.raises((ValueError, TypeError)):
        StudySpec(kind="nope", model="m1", family="inverted_husler_reiss",
                  n=100, replications=2, sweep=(10,), truth=(0.6,), seed=0)
    with pytest.raises(ValueError):
        StudySpec(kind="bias_rmse_vs_k", model="m1",
                  family="inverted_husler_reiss", n=100, replications=1,
                  sweep=(10,), truth=(0.6,), seed=0)
