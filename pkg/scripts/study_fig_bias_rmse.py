#!/usr/bin/env python3
"""Bias/RMSE of the bivariate estimator as the threshold k varies.

Desk-scale version of the main bivariate Monte Carlo figure: one model,
one truth, a sweep over k, boxplot quantiles in the summary CSV.

Usage: python3 scripts/study_fig_bias_rmse.py [outdir]
"""

import json
import sys
import time

from tailfit.bench import StudySpec, run_study, write_raw_csv, write_summary_csv


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    spec = StudySpec(
        kind="bias_rmse_vs_k",
        model="m1",
        family="inverted_husler_reiss",
        n=5000,
        replications=100,
        sweep=(200, 400, 800, 1200, 1600),
        truth=(0.75,),
        seed=2026,
        threads=1,
    )
    t0 = time.time()
    result = run_study(spec)
    write_raw_csv(f"{outdir}/bias_rmse_vs_k_raw.csv", result)
    write_summary_csv(f"{outdir}/bias_rmse_vs_k_summary.csv", result)
    print(json.dumps({
        "wall_clock_s": round(time.time() - t0, 1),
        "n_failed": result.n_failed,
        "summary": [
            {"k": s["k"], "bias": s["bias"], "rmse": s["rmse"]}
            for s in result.summary
        ],
    }, indent=2))


if __name__ == "__main__":
    main()
