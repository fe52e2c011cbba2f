#!/usr/bin/env python3
"""Random-scale model: bias of the fitted tail parameter across a grid of
true lambda values, highlighting the regime boundary near lambda = 1.

Usage: python3 scripts/study_m3_grid.py [outdir]
"""

import json
import sys
import time

from tailfit.bench import StudySpec, run_study, write_raw_csv, write_summary_csv


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    grid = tuple((round(0.2 * i, 1),) for i in range(1, 10))
    spec = StudySpec(
        kind="parameter_grid",
        model="m3",
        family="random_scale",
        n=5000,
        replications=100,
        sweep=grid,
        truth=(),
        seed=2026,
        k=400,
        threads=1,
    )
    t0 = time.time()
    result = run_study(spec)
    write_raw_csv(f"{outdir}/m3_grid_raw.csv", result)
    write_summary_csv(f"{outdir}/m3_grid_summary.csv", result)
    print(json.dumps({
        "wall_clock_s": round(time.time() - t0, 1),
        "n_failed": result.n_failed,
        "bias_by_lambda": {
            str(s["truth"][0]): s["bias"][0] for s in result.summary
        },
    }, indent=2))


if __name__ == "__main__":
    main()
