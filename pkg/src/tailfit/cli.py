"""Command-line front end.

Subcommands: simulate | fit | fit-spatial | study.  Global flags:
--seed, --threads (env fallback TAILFIT_THREADS), --format {json,table}.
Exit codes: 0 success, 1 runtime/data error, 2 argument error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .bench import StudySpec, resolve_threads, run_study, write_raw_csv, write_summary_csv
from .empirical import TailIndexChoice, rank_transform, select_khat
from .errors import TailfitError
from .families import get_family
from .mestim import (
    WEIGHT_PRESETS,
    FitOptions,
    default_weights,
    fit_bivariate,
    plugin_covariance_AI,
    preset_weights,
)
from .simulate import SimSpec, simulate, write_coords_csv, write_samples_csv
from .spatial import SpatialModel, fit_joint, fit_least_squares, pairwise_fits

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _read_csv_matrix(path):
    """Numeric CSV with a header row; rejects ragged/non-numeric cells."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TailfitError(f"{path}: empty file")
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                raise TailfitError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {width}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                bad = next(i for i, cell in enumerate(row) if not _is_float(cell))
                raise TailfitError(
                    f"{path}: row {lineno}, column {bad + 1} ({header[bad]}): "
                    f"non-numeric cell {row[bad]!r}"
                ) from exc
    if not rows:
        raise TailfitError(f"{path}: no data rows")
    return header, np.asarray(rows)


def _is_float(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _read_coords_csv(path):
    header, mat = _read_csv_matrix(path)
    if [h.strip() for h in header] != ["id", "x", "y"]:
        raise TailfitError(f"{path}: expected header id,x,y")
    order = np.argsort(mat[:, 0])
    return mat[order, 1:3]


def _emit(payload, fmt):
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key in sorted(payload):
            print(f"{key:18s} {payload[key]}")


def _weights(family, name):
    if name == "g1":
        return default_weights(family)
    return preset_weights(family, name)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    params = {}
    if args.model == "m1":
        if args.theta is None:
            raise _usage("--theta is required for model m1")
        params = {"theta": args.theta[0]}
    elif args.model == "m2":
        if args.nu is None or args.phi is None:
            raise _usage("--nu and --phi are required for model m2")
        params = {"nu": args.nu, "phi": args.phi, "r": args.r}
    elif args.model == "m3":
        if args.lam is None:
            raise _usage("--lam is required for model m3")
        params = {"alpha_r": args.lam, "alpha_w": 1.0}
    else:  # spatial_ibr
        if args.alpha is None or args.beta is None or args.coords is None:
            raise _usage("--alpha, --beta and --coords are required for spatial_ibr")
        params = {"alpha": args.alpha, "beta": args.beta}
    coords = _read_coords_csv(args.coords) if args.model == "spatial_ibr" else None
    spec = SimSpec(
        model=args.model,
        n=args.n,
        params=params,
        margins=args.margins,
        noise_pareto_alpha=args.noise if args.noise > 0 else None,
        coords=coords,
    )
    data = simulate(spec, args.seed)
    write_samples_csv(args.out, data)
    if coords is not None:
        sidecar = args.out.rsplit(".csv", 1)[0] + ".coords.csv"
        write_coords_csv(sidecar, coords)
    manifest = {"model": args.model, "params": params, "n": args.n,
                "seed": args.seed, "out": args.out}
    print(json.dumps(manifest, sort_keys=True))
    return EXIT_OK


def cmd_fit(args):
    _, data = _read_csv_matrix(args.data)
    if data.shape[1] < 2:
        raise TailfitError("fit needs at least two data columns")
    sample = rank_transform(data[:, :2])
    fam = get_family(args.family)
    weights = _weights(fam, args.weights)
    if args.k is not None:
        if not 1 <= args.k <= sample.n:
            raise TailfitError(f"--k {args.k} outside 1..{sample.n}")
        choice = TailIndexChoice(mode="fixed_k", resolved_k=args.k, resolved_m=0.0)
    else:
        choice = select_khat(sample, (0, 1), args.m)
    fit = fit_bivariate(sample, (0, 1), fam, weights, choice, FitOptions(seed=args.seed))
    payload = {
        "family": fam.family_id,
        "theta_hat": list(fit.theta_hat),
        "zeta_hat": fit.zeta_hat,
        "sigma_hat": fit.sigma_hat,
        "eta_hat": fit.eta_hat,
        "objective": fit.objective,
        "k": fit.k_used,
        "m": fit.m_used,
        "converged": fit.converged,
        "boundary_flag": fit.boundary,
    }
    if args.covariance:
        cov = plugin_covariance_AI(sample, (0, 1), fam, fit, weights)
        payload["covariance"] = cov.tolist()
    _emit(payload, args.format)
    return EXIT_OK


def cmd_fit_spatial(args):
    _, data = _read_csv_matrix(args.data)
    coords = _read_coords_csv(args.coords)
    if coords.shape[0] != data.shape[1]:
        raise TailfitError(
            f"{data.shape[1]} data columns but {coords.shape[0]} coordinates"
        )
    sample = rank_transform(data)
    model = SpatialModel(coords=coords)
    weights = _weights(model.bivariate_family, args.weights)
    opts = FitOptions(seed=args.seed)
    if args.method == "joint":
        fit = fit_joint(sample, model, args.m, weights, opts)
        payload = {
            "alpha_hat": fit.vartheta_hat[0],
            "beta_hat": fit.vartheta_hat[1],
            "method": "joint",
            "objective": fit.objective,
            "m": args.m,
            "converged": fit.converged,
            "zeta_hats": list(fit.zeta_hats),
        }
    else:
        fits = pairwise_fits(sample, model, args.m, weights, opts)
        pairwise = [
            {
                "pair": list(model.pairs[s]),
                "distance": float(model.distances[s]),
                "theta_hat": fits[s].theta_hat[0],
                "k": fits[s].k_used,
            }
            for s in sorted(fits)
        ]
        if args.method == "pairwise":
            payload = {
                "alpha_hat": 0.0, "beta_hat": 0.0, "method": "pairwise",
                "objective": 0.0, "m": args.m, "converged": True,
                "pairwise": pairwise,
            }
            # pairwise-only mode reports no spatial parameter
            payload.pop("alpha_hat"), payload.pop("beta_hat")
            _emit(payload, args.format)
            return EXIT_OK
        fit = fit_least_squares(fits, model, opts)
        payload = {
            "alpha_hat": fit.vartheta_hat[0],
            "beta_hat": fit.vartheta_hat[1],
            "method": "ls",
            "objective": fit.objective,
            "m": args.m,
            "converged": fit.converged,
            "pairwise": pairwise,
        }
    _emit(payload, args.format)
    return EXIT_OK


_STUDY_KEYS = {
    "kind", "model", "family", "n", "replications", "sweep", "truth",
    "k", "noise", "weights", "coords", "metrics",
}
_VALID_METRICS = {
    "bias", "rmse", "euclid_bias", "euclid_rmse",
    "sup_theta_curve_error", "boxplot_quantiles",
}


def _parse_study_config(path):
    """key = value config; lists are comma-separated, tuples ;-separated."""
    conf = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _usage(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _STUDY_KEYS:
                raise _usage(f"{path}:{lineno}: unknown key {key!r}")
            conf[key] = value
    return conf


def _num_tuple(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def cmd_study(args):
    conf = _parse_study_config(args.config)
    for metric in _num_or_names(conf.get("metrics", "")):
        if metric not in _VALID_METRICS:
            raise _usage(f"unknown metric {metric!r}")
    kind = conf.get("kind", "bias_rmse_vs_k")
    sweep_txt = conf.get("sweep", "")
    if kind == "parameter_grid":
        sweep = tuple(_num_tuple(group) for group in sweep_txt.split(";") if group.strip())
    else:
        sweep = _num_tuple(sweep_txt)
    coords = ()
    if "coords" in conf:
        coords = tuple(map(tuple, _read_coords_csv(conf["coords"])))
    try:
        spec = StudySpec(
            kind=kind,
            model=conf["model"],
            family=conf.get("family", "inverted_husler_reiss"),
            n=int(conf.get("n", 5000)),
            replications=int(conf.get("replications", 200)),
            sweep=sweep,
            truth=_num_tuple(conf.get("truth", "")),
            seed=args.seed,
            k=int(conf["k"]) if "k" in conf else None,
            noise_pareto_alpha=(float(conf["noise"]) or None) if "noise" in conf else 4.0,
            weights=conf.get("weights", "g1"),
            coords=coords,
            threads=resolve_threads(args.threads),
        )
    except (KeyError, ValueError) as exc:
        raise _usage(f"bad study config: {exc}") from exc
    result = run_study(spec)
    write_raw_csv(args.out_raw, result)
    write_summary_csv(args.out_summary, result)
    echo = {
        "kind": spec.kind, "model": spec.model, "family": spec.family,
        "n": spec.n, "replications": spec.replications,
        "sweep": [list(np.atleast_1d(s)) for s in spec.sweep],
        "seed": spec.seed, "threads": spec.threads,
        "wall_clock_s": round(result.wall_clock, 3),
        "n_failed": result.n_failed,
        "raw_csv": args.out_raw, "summary_csv": args.out_summary,
    }
    print(json.dumps(echo, sort_keys=True))
    return EXIT_OK


def _num_or_names(text):
    return [x.strip() for x in text.split(",") if x.strip()]


class _UsageError(Exception):
    pass


def _usage(msg):
    return _UsageError(msg)


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="tailfit",
                                     description="Tail-dependence estimation toolkit")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=0,
                        help="0 = auto (TAILFIT_THREADS env var, then CPU count)")
    parser.add_argument("--format", choices=("json", "table"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated dataset as CSV")
    p.add_argument("--model", required=True,
                   choices=("m1", "m2", "m3", "spatial_ibr"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--theta", type=float, nargs="+")
    p.add_argument("--nu", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--coords", help="coordinates CSV (id,x,y) for spatial models")
    p.add_argument("--margins", choices=("uniform", "frechet"), default="frechet")
    p.add_argument("--noise", type=float, default=4.0,
                   help="Pareto noise index; 0 disables noise")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a bivariate tail family to CSV data")
    p.add_argument("--data", required=True)
    p.add_argument("--family", required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--k", type=int)
    grp.add_argument("--m", type=int)
    p.add_argument("--weights", choices=sorted(WEIGHT_PRESETS), default="g1")
    p.add_argument("--covariance", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fit-spatial", help="fit the spatial tail model")
    p.add_argument("--data", required=True)
    p.add_argument("--coords", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--method", choices=("pairwise", "ls", "joint"), default="ls")
    p.add_argument("--weights", choices=sorted(WEIGHT_PRESETS), default="g1")
    p.set_defaults(func=cmd_fit_spatial)

    p = sub.add_parser("study", help="run a Monte Carlo study from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-raw", default="study_raw.csv")
    p.add_argument("--out-summary", default="study_summary.csv")
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TailfitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
