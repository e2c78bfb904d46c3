"""bexcorr command-line interface.

Subcommands: sample (draw paired data), estimate (run the censored
estimators on a CSV), bounds (CRB + constrained MSE bound over an r
grid), sweep (Monte Carlo experiment with CSV/manifest output).

Exit codes: 0 success, 2 configuration error, 3 numerical-accuracy
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .bounds import bound_curve, crb, fisher_info, mse_bound
from .errors import (
    AccuracyError,
    ConfigError,
    DegenerateModelError,
    DegenerateSampleError,
    DomainError,
)
from .estimators import estimate_r1, estimate_r2, estimate_r3
from .harness import SweepConfig, emit, load_config, parse_r_grid, run_sweep
from .model import ModelParams
from .sampling import PairedSample, SeedSpec, sample_pairs

_ESTIMATORS = {"r1": estimate_r1, "r2": estimate_r2, "r3": estimate_r3}


def _cmd_sample(args) -> int:
    try:
        p = ModelParams(args.r, args.sx2, args.sy2)
        seed = SeedSpec(args.seed)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    s = sample_pairs(p, args.n, seed)
    out = sys.stdout
    rows = zip(s.v.tolist(), s.z.tolist(), s.u.tolist(), s.w.tolist())
    if args.format == "csv":
        out.write("v,z,u,w\n")
        for v, z, u, w in rows:
            out.write(f"{v!r},{z!r},{u!r},{w!r}\n")
    else:
        for v, z, u, w in rows:
            out.write(json.dumps({"v": v, "z": z, "u": u, "w": w}) + "\n")
    return 0


def _load_pairs(path: str) -> PairedSample:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigError(f"{path}: empty input")
        fields = {name.strip().lower() for name in reader.fieldnames}
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no data rows")

    def column(name):
        try:
            return np.array([float(row[name]) for row in rows])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{path}: bad column {name!r}: {exc}") from exc

    if {"v", "z"} <= fields:
        return PairedSample.from_rayleigh(column("v"), column("z"))
    if {"u", "w"} <= fields:
        return PairedSample.from_exponential(column("u"), column("w"))
    raise ConfigError(f"{path}: need columns v,z or u,w (got {sorted(fields)})")


def _cmd_estimate(args) -> int:
    sample = _load_pairs(args.input)
    names = list(_ESTIMATORS) if args.estimator == "all" else [args.estimator]
    results = {name: _ESTIMATORS[name](sample) for name in names}
    if args.format == "json":
        payload = {
            name: {"value": est.value, "raw": est.raw, "censored": est.censored}
            for name, est in results.items()
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("estimator,value,raw,censored")
        for name, est in results.items():
            print(f"{name},{est.value!r},{est.raw!r},{est.censored}")
    return 0


def _cmd_bounds(args) -> int:
    grid = parse_r_grid(args.r_grid)
    if args.n < 2:
        raise ConfigError("--n must be >= 2")
    tmpl = ModelParams(0.0, args.sx2, args.sy2)
    if args.method == "quad":
        curve = bound_curve(args.n, np.asarray(grid), tmpl)
        sigma2_cr = curve.sigma2_cr
        eps2 = curve.eps2_ms
        flags = curve.region_flag
    else:
        sigma2_cr = np.empty(len(grid))
        eps2 = np.empty(len(grid))
        for i, r in enumerate(grid):
            p = ModelParams(r, args.sx2, args.sy2)
            fim = fisher_info(p, method="montecarlo", draws=args.mc_draws, seed=SeedSpec(args.seed, i))
            sigma2_cr[i] = crb(p, args.n, fim=fim)
            eps2[i] = mse_bound(r, sigma2_cr[i])
        flags = np.asarray(grid) < 3.0 * np.sqrt(sigma2_cr)
    lines = ["r,n,sigma2_cr,eps2_ms,region_flag"]
    for i, r in enumerate(grid):
        lines.append(f"{r!r},{args.n},{float(sigma2_cr[i])!r},{float(eps2[i])!r},{int(flags[i])}")
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(grid)} grid points)")
    return 0


def _cmd_sweep(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = SweepConfig.preset(args.preset)
    else:
        raise ConfigError("sweep needs --config FILE or --preset desk|paper")
    if args.workers is not None:
        from dataclasses import replace

        cfg = replace(cfg, workers=args.workers)
    result = run_sweep(cfg)
    paths = emit(result, args.out, name=args.name, plot_script=args.plot_script)
    print(json.dumps(paths, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bexcorr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw paired Rayleigh/exponential observations")
    p.add_argument("--r", type=float, required=True, help="correlation coefficient in [0, 1]")
    p.add_argument("--sx2", type=float, default=1.0, help="sigma^2 of the X branch")
    p.add_argument("--sy2", type=float, default=1.0, help="sigma^2 of the Y branch")
    p.add_argument("--n", type=int, required=True, help="number of pairs")
    p.add_argument("--seed", type=int, default=0, help="master seed (stream 0)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("estimate", help="run censored estimators on a CSV of pairs")
    p.add_argument("--input", required=True, help="CSV with columns v,z or u,w")
    p.add_argument("--estimator", choices=("r1", "r2", "r3", "all"), default="all")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("bounds", help="CRB and constrained MSE bound over an r grid")
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--r-grid", default="0:0.02:0.98", help="start:step:stop")
    p.add_argument("--method", choices=("quad", "mc"), default="quad")
    p.add_argument("--mc-draws", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0, help="master seed for --method mc")
    p.add_argument("--sx2", type=float, default=1.0)
    p.add_argument("--sy2", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("sweep", help="Monte Carlo sweep comparing estimators to bounds")
    p.add_argument("--config", help="JSON / key=value config, or a previous run manifest")
    p.add_argument("--preset", choices=("desk", "paper"))
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--name", default="sweep", help="basename for csv/manifest")
    p.add_argument("--workers", type=int, default=None, help="override worker count")
    p.add_argument("--plot-script", action="store_true", help="also write a plot script")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, DomainError, DegenerateModelError, DegenerateSampleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
