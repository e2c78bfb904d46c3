#!/usr/bin/env python3
"""Run the desk-scale experiment and emit CSV + manifest + plot script.

Equivalent to ``bexcorr sweep --preset desk --plot-script``, kept as a
script so the experiment is one command from a fresh checkout:

    python scripts/run_desk_sweep.py [outdir] [--workers K] [--reps N]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bexcorr.harness import SweepConfig, emit, run_sweep


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="results")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--reps", type=int, default=None)
    args = ap.parse_args()

    overrides = {"workers": args.workers}
    if args.reps is not None:
        overrides["reps"] = args.reps
    cfg = SweepConfig.preset("desk", **overrides)
    print(f"desk sweep: n={cfg.n_list} grid={len(cfg.r_grid)} pts reps={cfg.reps}")
    result = run_sweep(cfg)
    paths = emit(result, args.outdir, name="desk", plot_script=True)
    print(f"wall time: {result.wall_time_s:.1f}s")
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
