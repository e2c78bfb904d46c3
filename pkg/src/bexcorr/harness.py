"""Monte Carlo sweep engine: estimator MSE vs the two lower bounds.

Determinism contract
--------------------
Replication i of a cell always draws from the substream
(master_seed, stream_id=i), and per-replication deviations are
accumulated with exact (fsum) summation inside fixed-size batches that
are keyed by replication index.  Batch partials are merged in batch
order.  The result is bit-identical for any number of workers and any
scheduling, which the acceptance suite verifies by comparing CSV bytes
across 1, 4 and 8 workers.

Scale presets
-------------
``desk``  : n = 50, r = 0:0.1:0.9, 1e5 replications -- minutes, keeps
            all qualitative conclusions within Monte Carlo error.
``paper`` : n in {10, 50, 200}, r = 0:0.02:0.98, 1e6 replications --
            the full-scale experiment (slow).
"""

from __future__ import annotations

import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds as bounds_mod
from .errors import ConfigError, DegenerateSampleError
from .estimators import (
    EXPONENTIAL,
    RAYLEIGH,
    r1_from_moments,
    r2_from_moments,
    r3_from_moments,
    sample_moments,
)
from .model import ModelParams
from .sampling import SeedSpec, sample_pairs

__all__ = [
    "SweepConfig",
    "CellStats",
    "SweepResult",
    "run_cell",
    "run_sweep",
    "emit",
    "parse_r_grid",
    "load_config",
    "CSV_COLUMNS",
]

ESTIMATOR_NAMES = ("r1", "r2", "r3")

#: replications per accumulation batch; part of the determinism
#: contract (changing it changes rounding of the merged partials).
BATCH_SIZE = 1024

#: a cell fails if more than this fraction of replications raise
#: degenerate-sample errors (probability-zero events for n >= 2).
DEGENERATE_LIMIT = 1e-6

CSV_COLUMNS = (
    "kind",
    "n",
    "r",
    "estimator",
    "mse_hat",
    "bias_hat",
    "var_hat",
    "censor_frac",
    "mc_se",
    "sigma2_cr",
    "eps2_ms",
    "reps",
    "master_seed",
)


def parse_r_grid(spec: str) -> tuple[float, ...]:
    """Parse "start:step:stop" (inclusive) into a grid tuple."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"r grid must be start:step:stop, got {spec!r}")
    try:
        start, step, stop = (float(x) for x in parts)
    except ValueError as exc:
        raise ConfigError(f"bad r grid {spec!r}: {exc}") from None
    if step <= 0 or stop < start:
        raise ConfigError(f"bad r grid {spec!r}")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return tuple(round(start + k * step, 10) for k in range(count))


@dataclass(frozen=True)
class SweepConfig:
    """Configuration of one Monte Carlo sweep."""

    n_list: tuple[int, ...] = (10, 50, 200)
    r_grid: tuple[float, ...] = field(default_factory=lambda: parse_r_grid("0:0.02:0.98"))
    reps: int = 1_000_000
    master_seed: int = 20240
    estimators: tuple[str, ...] = ESTIMATOR_NAMES
    sigma2_x: float = 1.0
    sigma2_y: float = 1.0
    workers: int = 1
    include_bounds: bool = True

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if not self.n_list or any(n < 2 for n in self.n_list):
            raise ConfigError("every sample size must be >= 2")
        if not self.r_grid or any(not (0.0 <= r <= 0.98) for r in self.r_grid):
            raise ConfigError("r grid must lie within [0, 0.98]")
        bad = [e for e in self.estimators if e not in ESTIMATOR_NAMES]
        if bad or not self.estimators:
            raise ConfigError(f"estimators must be a non-empty subset of {ESTIMATOR_NAMES}, got {bad}")
        if self.sigma2_x <= 0 or self.sigma2_y <= 0:
            raise ConfigError("sigma2 values must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def preset(cls, name: str, **overrides) -> "SweepConfig":
        if name == "desk":
            base = dict(n_list=(50,), r_grid=parse_r_grid("0:0.1:0.9"), reps=100_000)
        elif name == "paper":
            base = dict(n_list=(10, 50, 200), r_grid=parse_r_grid("0:0.02:0.98"), reps=1_000_000)
        else:
            raise ConfigError(f"unknown preset {name!r} (expected desk or paper)")
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class CellStats:
    """Monte Carlo result of one (n, r, estimator) cell."""

    n: int
    r: float
    estimator: str
    reps: int
    mse_hat: float
    bias_hat: float
    var_hat: float
    censor_frac: float
    mc_se: float
    degenerate_count: int = 0


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: SweepConfig
    cells: tuple[CellStats, ...]
    bounds: dict[int, bounds_mod.BoundCurve]
    wall_time_s: float
    versions: dict[str, str]


def _batch_partials(task):
    """Accumulate one range of batches of one cell (worker entry point).

    Returns, per batch and per estimator, the exact sums of d, d^2 and
    d^4 (d = estimate - r) plus censoring/degeneracy counts.  Batches
    are keyed by replication index, so the caller can merge partials in
    a schedule-independent order.
    """
    r, sx2, sy2, n, master_seed, which, reps, batch_lo, batch_hi = task
    p = ModelParams(r, sx2, sy2)
    out = []
    for b in range(batch_lo, batch_hi):
        lo = b * BATCH_SIZE
        hi = min(lo + BATCH_SIZE, reps)
        values = {e: [] for e in which}
        censored = dict.fromkeys(which, 0)
        degenerate = dict.fromkeys(which, 0)
        for i in range(lo, hi):
            s = sample_pairs(p, n, SeedSpec(master_seed, i))
            moments = {}
            if "r1" in which:
                moments[EXPONENTIAL] = sample_moments(s, EXPONENTIAL)
            if "r2" in which or "r3" in which:
                moments[RAYLEIGH] = sample_moments(s, RAYLEIGH)
            for e in which:
                try:
                    if e == "r1":
                        est = r1_from_moments(moments[EXPONENTIAL])
                    elif e == "r2":
                        est = r2_from_moments(moments[RAYLEIGH])
                    else:
                        est = r3_from_moments(moments[RAYLEIGH])
                except DegenerateSampleError:
                    degenerate[e] += 1
                    continue
                values[e].append(est.value - r)
                if est.censored:
                    censored[e] += 1
        partial = {}
        for e in which:
            d = np.asarray(values[e])
            d2 = d * d
            partial[e] = (
                math.fsum(d.tolist()),
                math.fsum(d2.tolist()),
                math.fsum((d2 * d2).tolist()),
                censored[e],
                degenerate[e],
                len(values[e]),
            )
        out.append((b, partial))
    return out


def _merge_cell(partials, n, r, which, reps):
    stats = {}
    for e in which:
        rows = [p[e] for _, p in partials]
        count = sum(row[5] for row in rows)
        degenerate = sum(row[4] for row in rows)
        if degenerate > DEGENERATE_LIMIT * reps:
            raise DegenerateSampleError(
                f"cell n={n} r={r} estimator={e}: {degenerate}/{reps} degenerate replications"
            )
        s1 = math.fsum(row[0] for row in rows)
        s2 = math.fsum(row[1] for row in rows)
        s4 = math.fsum(row[2] for row in rows)
        censored = sum(row[3] for row in rows)
        bias = s1 / count
        mse = s2 / count
        var = mse - bias * bias
        mc_se = math.sqrt(max(0.0, s4 / count - mse * mse) / count)
        stats[e] = CellStats(
            n=n,
            r=r,
            estimator=e,
            reps=count,
            mse_hat=mse,
            bias_hat=bias,
            var_hat=var,
            censor_frac=censored / count,
            mc_se=mc_se,
            degenerate_count=degenerate,
        )
    return stats


def run_cell(
    p: ModelParams,
    n: int,
    reps: int,
    estimators=ESTIMATOR_NAMES,
    master_seed: int = 0,
    workers: int = 1,
    _executor=None,
) -> dict[str, CellStats]:
    """Monte Carlo statistics of the requested estimators at one (n, r).

    Replication i uses substream (master_seed, i); results are
    bit-identical for any ``workers`` value.
    """
    which = tuple(estimators)
    n_batches = (reps + BATCH_SIZE - 1) // BATCH_SIZE
    if workers <= 1 and _executor is None:
        partials = _batch_partials(
            (p.r, p.sigma2_x, p.sigma2_y, n, master_seed, which, reps, 0, n_batches)
        )
    else:
        span = max(1, math.ceil(n_batches / (workers * 4)))
        tasks = [
            (p.r, p.sigma2_x, p.sigma2_y, n, master_seed, which, reps, lo, min(lo + span, n_batches))
            for lo in range(0, n_batches, span)
        ]
        if _executor is not None:
            chunks = list(_executor.map(_batch_partials, tasks))
        else:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                chunks = list(ex.map(_batch_partials, tasks))
        partials = [item for chunk in chunks for item in chunk]
    partials.sort(key=lambda item: item[0])
    return _merge_cell(partials, n, p.r, which, reps)


def _bound_curves(cfg: SweepConfig) -> dict[int, bounds_mod.BoundCurve]:
    # the FIM depends only on (r, sigma2), not n, so compute it once per
    # grid point and reuse it across sample sizes
    grid = np.asarray(cfg.r_grid)
    params = [ModelParams(float(r), cfg.sigma2_x, cfg.sigma2_y) for r in grid]
    fims = [bounds_mod.fisher_info(p) for p in params]
    curves = {}
    for n in cfg.n_list:
        sigma2 = np.array(
            [bounds_mod.crb(p, n, fim=f) for p, f in zip(params, fims)]
        )
        eps2 = np.array(
            [bounds_mod.mse_bound(float(r), s) for r, s in zip(grid, sigma2)]
        )
        curves[n] = bounds_mod.BoundCurve(
            n=n,
            r=grid,
            sigma2_cr=sigma2,
            eps2_ms=eps2,
            region_flag=grid < 3.0 * np.sqrt(sigma2),
        )
    return curves


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run every (n, r) cell of the sweep and attach bound curves per n."""
    t0 = time.monotonic()
    curves = _bound_curves(cfg) if cfg.include_bounds else {}
    cells = []
    executor = None
    try:
        if cfg.workers > 1:
            executor = ProcessPoolExecutor(max_workers=cfg.workers)
        for n in cfg.n_list:
            for r in cfg.r_grid:
                p = ModelParams(r, cfg.sigma2_x, cfg.sigma2_y)
                stats = run_cell(
                    p,
                    n,
                    cfg.reps,
                    cfg.estimators,
                    cfg.master_seed,
                    workers=cfg.workers,
                    _executor=executor,
                )
                cells.extend(stats[e] for e in cfg.estimators)
    finally:
        if executor is not None:
            executor.shutdown()
    import scipy

    versions = {
        "bexcorr": _package_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }
    return SweepResult(
        config=cfg,
        cells=tuple(cells),
        bounds=curves,
        wall_time_s=time.monotonic() - t0,
        versions=versions,
    )


def _package_version() -> str:
    from . import __version__

    return __version__


def _fmt(x) -> str:
    """Shortest round-trip decimal form, for byte-stable CSV output."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _csv_rows(result: SweepResult):
    cfg = result.config
    lookup = {}
    for n, curve in result.bounds.items():
        for i, r in enumerate(curve.r):
            lookup[(n, round(float(r), 10))] = (
                float(curve.sigma2_cr[i]),
                float(curve.eps2_ms[i]),
            )
    rows = [",".join(CSV_COLUMNS)]
    for cell in result.cells:
        cr, ms = lookup.get((cell.n, round(cell.r, 10)), (None, None))
        rows.append(
            ",".join(
                (
                    "estimate",
                    _fmt(cell.n),
                    _fmt(cell.r),
                    cell.estimator,
                    _fmt(cell.mse_hat),
                    _fmt(cell.bias_hat),
                    _fmt(cell.var_hat),
                    _fmt(cell.censor_frac),
                    _fmt(cell.mc_se),
                    _fmt(cr),
                    _fmt(ms),
                    _fmt(cell.reps),
                    _fmt(cfg.master_seed),
                )
            )
        )
    for n in cfg.n_list:
        curve = result.bounds.get(n)
        if curve is None:
            continue
        for i, r in enumerate(curve.r):
            rows.append(
                ",".join(
                    (
                        "bound",
                        _fmt(n),
                        _fmt(float(r)),
                        "",
                        "",
                        "",
                        "",
                        "",
                        "",
                        _fmt(float(curve.sigma2_cr[i])),
                        _fmt(float(curve.eps2_ms[i])),
                        "",
                        _fmt(cfg.master_seed),
                    )
                )
            )
    return rows


_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Render estimator MSE vs r with the CRB and constrained-bound overlays."""
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
est = defaultdict(list)
bnd = defaultdict(list)
with open(path, newline="") as fh:
    for row in csv.DictReader(fh):
        n = int(row["n"])
        if row["kind"] == "estimate":
            est[(n, row["estimator"])].append((float(row["r"]), float(row["mse_hat"])))
        else:
            bnd[n].append((float(row["r"]), float(row["sigma2_cr"]), float(row["eps2_ms"])))

sizes = sorted({{key[0] for key in est}})
fig, axes = plt.subplots(1, len(sizes), figsize=(5 * len(sizes), 4), squeeze=False)
for ax, n in zip(axes[0], sizes):
    for name, style in (("r1", "o-"), ("r2", "s-"), ("r3", "d-")):
        pts = sorted(est.get((n, name), []))
        if pts:
            ax.semilogy([p[0] for p in pts], [max(p[1], 1e-12) for p in pts], style, ms=3, label=name)
    curve = sorted(bnd.get(n, []))
    if curve:
        ax.semilogy([p[0] for p in curve], [p[1] for p in curve], "k--", label="CRB")
        ax.semilogy([p[0] for p in curve], [p[2] for p in curve], "k:", label="MSE bound")
    ax.set_title(f"n = {{n}}")
    ax.set_xlabel("r")
    ax.set_ylabel("mean-square error")
    ax.legend()
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
'''


def emit(result: SweepResult, out_dir, name: str = "sweep", plot_script: bool = False) -> dict[str, str]:
    """Write results CSV + JSON manifest (+ optional plot script).

    The CSV is byte-deterministic for a fixed config; the manifest
    records config, seed, versions and wall time, and can be fed back
    to ``bexcorr sweep --config`` to reproduce the CSV exactly.
    """
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    rows = _csv_rows(result)
    csv_path.write_text("\n".join(rows) + "\n")
    manifest = {
        "config": asdict(result.config),
        "versions": result.versions,
        "wall_time_s": result.wall_time_s,
        "rows": len(rows) - 1,
        "csv": csv_path.name,
    }
    manifest_path = out / f"{name}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    paths = {"csv": str(csv_path), "manifest": str(manifest_path)}
    if plot_script:
        script_path = out / f"plot_{name}.py"
        script_path.write_text(_PLOT_TEMPLATE.format(csv_name=csv_path.name))
        paths["plot_script"] = str(script_path)
    return paths


def _coerce_config_value(key: str, value):
    if key == "n_list":
        if isinstance(value, str):
            value = [int(x) for x in value.split(",") if x.strip()]
        return tuple(int(x) for x in value)
    if key == "r_grid":
        if isinstance(value, str):
            return parse_r_grid(value) if ":" in value else tuple(float(x) for x in value.split(","))
        return tuple(float(x) for x in value)
    if key == "estimators":
        if isinstance(value, str):
            return tuple(x.strip() for x in value.split(",") if x.strip())
        return tuple(value)
    if key in ("reps", "master_seed", "workers"):
        return int(value)
    if key in ("sigma2_x", "sigma2_y"):
        return float(value)
    if key == "include_bounds":
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes")
        return bool(value)
    raise ConfigError(f"unknown config key {key!r}")


def load_config(path) -> SweepConfig:
    """Load a SweepConfig from JSON (flat or a run manifest) or key=value text."""
    from pathlib import Path

    text = Path(path).read_text()
    raw = None
    try:
        parsed = json.loads(text)
    except json.JSONDecodeError:
        parsed = None
    if isinstance(parsed, dict):
        raw = parsed.get("config", parsed)
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: JSON config must be an object")
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            raw[key] = value
    try:
        kwargs = {k: _coerce_config_value(k, v) for k, v in raw.items()}
        return SweepConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc
