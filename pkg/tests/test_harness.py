import json
import math
from pathlib import Path

import numpy as np
import pytest

from bexcorr.errors import ConfigError
from bexcorr.harness import (
    BATCH_SIZE,
    CSV_COLUMNS,
    CellStats,
    SweepConfig,
    emit,
    load_config,
    parse_r_grid,
    run_cell,
    run_sweep,
)
from bexcorr.model import ModelParams


class TestParseRGrid:
    def test_paper_grid(self):
        grid = parse_r_grid("0:0.02:0.98")
        assert len(grid) == 50
        assert grid[0] == 0.0 and grid[-1] == 0.98
        assert grid[3] == 0.06

    def test_single_point(self):
        assert parse_r_grid("0.5:0.1:0.5") == (0.5,)

    @pytest.mark.parametrize("bad", ["0:0.1", "a:b:c", "0:-0.1:0.5", "0.9:0.1:0.1"])
    def test_bad_specs(self, bad):
        with pytest.raises(ConfigError):
            parse_r_grid(bad)


class TestSweepConfig:
    def test_presets(self):
        desk = SweepConfig.preset("desk")
        assert desk.n_list == (50,) and desk.reps == 100_000
        paper = SweepConfig.preset("paper")
        assert paper.n_list == (10, 50, 200)
        assert len(paper.r_grid) == 50 and paper.reps == 1_000_000

    def test_preset_overrides(self):
        cfg = SweepConfig.preset("desk", reps=10, workers=2)
        assert cfg.reps == 10 and cfg.workers == 2

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(reps=0),
            dict(n_list=(1,)),
            dict(r_grid=(0.99,)),
            dict(estimators=("r9",)),
            dict(estimators=()),
            dict(sigma2_x=0.0),
            dict(workers=0),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            SweepConfig(**kwargs)


class TestRunCell:
    def test_mse_identity(self):
        stats = run_cell(ModelParams(0.4), 20, 4000, master_seed=51)
        for c in stats.values():
            assert c.mse_hat == pytest.approx(c.var_hat + c.bias_hat**2, rel=1e-10)
            assert 0.0 <= c.censor_frac <= 1.0
            assert c.reps == 4000
            assert c.mc_se > 0

    def test_worker_count_is_invisible(self):
        ref = run_cell(ModelParams(0.6), 30, 2500, master_seed=52, workers=1)
        for workers in (4, 8):
            other = run_cell(ModelParams(0.6), 30, 2500, master_seed=52, workers=workers)
            assert other == ref

    def test_uneven_batch_tail(self):
        reps = BATCH_SIZE + 17
        stats = run_cell(ModelParams(0.2), 10, reps, estimators=("r1",), master_seed=53)
        assert stats["r1"].reps == reps

    def test_censor_frac_near_half_at_independence(self):
        # the raw Pearson statistic is symmetric about 0 only
        # asymptotically (O(1/sqrt(n)) skew), hence the wide band and
        # the convergence check across n
        cf = {}
        for n in (10, 50, 200):
            stats = run_cell(ModelParams(0.0), n, 30_000, estimators=("r1",), master_seed=54, workers=4)
            cf[n] = stats["r1"].censor_frac
        assert abs(cf[50] - 0.5) <= 0.04
        assert abs(cf[10] - 0.5) > abs(cf[200] - 0.5)
        assert cf[200] < cf[50] < cf[10]


class TestRunSweep:
    def test_cardinality(self):
        cfg = SweepConfig(
            n_list=(5, 10, 20),
            r_grid=parse_r_grid("0:0.02:0.98"),
            reps=4,
            master_seed=55,
            include_bounds=False,
        )
        res = run_sweep(cfg)
        assert len(res.cells) == 3 * 50 * 3

    def test_bounds_joined(self):
        cfg = SweepConfig(
            n_list=(25,),
            r_grid=(0.0, 0.5),
            reps=64,
            master_seed=56,
        )
        res = run_sweep(cfg)
        assert set(res.bounds) == {25}
        assert res.bounds[25].sigma2_cr[0] == pytest.approx(1 / 25, rel=1e-9)


@pytest.fixture(scope="module")
def small_sweep():
    cfg = SweepConfig(
        n_list=(12,),
        r_grid=(0.0, 0.4, 0.8),
        reps=600,
        master_seed=57,
        workers=1,
    )
    return run_sweep(cfg)


class TestEmit:
    def test_csv_schema_and_counts(self, small_sweep, tmp_path):
        paths = emit(small_sweep, tmp_path)
        lines = Path(paths["csv"]).read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        body = lines[1:]
        estimates = [l for l in body if l.startswith("estimate,")]
        bound_rows = [l for l in body if l.startswith("bound,")]
        assert len(estimates) == 3 * 3  # cells x estimators
        assert len(bound_rows) == 3
        assert len(body) == len(estimates) + len(bound_rows)

    def test_reemit_is_byte_identical(self, small_sweep, tmp_path):
        a = Path(emit(small_sweep, tmp_path / "a")["csv"]).read_bytes()
        b = Path(emit(small_sweep, tmp_path / "b")["csv"]).read_bytes()
        assert a == b

    def test_manifest_reproduces_run(self, small_sweep, tmp_path):
        paths = emit(small_sweep, tmp_path)
        cfg = load_config(paths["manifest"])
        res2 = run_sweep(cfg)
        again = emit(res2, tmp_path / "again")
        assert Path(again["csv"]).read_bytes() == Path(paths["csv"]).read_bytes()

    def test_estimate_rows_carry_bounds(self, small_sweep, tmp_path):
        paths = emit(small_sweep, tmp_path)
        lines = Path(paths["csv"]).read_text().splitlines()
        header = lines[0].split(",")
        row = dict(zip(header, lines[1].split(",")))
        assert float(row["sigma2_cr"]) > 0
        assert float(row["eps2_ms"]) > 0

    def test_plot_script_written(self, small_sweep, tmp_path):
        paths = emit(small_sweep, tmp_path, plot_script=True)
        text = Path(paths["plot_script"]).read_text()
        assert "semilogy" in text
        compile(text, paths["plot_script"], "exec")

    def test_plot_data_structure(self, small_sweep, tmp_path):
        # per n: one bound-curve pair and one curve per estimator
        paths = emit(small_sweep, tmp_path)
        lines = Path(paths["csv"]).read_text().splitlines()[1:]
        names = {l.split(",")[3] for l in lines if l.startswith("estimate,")}
        assert names == {"r1", "r2", "r3"}
        n_bound = sum(1 for l in lines if l.startswith("bound,"))
        assert n_bound == len(small_sweep.config.r_grid)


class TestLoadConfig:
    def test_key_value_form(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text(
            "# tiny run\n"
            "n_list = 10, 20\n"
            "r_grid = 0:0.5:0.5\n"
            "reps = 7\n"
            "master_seed = 3\n"
            "estimators = r1, r3\n"
            "workers = 2\n"
        )
        cfg = load_config(path)
        assert cfg.n_list == (10, 20)
        assert cfg.r_grid == (0.0, 0.5)
        assert cfg.estimators == ("r1", "r3")

    def test_json_form(self, tmp_path):
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps({"n_list": [10], "r_grid": [0.0, 0.2], "reps": 5}))
        cfg = load_config(path)
        assert cfg.n_list == (10,) and cfg.reps == 5

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("replications = 5\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_line(self, tmp_path):
        path = tmp_path / "bad2.cfg"
        path.write_text("just some words\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestCellStatsInvariants:
    def test_sweep_cells_satisfy_mse_identity(self, small_sweep):
        for c in small_sweep.cells:
            assert isinstance(c, CellStats)
            assert c.mse_hat == pytest.approx(c.var_hat + c.bias_hat**2, rel=1e-10)
            assert c.mse_hat <= 1.0
            assert math.isfinite(c.mc_se)
