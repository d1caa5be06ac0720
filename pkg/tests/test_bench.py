import json
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stiefel_nepv import bench, cli, problems
from stiefel_nepv.errors import ConfigError

ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]


def _cfg(**kw):
    base = dict(problem="sparse_pca", grid=[[30, 2]], mu=[0.5], solvers=["nepv_admm"],
                seeds=[0], max_iters=200)
    base.update(kw)
    return bench.ExperimentConfig.from_dict(base)


def _row(**kw):
    base = dict(mu=0.5, n=300, p=5, solver="nepv_admm", seed=0, objective=1.15801,
                sparsity=0.996667, iters=174, wall_time_s=1.51763, converged=True)
    base.update(kw)
    return bench.SummaryRow(**base)


class TestConfig:
    @pytest.mark.parametrize("key", ["solvers", "seeds", "mu", "grid"])
    def test_empty_lists_rejected(self, key):
        with pytest.raises(ConfigError):
            _cfg(**{key: []})

    def test_bad_pair(self):
        with pytest.raises(ConfigError):
            _cfg(grid=[[3, 5]])

    def test_unknown_solver(self):
        with pytest.raises(ConfigError):
            _cfg(solvers=["manpg"])

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            bench.ExperimentConfig.from_dict({"problem": "sparse_pca", "color": "red"})

    def test_bad_solver_option(self):
        with pytest.raises(ConfigError):
            _cfg(solver_options={"beta_schedule": 2})
        with pytest.raises(ConfigError):
            _cfg(solver_options={"rsg_step0": -1})

    def test_shipped_configs_parse(self):
        for name in ("table1", "text_grid", "smoke"):
            bench.ExperimentConfig.from_json(ROOT / "configs" / f"{name}.json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            bench.ExperimentConfig.from_json(tmp_path / "nope.json")


def test_table1_grid_row_count():
    cfg = bench.ExperimentConfig.from_json(ROOT / "configs" / "table1.json")
    cfg.max_iters = 1
    rows, traces = bench.run_experiment(cfg)
    assert len(rows) == 2 * 4 * 3 * 5 == 120
    assert len(traces) == 120
    assert {(r.mu, r.n, r.p) for r in rows} == {
        (mu, n, p) for mu in (0.5, 1.0) for n, p in [(300, 5), (300, 50), (500, 5), (500, 50)]
    }


def test_smoke_config_is_fast():
    cfg = bench.ExperimentConfig.from_json(ROOT / "configs" / "smoke.json")
    t0 = time.perf_counter()
    rows, _ = bench.run_experiment(cfg)
    assert time.perf_counter() - t0 < 5.0
    assert all(not r.error for r in rows)


def test_data_rng_stream_per_cell():
    cfg = _cfg(grid=[[30, 2], [30, 3]])
    a = bench.build_problem(cfg, 0.5, 30, 2, 0, 0).data["A"]
    b = bench.build_problem(cfg, 0.5, 30, 3, 0, 1).data["A"]
    c = bench.build_problem(cfg, 0.5, 30, 2, 0, 0).data["A"]
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, c)


def test_data_csv_input(tmp_path):
    A = np.random.default_rng(0).standard_normal((25, 40))
    problems.save_matrix_csv(tmp_path / "A.csv", A)
    cfg = _cfg(grid=[[25, 3]], data_csv=str(tmp_path / "A.csv"))
    rows, _ = bench.run_experiment(cfg)
    direct = problems.sparse_pca_from_data(A, 3, 0.5)
    from stiefel_nepv.solvers import solve_nepv_admm, SolverConfig

    ref = solve_nepv_admm(direct, SolverConfig(max_outer_iters=200))
    assert rows[0].objective == ref.final_objective


def test_data_csv_dimension_mismatch(tmp_path):
    problems.save_matrix_csv(tmp_path / "A.csv", np.ones((10, 4)))
    with pytest.raises(ConfigError):
        bench.run_experiment(_cfg(grid=[[25, 3]], data_csv=str(tmp_path / "A.csv")))


def test_failures_are_recorded_not_fatal(monkeypatch):
    real = bench.solve

    def flaky(problem, config, callback=None):
        if config.solver_kind.value == "madmm":
            raise RuntimeError("boom")
        return real(problem, config, callback)

    monkeypatch.setattr(bench, "solve", flaky)
    cfg = _cfg(solvers=["nepv_admm", "madmm"], seeds=[0, 1])
    rows, traces = bench.run_experiment(cfg)
    assert len(rows) == 4
    bad = [r for r in rows if r.solver == "madmm"]
    assert all(not r.converged and "boom" in r.error and math.isnan(r.objective) for r in bad)
    assert len(traces) == 2


class TestEmitSummary:
    def test_one_row(self, tmp_path):
        path = bench.emit_summary([_row()], tmp_path / "s.csv")
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("utf-8").splitlines()
        assert lines[0] == "mu,n,p,solver,seed,objective,sparsity,iters,wall_time_s,converged"
        assert len(lines) == 2
        assert lines[1].split(",")[5] == "1.15801"

    def test_six_significant_digits(self, tmp_path):
        path = bench.emit_summary([_row(objective=1.158014567)], tmp_path / "s.csv")
        assert path.read_text().splitlines()[1].split(",")[5] == "1.15801"

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            bench.emit_summary([], tmp_path / "s.csv")

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(
        st.floats(0.01, 100), st.integers(1, 2000), st.integers(1, 100),
        st.sampled_from(["nepv_admm", "rsg", "madmm"]), st.integers(0, 10**6),
        st.floats(-1e6, 1e6), st.floats(0, 1), st.integers(0, 5000), st.floats(0, 1e4),
        st.booleans()), min_size=1, max_size=8))
    def test_round_trip(self, tmp_path_factory, recs):
        sig6 = lambda x: float(f"{x:.6g}")
        rows = [bench.SummaryRow(sig6(a), b, c, d, e, sig6(f), sig6(g), h, sig6(i), j)
                for a, b, c, d, e, f, g, h, i, j in recs]
        path = bench.emit_summary(rows, tmp_path_factory.mktemp("rt") / "s.csv")
        assert bench.parse_summary(path) == rows


@pytest.fixture(scope="module")
def runs():
    return bench.run_experiment(_cfg(solvers=["nepv_admm", "madmm", "rsg"]))


class TestEmitTrace:
    def test_columns_and_ordering(self, runs, tmp_path):
        rows, traces = runs
        for key, trace in traces.items():
            madmm = key[3] == "madmm"
            path = bench.emit_trace(trace, tmp_path / f"{key[3]}.csv", with_inner=madmm)
            header = path.read_text().splitlines()[0].split(",")
            assert header == bench.TRACE_HEADER + (["inner_iters_cum"] if madmm else [])
            cols = bench.parse_trace(path)
            assert cols["iter"] == list(range(len(trace)))
            assert np.all(np.diff(cols["elapsed_s"]) >= 0)

    def test_converged_stopping_echo(self, runs, tmp_path):
        rows, traces = runs
        for r in rows:
            if r.converged:
                path = bench.emit_trace(traces[(r.mu, r.n, r.p, r.solver, r.seed)],
                                        tmp_path / "t.csv")
                obj = bench.parse_trace(path)["objective"]
                assert abs(obj[-1] - obj[-2]) / abs(obj[-2]) < 1e-8

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            bench.emit_trace([], tmp_path / "t.csv")


def test_aggregate_means():
    rows = [_row(seed=0, objective=1.0), _row(seed=1, objective=3.0),
            _row(seed=2, objective=math.nan, error="x", converged=False)]
    (agg,) = bench.aggregate(rows)
    assert agg["objective_mean"] == 2.0
    assert agg["runs"] == 3 and agg["failed"] == 1
    assert agg["converged_frac"] == pytest.approx(2 / 3)


class TestCli:
    def _write(self, tmp_path, **kw):
        d = dict(problem="sparse_pca", grid=[[30, 2], [40, 3]], mu=[0.5, 1.0],
                 solvers=["nepv_admm", "rsg", "madmm"], seeds=[0, 1], max_iters=150)
        d.update(kw)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(d))
        return path

    def test_run_outputs(self, tmp_path):
        cfg = self._write(tmp_path)
        out = tmp_path / "out"
        assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        rows = bench.parse_summary(out / "summary.csv")
        assert len(rows) == 2 * 2 * 3 * 2
        assert (out / "summary_mean.csv").exists()
        assert len(list((out / "traces").glob("*.csv"))) == 24
        assert not (out / "errors.csv").exists()

    def test_no_timing_byte_identical(self, tmp_path):
        cfg = self._write(tmp_path)
        outs = []
        for i, extra in enumerate([[], ["--jobs", "2"]]):
            out = tmp_path / f"o{i}"
            assert cli.main(["run", "--config", str(cfg), "--out", str(out), "--no-timing",
                             *extra]) == 0
            outs.append((out / "summary.csv").read_bytes())
        assert outs[0] == outs[1]
        assert all(r.wall_time_s == 0.0 for r in bench.parse_summary(tmp_path / "o0" / "summary.csv"))

    def test_seed_override(self, tmp_path):
        cfg = self._write(tmp_path, grid=[[30, 2]], mu=[0.5])
        out = tmp_path / "out"
        assert cli.main(["run", "--config", str(cfg), "--out", str(out),
                         "--seed-override", "7"]) == 0
        assert {r.seed for r in bench.parse_summary(out / "summary.csv")} == {7}

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = self._write(tmp_path, solvers=[])
        assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_missing_out_dir(self, tmp_path):
        assert cli.main(["run", "--config", str(self._write(tmp_path))]) == 1

    def test_partial_failure_exit(self, tmp_path, monkeypatch):
        def broken(problem, config, callback=None):
            raise RuntimeError("nope")

        monkeypatch.setattr(bench, "solve", broken)
        cfg = self._write(tmp_path, grid=[[30, 2]], mu=[0.5], seeds=[0])
        out = tmp_path / "out"
        assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 2
        assert len(bench.parse_summary(out / "summary.csv")) == 3
        assert (out / "errors.csv").exists()

    def test_jobs_env(self, monkeypatch):
        monkeypatch.setenv(bench.JOBS_ENV, "3")
        assert bench.default_jobs() == 3
        monkeypatch.setenv(bench.JOBS_ENV, "junk")
        assert bench.default_jobs() == 1

    def test_demo(self, capsys):
        assert cli.main(["demo", "--problem", "sparse_pca", "--n", "40", "--p", "3",
                         "--mu", "0.5"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == ",".join(bench.SUMMARY_HEADER)
        fields = out[1].split(",")
        assert fields[:5] == ["0.5", "40", "3", "nepv_admm", "0"]

    @pytest.mark.parametrize("problem", ["compressed_modes", "feature_select"])
    def test_demo_other_problems(self, problem, capsys):
        assert cli.main(["demo", "--problem", problem, "--n", "30", "--p", "2", "--mu", "1",
                         "--max-iters", "100"]) == 0
