import numpy as np
import pytest

from manitrans.bench_cli import (
    BenchConfig, build_parser, config_from_args, main, make_adapter,
    run_isometry, run_timing, run_verify, write_csv, CSV_SCHEMA_COMMENT)
from manitrans.errors import ConfigError


def read_csv(path):
    return path.read_text(encoding="utf-8").splitlines()


class TestConfig:
    def test_rejects_unknown_manifold(self):
        with pytest.raises(ConfigError):
            BenchConfig(manifold="torus")

    def test_rejects_nonincreasing_grid(self):
        with pytest.raises(ConfigError):
            BenchConfig(manifold="so", n=4, d=2, t_grid=(1.0, 1.0))

    def test_rejects_zero_repeats(self):
        with pytest.raises(ConfigError):
            BenchConfig(manifold="so", n=4, d=2, repeats=0)

    def test_flag_requires_blocks(self):
        with pytest.raises(ConfigError):
            make_adapter(BenchConfig(manifold="flag", n=8))

    def test_flag_requires_canonical_alpha(self):
        with pytest.raises(ConfigError):
            make_adapter(BenchConfig(manifold="flag", n=8, d_list=(2, 2),
                                     alpha=0.8))


class TestRunners:
    def test_timing_rows(self):
        config = BenchConfig(manifold="stiefel", n=16, d=3, alpha=0.5,
                             t_grid=(0.5, 1.0), repeats=2, seed=7)
        rows = run_timing(config)
        assert len(rows) == 2
        for row in rows:
            assert row["residual_check"] == "pass"
            assert row["median_seconds"] > 0

    def test_isometry_rows_and_drift(self):
        config = BenchConfig(manifold="stiefel", n=20, d=4, alpha=1.0,
                             t_grid=(0.5, 1.5), num_vectors=5, seed=7)
        rows = run_isometry(config)
        assert len(rows) == 2
        for row in rows:
            assert row["max_gram_drift"] <= 1e-9

    def test_isometry_gl_small(self):
        config = BenchConfig(manifold="gl", n=4, beta=0.7,
                             t_grid=(0.5, 1.0), num_vectors=3, seed=7)
        rows = run_isometry(config)
        assert max(row["max_gram_drift"] for row in rows) <= 1e-8

    def test_verify_small_instances(self):
        for manifold, extra in (("stiefel", dict(n=8, d=3, alpha=1.0)),
                                ("so", dict(n=6, d=2, alpha=0.8)),
                                ("gl", dict(n=4, beta=0.7)),
                                ("grassmann", dict(n=7, d=2)),
                                ("flag", dict(n=10, d_list=(2, 2), alpha=0.5))):
            config = BenchConfig(manifold=manifold, t_grid=(0.5, 1.0), seed=3,
                                 **extra)
            rows = run_verify(config)
            for row in rows:
                assert row["oracle_error"] <= 1e-6
                assert row["fd_residual"] <= 1e-5

    def test_singleton_grid_single_row(self):
        config = BenchConfig(manifold="so", n=5, d=2, alpha=0.8,
                             t_grid=(1.0,), repeats=1, seed=3)
        assert len(run_timing(config)) == 1

    def test_isometry_time_zero_grid_has_zero_drift(self):
        config = BenchConfig(manifold="stiefel", n=12, d=3, alpha=0.5,
                             t_grid=(0.0,), num_vectors=3, seed=3)
        rows = run_isometry(config)
        assert rows[0]["max_gram_drift"] == 0.0

    def test_verify_caps_size(self):
        config = BenchConfig(manifold="stiefel", n=100, d=3, t_grid=(1.0,))
        with pytest.raises(ConfigError):
            run_verify(config)

    def test_isometry_reproducible_with_fixed_seed(self):
        config = BenchConfig(manifold="stiefel", n=16, d=3, alpha=0.5,
                             t_grid=(0.5, 2.0), num_vectors=4, seed=11)
        rows_a = run_isometry(config)
        rows_b = run_isometry(config)
        assert rows_a == rows_b


class TestCsvAndCli:
    def test_csv_format(self, tmp_path):
        out = tmp_path / "rows.csv"
        write_csv([{"a": 1, "b": 0.5}, {"a": 2, "b": float(np.float64(0.25))}],
                  str(out))
        lines = read_csv(out)
        assert lines[0] == CSV_SCHEMA_COMMENT
        assert lines[1] == "a,b"
        assert lines[2] == "1,0.5"
        assert lines[3] == "2,0.25"

    def test_cli_verify_roundtrip(self, tmp_path):
        out = tmp_path / "verify.csv"
        code = main(["verify", "--manifold", "so", "--n", "5", "--d", "2",
                     "--alpha", "0.8", "--t-grid", "0.5,1", "--seed", "5",
                     "--out", str(out)])
        assert code == 0
        lines = read_csv(out)
        assert lines[0] == CSV_SCHEMA_COMMENT
        assert len(lines) == 4  # comment, header, two rows

    def test_cli_config_error_exit_code(self, capsys):
        code = main(["verify", "--manifold", "stiefel", "--n", "100",
                     "--d", "3", "--t-grid", "1"])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_cli_bad_grid_exit_code(self, capsys):
        code = main(["bench", "--manifold", "so", "--n", "5", "--d", "2",
                     "--t-grid", "2,1"])
        assert code == 2

    def test_cli_verification_failure_exit_code(self, monkeypatch, capsys):
        import manitrans.bench_cli as bc

        def broken_transport(self, plan, y, eta, t):
            return eta + 1.0  # loses tangency

        monkeypatch.setattr(bc._StiefelAdapter, "transport_with_plan",
                            broken_transport)
        code = main(["bench", "--manifold", "stiefel", "--n", "10", "--d", "2",
                     "--t-grid", "1", "--repeats", "1"])
        assert code == 3
        assert "verification failure" in capsys.readouterr().err

    def test_parser_dlist(self):
        parser = build_parser()
        args = parser.parse_args(
            ["isometry", "--manifold", "flag", "--n", "12",
             "--d-list", "2,2", "--alpha", "0.5", "--t-grid", "0.5"])
        config = config_from_args(args)
        assert config.d_list == (2, 2)
