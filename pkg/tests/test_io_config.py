"""File formats and configuration canonicalization."""

import numpy as np
import pytest

from prodnls.config import ConfigError, RunConfig
from prodnls.grid import make_grid, to_spectral
from prodnls.io import (
    SnapshotWriter,
    load_eigen_table,
    read_snapshots,
    save_eigen_table,
)
from prodnls.propagate import torus_eigen_table

from conftest import random_samples


class TestSnapshotStream:
    def test_round_trip_bit_exact(self, tmp_path):
        grid = make_grid(2, 1, 16 * np.pi, 16, 8)
        fields = [to_spectral(random_samples(grid, s), grid) for s in range(3)]
        path = str(tmp_path / "run.snaps")
        with SnapshotWriter(path, grid, config_hash="ab" * 32) as writer:
            for i, f in enumerate(fields):
                writer.write(0.5 * i, f)
        grid2, config_hash, records = read_snapshots(path)
        assert grid2 == grid
        assert config_hash == "ab" * 32
        assert [t for t, _ in records] == [0.0, 0.5, 1.0]
        for (t, f_read), f_orig in zip(records, fields):
            assert np.array_equal(f_read.coeffs, f_orig.coeffs)

    def test_split_grid_header(self, tmp_path):
        grid = make_grid(3, 1, 4 * np.pi, 8, 4, split_index=2)
        path = str(tmp_path / "run.snaps")
        with SnapshotWriter(path, grid) as writer:
            writer.write(0.0, to_spectral(random_samples(grid, 1), grid))
        grid2, config_hash, records = read_snapshots(path)
        assert grid2.split_index == 2
        assert config_hash == ""
        assert len(records) == 1

    def test_truncated_stream_reads_complete_records(self, tmp_path):
        grid = make_grid(1, 1, 4 * np.pi, 8, 4)
        path = str(tmp_path / "run.snaps")
        with SnapshotWriter(path, grid) as writer:
            writer.write(0.0, to_spectral(random_samples(grid, 1), grid))
            writer.write(1.0, to_spectral(random_samples(grid, 2), grid))
        data = open(path, "rb").read()
        open(path, "wb").write(data[:-17])  # chop into the final record
        _, _, records = read_snapshots(path)
        assert len(records) == 1

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.snaps"
        path.write_bytes(b"NOTMAGIC" + b"\0" * 100)
        with pytest.raises(ValueError, match="magic"):
            read_snapshots(str(path))


class TestEigenTableFile:
    def test_round_trip(self, tmp_path):
        table = torus_eigen_table(8)
        path = str(tmp_path / "torus.eig")
        save_eigen_table(path, table)
        loaded = load_eigen_table(path)
        assert np.array_equal(loaded.eigenvalues, table.eigenvalues)
        assert np.array_equal(loaded.weights, table.weights)
        assert np.array_equal(loaded.functions, table.functions)

    def test_orthonormality_validated_at_load(self, tmp_path):
        table = torus_eigen_table(8)
        path = str(tmp_path / "bad.eig")
        save_eigen_table(path, table)
        # corrupt one eigenfunction row in place
        data = bytearray(open(path, "rb").read())
        data[-16:] = b"\x00" * 16
        open(path, "wb").write(bytes(data))
        with pytest.raises(ValueError, match="orthonormal"):
            load_eigen_table(path)


class TestRunConfig:
    def test_defaults_parse_emit_fixed_point(self):
        cfg = RunConfig.defaults()
        text = cfg.canonical()
        again = RunConfig.parse(text)
        assert again.canonical() == text
        assert again.hash() == cfg.hash()

    def test_canonical_is_byte_stable_under_reparse(self):
        text = "evolve.kappa = -1\ndata.delta = 0.02\n# comment\ngrid.n=2\n"
        cfg = RunConfig.parse(text)
        assert RunConfig.parse(cfg.canonical()).canonical() == cfg.canonical()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.parse("no.such.key = 3\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.parse("grid.n = banana\n")

    def test_overrides_change_hash(self):
        cfg = RunConfig.defaults()
        other = cfg.with_overrides(["data.seed=5"])
        assert other["data.seed"] == 5
        assert other.hash() != cfg.hash()
        with pytest.raises(ConfigError):
            cfg.with_overrides(["data.seed"])

    def test_optional_values(self):
        cfg = RunConfig.defaults().with_overrides(["data.band_limit=1.5", "grid.split_index=2"])
        assert cfg["data.band_limit"] == 1.5
        assert cfg["grid.split_index"] == 2
        back = RunConfig.parse(cfg.canonical())
        assert back["grid.split_index"] == 2
        none_again = back.with_overrides(["grid.split_index=none"])
        assert none_again["grid.split_index"] is None

    def test_float_repr_round_trip(self):
        cfg = RunConfig.defaults().with_overrides(["evolve.dt=0.015625", "data.delta=1e-2"])
        back = RunConfig.parse(cfg.canonical())
        assert back["evolve.dt"] == 0.015625
        assert back["data.delta"] == 1e-2

    def test_typed_views(self):
        cfg = RunConfig.defaults().with_overrides(
            ["grid.n=3", "grid.split_index=2", "grid.points_per_axis=8", "grid.torus_modes=4"]
        )
        grid = cfg.grid()
        assert grid.split_index == 2
        spec = cfg.sobolev_spec(grid)
        assert spec.variant == "split"
        evo = cfg.evolution()
        assert evo.n_steps == 64

    def test_invalid_grid_is_config_error(self):
        cfg = RunConfig.defaults().with_overrides(["grid.points_per_axis=12"])
        with pytest.raises(ConfigError):
            cfg.grid()
